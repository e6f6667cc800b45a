use alloc::vec::Vec;

use super::{HistoryField, Scale, Solution, SolveStatus, SolverConfig, Trajectory, TruncationReason, Warning};
use crate::error::{Error, Result};
use crate::limit_field::check_limit_dimension;
use crate::oscillatory::MemoryField;
use crate::profiles::c_g;
use crate::vector::Vector;

/// Heun predictor–corrector with an inner fixed point on the newest node.
///
/// The trial value of `ξ_{k+1}` is written into the history before the
/// field is evaluated at `t_{k+1}`, so history-dependent fields see their own
/// update, as in a Picard iteration restricted to one step.
///
/// A corrector that does not settle within `fp_max_iter` iterations, or a
/// failing field, ends the run with [`SolveStatus::Truncated`]; the
/// trajectory keeps the accepted nodes only.
pub fn integrate_heun<F: HistoryField + ?Sized>(
    field: &F,
    xi0: Vector,
    dt: f64,
    steps: usize,
    fp_tol: f64,
    fp_max_iter: usize,
) -> Result<Solution> {
    xi0.check_dim(field.dimension())?;
    let mut traj = Trajectory::new(dt, xi0)?;
    let mut fields = Vec::with_capacity(steps + 1);
    let mut evaluations = 1;
    fields.push(field.eval(&traj, 0.0)?);

    let mut status = SolveStatus::Complete;
    for k in 0..steps {
        let t_next = traj.time(k + 1);
        match heun_step(field, &mut traj, fields[k], fp_tol, fp_max_iter, &mut evaluations) {
            Ok(f_next) => fields.push(f_next),
            Err(e) => {
                traj.truncate(k + 1);
                status = SolveStatus::Truncated {
                    time: t_next,
                    reason: TruncationReason::SolverFailure(e),
                };
                break;
            }
        }
    }

    Ok(Solution {
        trajectory: traj,
        fields,
        status,
        warnings: Vec::new(),
        evaluations,
    })
}

/// Appends `ξ_{k+1}` to `traj` and returns the field there.
fn heun_step<F: HistoryField + ?Sized>(
    field: &F,
    traj: &mut Trajectory,
    slope: Vector,
    fp_tol: f64,
    fp_max_iter: usize,
    evaluations: &mut usize,
) -> Result<Vector> {
    let k = traj.len() - 1;
    let dt = traj.dt();
    let t_next = traj.time(k + 1);
    let base = *traj.last();
    let mut trial = base + slope * dt;
    traj.push(trial)?;
    let mut iterations = 0;
    loop {
        iterations += 1;
        *evaluations += 1;
        let f_next = field.eval(traj, t_next)?;
        let corrected = base + (slope + f_next) * (0.5 * dt);
        let residual = corrected.distance(&trial);
        traj.replace_last(corrected)?;
        trial = corrected;
        if residual <= fp_tol {
            break;
        }
        if iterations >= fp_max_iter || !residual.is_finite() {
            return Err(Error::FixedPointDivergence {
                step: k + 1,
                t: t_next,
                residual,
                iterations,
            });
        }
    }
    *evaluations += 1;
    field.eval(traj, t_next)
}

/// Solves the memory equation `ξ' = 𝓕⁽ʰ⁾(ξ)` on `[0, T]`.
pub fn solve_memory(config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let h = match config.scale {
        Scale::Memory(h) => h,
        Scale::Limit => return Err(Error::invalid("solve_memory needs a positive h, got LIMIT")),
    };
    check_limit_dimension(config.dimension())?;
    let field = MemoryField::new(config.profile, h, &config.quad)?;
    let mut solution = integrate_heun(
        &field,
        config.xi0,
        config.dt,
        config.steps()?,
        config.fp_tolerance(),
        config.fp_max_iter,
    )?;
    let cg = c_g(&config.profile);
    if cg > 0.0 {
        let limit = h * h / (8.0 * cg);
        if config.dt * (config.horizon + config.dt) > limit {
            solution.warnings.push(Warning::PicardWindow { dt: config.dt, limit });
        }
    }
    Ok(solution)
}

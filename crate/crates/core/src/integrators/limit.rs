use alloc::vec::Vec;

use super::{LocalField, Solution, SolveStatus, SolverConfig, Trajectory, TruncationReason};
use crate::error::Result;
use crate::limit_field::{check_limit_dimension, LimitField};
use crate::vector::Vector;

/// Classical fourth-order Runge–Kutta on a uniform grid.
///
/// Stops early, with [`SolveStatus::Truncated`], when `|ξ|` falls below
/// `floor` or the field fails; the returned trajectory ends at the last
/// good state.
pub fn integrate_rk4<F: LocalField + ?Sized>(
    field: &F,
    xi0: Vector,
    dt: f64,
    steps: usize,
    floor: f64,
) -> Result<Solution> {
    xi0.check_dim(field.dimension())?;
    let mut traj = Trajectory::new(dt, xi0)?;
    let mut fields = Vec::with_capacity(steps + 1);
    let mut evaluations = 0;
    let mut status = SolveStatus::Complete;

    let mut eval = |u: &Vector| {
        evaluations += 1;
        field.eval(u)
    };

    let mut current = match eval(&xi0) {
        Ok(f) => f,
        Err(e) => {
            return Ok(Solution {
                trajectory: traj,
                fields: alloc::vec![Vector::zeros(xi0.dim()) * f64::NAN],
                status: SolveStatus::Truncated {
                    time: 0.0,
                    reason: TruncationReason::SolverFailure(e),
                },
                warnings: Vec::new(),
                evaluations,
            })
        }
    };
    fields.push(current);

    for k in 0..steps {
        let t = traj.time(k);
        let xi = *traj.last();
        let stage = |k1: &Vector, eval: &mut dyn FnMut(&Vector) -> Result<Vector>| -> Result<Vector> {
            let k2 = eval(&(xi + *k1 * (0.5 * dt)))?;
            let k3 = eval(&(xi + k2 * (0.5 * dt)))?;
            let k4 = eval(&(xi + k3 * dt))?;
            let mut next = xi;
            next.axpy(dt / 6.0, &(*k1 + 2.0 * k2 + 2.0 * k3 + k4));
            Ok(next)
        };
        let next = match stage(&current, &mut eval) {
            Ok(next) => next,
            Err(e) => {
                status = SolveStatus::Truncated {
                    time: t,
                    reason: TruncationReason::SolverFailure(e),
                };
                break;
            }
        };
        if next.norm() < floor {
            status = SolveStatus::Truncated {
                time: t + dt,
                reason: TruncationReason::NormFloor { floor },
            };
            break;
        }
        current = match eval(&next) {
            Ok(f) => f,
            Err(e) => {
                status = SolveStatus::Truncated {
                    time: t + dt,
                    reason: TruncationReason::SolverFailure(e),
                };
                break;
            }
        };
        traj.push(next)?;
        fields.push(current);
    }

    Ok(Solution {
        trajectory: traj,
        fields,
        status,
        warnings: Vec::new(),
        evaluations,
    })
}

/// Solves the limit equation `ξ' = F⁽⁰⁾(ξ)` on `[0, T]`.
pub fn solve_limit(config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    check_limit_dimension(config.dimension())?;
    let field = LimitField::new(config.profile, &config.squad)?;
    let floor = 1e-6 * config.xi0.norm();
    integrate_rk4(&field, config.xi0, config.dt, config.steps()?, floor)
}

//! Quantitative checks on solver output: decay, derivative and averaging
//! bounds, field envelopes, the sandwich bound and `h`-convergence studies.
//!
//! Every check returns a [`BoundReport`]; failures are data, not errors.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrators::{
    integrate_rk4, solve_limit, solve_memory, LocalField, Scale, Solution, SolverConfig, Trajectory,
};
use crate::limit_field::{LimitField, SphereQuadSpec};
use crate::oscillatory::{eval_f_h_frozen, MemoryField, QuadratureSpec};
use crate::profiles::{nu, ConstantSet, Profile};
use crate::vector::Vector;

/// Relative slack of the decay check.
pub const DECAY_SLACK: f64 = 1e3 * f64::EPSILON;
/// Relative slack on envelopes built from proof constants.
pub const ENVELOPE_SLACK: f64 = 0.05;
/// Relative slack between the solver and the scalar sandwich oracle.
pub const SANDWICH_SLACK: f64 = 1e-9;
/// Largest step of the scalar comparison integrator.
pub const SANDWICH_ORACLE_DT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    /// Abscissa: a time, an `h`, a ratio `h/t`; see the report.
    pub x: f64,
    pub observed: f64,
    /// Upper envelope.
    pub envelope: f64,
    /// Lower envelope for two-sided checks.
    pub lower: Option<f64>,
}

impl Sample {
    pub fn new(x: f64, observed: f64, envelope: f64) -> Self {
        Sample {
            x,
            observed,
            envelope,
            lower: None,
        }
    }

    /// `observed / envelope`, and `lower / observed` when two-sided.
    pub fn ratio(&self) -> f64 {
        let upper = ratio(self.observed, self.envelope);
        match self.lower {
            Some(lo) => upper.max(ratio(lo, self.observed)),
            None => upper,
        }
    }

    fn violates(&self, slack: f64) -> bool {
        let above = !(self.observed <= self.envelope * (1.0 + slack));
        let below = match self.lower {
            Some(lo) => !(lo * (1.0 - slack) <= self.observed),
            None => false,
        };
        above || below
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Outcome of one bound check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub name: String,
    pub samples: Vec<Sample>,
    /// True iff some sample leaves its envelope by more than `slack`.
    pub violated: bool,
    pub max_ratio: f64,
    pub slack: f64,
    /// False when the hypotheses of the bound fail; such a report never
    /// counts as violated.
    pub applicable: bool,
}

impl BoundReport {
    pub fn new(name: &str, samples: Vec<Sample>, slack: f64) -> Self {
        let violated = samples.iter().any(|s| s.violates(slack));
        let max_ratio = samples.iter().map(Sample::ratio).fold(0.0, f64::max);
        BoundReport {
            name: name.into(),
            samples,
            violated,
            max_ratio,
            slack,
            applicable: true,
        }
    }

    pub fn not_applicable(name: &str, slack: f64) -> Self {
        BoundReport {
            name: name.into(),
            samples: Vec::new(),
            violated: false,
            max_ratio: 0.0,
            slack,
            applicable: false,
        }
    }

    pub fn passed(&self) -> bool {
        !self.violated
    }
}

/// `|ξ_{k+1}| <= |ξ_k| (1 + 10³ ε)` at every step.
pub fn check_decay(traj: &Trajectory) -> BoundReport {
    let samples = traj
        .values()
        .windows(2)
        .enumerate()
        .map(|(k, w)| Sample::new(traj.time(k + 1), w[1].norm(), w[0].norm()))
        .collect();
    BoundReport::new("decay", samples, DECAY_SLACK)
}

/// Finite-difference speeds `|ξ_{k+1} - ξ_k| / dt` against `2 C1_g`.
pub fn check_derivative_bound(traj: &Trajectory, constants: &ConstantSet) -> BoundReport {
    let envelope = 2.0 * constants.c1_g;
    let samples = finite_difference_speeds(traj)
        .into_iter()
        .map(|(t, speed)| Sample::new(t, speed, envelope))
        .collect();
    BoundReport::new("derivative", samples, ENVELOPE_SLACK)
}

/// Forward differences, stamped with the later time of each pair.
pub fn finite_difference_speeds(traj: &Trajectory) -> Vec<(f64, f64)> {
    let dt = traj.dt();
    traj.values()
        .windows(2)
        .enumerate()
        .map(|(k, w)| (traj.time(k + 1), w[1].distance(&w[0]) / dt))
        .collect()
}

/// Grid size of [`check_avg_control`] in each direction.
pub const AVG_GRID: usize = 20;

/// `|⟨ξ⟩_{t,hr} - ξ(t)| <= C1_g h r` on a `20 × 20` grid of `(t, r)` with
/// `0 < hr < t`. Samples are indexed by the span `hr`.
pub fn check_avg_control(traj: &Trajectory, h: f64, constants: &ConstantSet) -> Result<BoundReport> {
    if !(h > 0.0) {
        return Err(Error::invalid("h must be positive"));
    }
    let horizon = traj.horizon();
    let mut samples = Vec::with_capacity(AVG_GRID * AVG_GRID);
    for i in 1..=AVG_GRID {
        let t = horizon * i as f64 / AVG_GRID as f64;
        let now = traj.value_at(t)?;
        for j in 1..=AVG_GRID {
            let span = t * j as f64 / (AVG_GRID + 1) as f64;
            let avg = traj.running_average(t, span)?;
            samples.push(Sample::new(span, avg.distance(&now), constants.c1_g * span));
        }
    }
    Ok(BoundReport::new("avg_control", samples, ENVELOPE_SLACK))
}

/// `|F⁽ʰ⁾(u)(t) - F⁽⁰⁾(u)| <= C3_g (h/t)^{d/2-1}` on `t_grid × h_grid`.
///
/// Samples are indexed by `h/t`, in grid order (`t` outer).
pub fn check_lemma_envelopes(
    u: &Vector,
    t_grid: &[f64],
    h_grid: &[f64],
    profile: &Profile,
    constants: &ConstantSet,
    quad: &QuadratureSpec,
    squad: &SphereQuadSpec,
) -> Result<BoundReport> {
    let limit = LimitField::new(*profile, squad)?.eval(u)?;
    let mut samples = Vec::with_capacity(t_grid.len() * h_grid.len());
    for &t in t_grid {
        for &h in h_grid {
            let frozen = eval_f_h_frozen(u, t, h, profile, quad)?;
            samples.push(Sample::new(
                h / t,
                frozen.distance(&limit),
                constants.limit_envelope(h, t),
            ));
        }
    }
    Ok(BoundReport::new("frozen_vs_limit", samples, ENVELOPE_SLACK))
}

/// `|𝓕⁽ʰ⁾(ξ)(t) - F⁽ʰ⁾(ξ_t)(t)| <= C2_g h^{ν(d) - δ}` at `count` equally
/// spaced times `T i / count`, `i = 1..=count`, along a memory trajectory.
pub fn check_memory_envelope(
    traj: &Trajectory,
    h: f64,
    count: usize,
    profile: &Profile,
    constants: &ConstantSet,
    quad: &QuadratureSpec,
) -> Result<BoundReport> {
    let field = MemoryField::new(*profile, h, quad)?;
    let envelope = constants.memory_envelope(h);
    let horizon = traj.horizon();
    let mut samples = Vec::with_capacity(count);
    for i in 1..=count {
        let t = horizon * i as f64 / count as f64;
        let memory = field.eval_at(traj, t)?;
        let frozen = eval_f_h_frozen(&traj.value_at(t)?, t, h, profile, quad)?;
        samples.push(Sample::new(t, memory.distance(&frozen), envelope));
    }
    Ok(BoundReport::new("memory_vs_frozen", samples, ENVELOPE_SLACK))
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points or a degenerate abscissa.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (libm::log(*x), libm::log(*y)))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `C_{m,f}` and `C_{M,f}`: the dissipation constant times the extremes of
/// `|f|²` on the closed ball of radius `2|ξ₀|`.
pub fn sandwich_constants(profile: &Profile, xi0: &Vector, constants: &ConstantSet) -> (f64, f64) {
    let (lo, hi) = profile.f_squared_extrema_on_ball(2.0 * xi0.norm());
    (constants.c_d * lo, constants.c_d * hi)
}

/// Solution of `y' = -C y^{d/2}`, `y(0) = y0`:
/// `y(t) = (y0^{1-d/2} + (d/2 - 1) C t)^{-2/(d-2)}`.
pub fn comparison_closed_form(y0: f64, c: f64, d: usize, t: f64) -> f64 {
    let p = 0.5 * d as f64 - 1.0;
    libm::pow(libm::pow(y0, -p) + p * c * t, -1.0 / p)
}

/// Scalar RK4 for `y' = -C y^{d/2}` sampled on `dt`-grid nodes, with
/// substeps no longer than [`SANDWICH_ORACLE_DT`].
pub fn comparison_oracle(y0: f64, c: f64, d: usize, dt: f64, nodes: usize) -> Vec<f64> {
    let sub = libm::ceil(dt / SANDWICH_ORACLE_DT).max(1.0) as usize;
    let k = dt / sub as f64;
    let power = 0.5 * d as f64;
    let rhs = |y: f64| -c * libm::pow(y.max(0.0), power);
    let mut y = y0;
    let mut out = Vec::with_capacity(nodes);
    out.push(y);
    for _ in 1..nodes {
        for _ in 0..sub {
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * k * k1);
            let k3 = rhs(y + 0.5 * k * k2);
            let k4 = rhs(y + k * k3);
            y += k / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(y);
    }
    out
}

/// Two-sided check `y_-(t) <= |ξ_t|² <= y_+(t)` on a limit trajectory, with
/// `y_±` solving the comparison equation with `C_{m,f}` and `C_{M,f}`.
///
/// Not applicable when `min |f|² = 0` on the ball. The node `t = 0`, where
/// both envelopes equal `|ξ₀|²`, is left out.
pub fn sandwich_envelopes(traj: &Trajectory, profile: &Profile, constants: &ConstantSet) -> BoundReport {
    let xi0 = traj.values()[0];
    let (c_min, c_max) = sandwich_constants(profile, &xi0, constants);
    if !(c_min > 0.0) {
        return BoundReport::not_applicable("sandwich", SANDWICH_SLACK);
    }
    let d = profile.dimension();
    let y0 = xi0.norm_squared();
    let upper = comparison_oracle(y0, c_min, d, traj.dt(), traj.len());
    let lower = comparison_oracle(y0, c_max, d, traj.dt(), traj.len());
    let samples = traj
        .values()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| Sample {
            x: traj.time(k),
            observed: v.norm_squared(),
            envelope: upper[k],
            lower: Some(lower[k]),
        })
        .collect();
    BoundReport::new("sandwich", samples, SANDWICH_SLACK)
}

/// Row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub h: f64,
    /// `sup_k |ξ⁽ʰ⁾(t_k) - ξ⁽⁰⁾(t_k)|`, or the solver error of this row.
    pub sup_error: core::result::Result<f64, Error>,
    /// Wall-clock seconds when measured by the caller.
    pub runtime: Option<f64>,
}

impl StudyRow {
    pub fn is_ok(&self) -> bool {
        self.sup_error.is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    /// Sorted by `h`, descending.
    pub rows: Vec<StudyRow>,
    /// Every row succeeded and the errors strictly decrease down the table.
    pub monotone: bool,
}

impl StudyTable {
    pub fn from_rows(mut rows: Vec<StudyRow>) -> Self {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        let monotone = rows.iter().all(StudyRow::is_ok)
            && rows.windows(2).all(|w| match (&w[0].sup_error, &w[1].sup_error) {
                (Ok(a), Ok(b)) => b < a,
                _ => false,
            });
        StudyTable { rows, monotone }
    }

    pub fn smallest_h(&self) -> Option<&StudyRow> {
        self.rows.last()
    }
}

/// Sub-steps of the reference limit run per study step.
pub const REFERENCE_REFINEMENT: usize = 4;

/// Limit-equation reference on the study grid, solved at `dt / 4`.
pub fn reference_solution(config: &SolverConfig) -> Result<Solution> {
    let mut fine = config.clone().with_scale(Scale::Limit);
    fine.dt = config.dt / REFERENCE_REFINEMENT as f64;
    solve_limit(&fine)
}

/// Reference values at the study-grid nodes.
pub fn reference_on_grid(reference: &Solution, nodes: usize) -> Result<Vec<Vector>> {
    let values = reference.trajectory.values();
    let needed = (nodes - 1) * REFERENCE_REFINEMENT + 1;
    if values.len() < needed {
        return Err(Error::invalid(alloc::format!(
            "reference run stopped at t = {} before the horizon",
            reference.trajectory.horizon()
        )));
    }
    Ok(values.iter().step_by(REFERENCE_REFINEMENT).take(nodes).copied().collect())
}

/// `sup_k |ξ⁽ʰ⁾(t_k) - ξ⁽⁰⁾(t_k)|` over the study grid; a run that stopped
/// early yields its error.
pub fn sup_error(solution: &Solution, reference: &[Vector]) -> Result<f64> {
    if let Some(e) = solution.failure() {
        return Err(e.clone());
    }
    let values = solution.trajectory.values();
    if values.len() != reference.len() {
        return Err(Error::invalid("memory run and reference have different grids"));
    }
    Ok(values
        .iter()
        .zip(reference)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max))
}

/// Solves the memory equation at `h` and measures it against `reference`.
pub fn study_row(config: &SolverConfig, h: f64, reference: &[Vector]) -> StudyRow {
    let sup = solve_memory(&config.clone().with_scale(Scale::Memory(h))).and_then(|s| sup_error(&s, reference));
    StudyRow {
        h,
        sup_error: sup,
        runtime: None,
    }
}

/// Sequential convergence study against one limit reference.
pub fn convergence_study(config: &SolverConfig, h_list: &[f64]) -> Result<StudyTable> {
    validate_h_list(h_list)?;
    let reference = reference_solution(config)?;
    let grid = reference_on_grid(&reference, config.steps()? + 1)?;
    let rows = h_list.iter().map(|&h| study_row(config, h, &grid)).collect();
    Ok(StudyTable::from_rows(rows))
}

pub fn validate_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.is_empty() {
        return Err(Error::invalid("h list is empty"));
    }
    if h_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::invalid("every h must be positive"));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("h list must be strictly descending"));
    }
    Ok(())
}

/// Step of the central differences in [`measure_lipschitz`], relative to `|x|`.
pub const LIPSCHITZ_STEP: f64 = 1e-4;

/// Empirical Lipschitz constant of `F⁽⁰⁾` on the ring `r <= |x| <= R`
/// bracketing the trajectory, with `r`, `R` the extreme norms widened by
/// `margin`.
///
/// At each probe the Jacobian is formed by central differences and its
/// Frobenius norm, an upper bound of the operator norm, is taken. Probes are
/// every trajectory node plus `±r e_i`, `±R e_i`.
pub fn measure_lipschitz(traj: &Trajectory, field: &LimitField, margin: f64) -> Result<f64> {
    let d = field.dimension();
    let norms = traj.values().iter().map(Vector::norm);
    let r = norms.clone().fold(f64::INFINITY, f64::min) * (1.0 - margin);
    let big_r = norms.fold(0.0, f64::max) * (1.0 + margin);
    if !(r > 0.0) {
        return Err(Error::SingularInput);
    }
    let mut probes: Vec<Vector> = traj.values().to_vec();
    for radius in [r, big_r] {
        for i in 0..d {
            probes.push(Vector::unit(d, i) * radius);
            probes.push(Vector::unit(d, i) * -radius);
        }
    }
    let mut lipschitz: f64 = 0.0;
    for x in &probes {
        let eps = LIPSCHITZ_STEP * x.norm();
        let mut frob2 = 0.0;
        for i in 0..d {
            let e = Vector::unit(d, i) * eps;
            let col = (field.eval(&(*x + e))? - field.eval(&(*x - e))?) * (0.5 / eps);
            frob2 += col.norm_squared();
        }
        lipschitz = lipschitz.max(libm::sqrt(frob2));
    }
    Ok(lipschitz)
}

/// `δ₁(h) = √h + T (C2_g h^{ν(d) - δ} + C3_g h^{(d-2)/4})`.
pub fn delta_one(h: f64, horizon: f64, constants: &ConstantSet) -> f64 {
    let exponent = nu(constants.dimension);
    libm::sqrt(h) + horizon * (constants.memory_envelope(h) + constants.c3_g * libm::pow(h, exponent))
}

/// `sup-error <= (L T e^{LT} + 1) δ₁(h)` on every study row; failed rows
/// count as violations.
pub fn gronwall_check(table: &StudyTable, lipschitz: f64, horizon: f64, constants: &ConstantSet) -> BoundReport {
    let growth = lipschitz * horizon * libm::exp(lipschitz * horizon) + 1.0;
    let samples = table
        .rows
        .iter()
        .map(|row| {
            let observed = *row.sup_error.as_ref().unwrap_or(&f64::INFINITY);
            Sample::new(row.h, observed, growth * delta_one(row.h, horizon, constants))
        })
        .collect();
    BoundReport::new("gronwall", samples, 0.0)
}

/// Runs [`integrate_rk4`] on `field` with the configuration's grid; used to
/// drive the analysis with alternative local fields.
pub fn solve_local<F: LocalField + ?Sized>(field: &F, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    integrate_rk4(field, config.xi0, config.dt, config.steps()?, 1e-6 * config.xi0.norm())
}

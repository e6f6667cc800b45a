//! Time integration of the memory equation `ξ' = 𝓕⁽ʰ⁾(ξ)` and the limit
//! equation `ξ' = F⁽⁰⁾(ξ)`.

mod limit;
mod memory;
mod trajectory;

use alloc::vec::Vec;

pub use limit::{integrate_rk4, solve_limit};
pub use memory::{integrate_heun, solve_memory};
pub use trajectory::Trajectory;

use crate::error::{Error, Result};
use crate::limit_field::SphereQuadSpec;
use crate::oscillatory::QuadratureSpec;
use crate::profiles::Profile;
use crate::vector::Vector;

/// A right-hand side that only sees the current state.
pub trait LocalField {
    fn dimension(&self) -> usize;
    fn eval(&self, u: &Vector) -> Result<Vector>;
}

/// A right-hand side that sees the recorded history up to `t`.
pub trait HistoryField {
    fn dimension(&self) -> usize;
    fn eval(&self, history: &Trajectory, t: f64) -> Result<Vector>;
}

/// Adapts a [`LocalField`] into a [`HistoryField`] reading `ξ(t)`.
#[derive(Debug, Clone)]
pub struct Localized<F>(pub F);

impl<F: LocalField> HistoryField for Localized<F> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn eval(&self, history: &Trajectory, t: f64) -> Result<Vector> {
        self.0.eval(&history.value_at(t)?)
    }
}

/// Which equation a configuration solves.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scale {
    /// The memory equation at parameter `h > 0`.
    Memory(f64),
    /// The limit equation.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    pub profile: Profile,
    pub scale: Scale,
    pub horizon: f64,
    pub dt: f64,
    pub xi0: Vector,
    pub quad: QuadratureSpec,
    pub squad: SphereQuadSpec,
    /// Corrector tolerance; `1e-10 (1 + |ξ₀|)` when `None`.
    pub fp_tol: Option<f64>,
    pub fp_max_iter: usize,
}

impl SolverConfig {
    pub fn new(profile: Profile, xi0: Vector, horizon: f64, dt: f64) -> Self {
        SolverConfig {
            profile,
            scale: Scale::Limit,
            horizon,
            dt,
            xi0,
            quad: QuadratureSpec::default(),
            squad: SphereQuadSpec::default(),
            fp_tol: None,
            fp_max_iter: 50,
        }
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn dimension(&self) -> usize {
        self.profile.dimension()
    }

    pub fn fp_tolerance(&self) -> f64 {
        self.fp_tol.unwrap_or(1e-10 * (1.0 + self.xi0.norm()))
    }

    /// Number of uniform steps; the horizon must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        let n = libm::round(self.horizon / self.dt);
        if (n * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::invalid(alloc::format!(
                "horizon {} is not a whole number of steps of size {}",
                self.horizon,
                self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.xi0.check_dim(self.dimension())?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::invalid("dt must satisfy 0 < dt <= horizon"));
        }
        if !(self.xi0.norm() > 0.0 && self.xi0.is_finite()) {
            return Err(Error::invalid("xi0 must be a finite non-zero vector"));
        }
        if let Scale::Memory(h) = self.scale {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid(alloc::format!("h must be positive, got {h}")));
            }
        }
        if let Some(tol) = self.fp_tol {
            if !(tol > 0.0) {
                return Err(Error::invalid("fp_tol must be positive"));
            }
        }
        if self.fp_max_iter == 0 {
            return Err(Error::invalid("fp_max_iter must be at least 1"));
        }
        self.quad.validate()?;
        self.squad.validate()?;
        self.steps()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Complete,
    /// The run stopped early at `time`; the trajectory ends there.
    Truncated { time: f64, reason: TruncationReason },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TruncationReason {
    /// `|ξ|` dropped below the floor `1e-6 |ξ₀|`.
    NormFloor { floor: f64 },
    /// The field could not be evaluated or the corrector did not converge.
    SolverFailure(Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `dt (T + dt) > h² / (8 C_g)`: the step exceeds the window on which the
    /// Picard map is known to contract.
    PicardWindow { dt: f64, limit: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub trajectory: Trajectory,
    /// Field value at every grid node.
    pub fields: Vec<Vector>,
    pub status: SolveStatus,
    pub warnings: Vec<Warning>,
    /// Total field evaluations.
    pub evaluations: usize,
}

impl Solution {
    pub fn is_complete(&self) -> bool {
        self.status == SolveStatus::Complete
    }

    /// The error that ended the run early, if any.
    pub fn failure(&self) -> Option<&Error> {
        match &self.status {
            SolveStatus::Truncated {
                reason: TruncationReason::SolverFailure(e),
                ..
            } => Some(e),
            _ => None,
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.trajectory.len()).map(|k| self.trajectory.time(k))
    }
}

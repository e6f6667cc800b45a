//! The memory field `𝓕⁽ʰ⁾` and the frozen field `F⁽ʰ⁾`.
//!
//! ```text
//! 𝓕⁽ʰ⁾(ξ)(t) = -2 Re ∫_{R^d} ∫_0^{t/h} e^{-i r φ(η; ⟨ξ⟩_{t,hr})} g(η) dr dη
//! F⁽ʰ⁾(u)(t) = -2 Re ∫_{R^d} ∫_0^{t/h} e^{-i r φ(η; u)} g(η) dr dη
//! φ(η; u)    = |η|² - 2 η·u
//! ```
//!
//! where `⟨ξ⟩_{t,s}` is the running average of `ξ` over `[t - s, t]`.
//!
//! Two independent routes are used. The frozen field integrates `r`
//! exactly (`∫_0^R cos(rφ) dr = sin(Rφ)/φ`) and the `η`-integral on spherical
//! shells about `u`, where `φ = |η - u|² - |u|²` depends on the shell radius
//! only. The memory field swaps the integrals: for a Gaussian profile the
//! `η`-integral at fixed `r` is a complex Gaussian moment ([`eta_kernel`]),
//! leaving a smooth 1-D integral in `r` whose panels follow the history grid.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrators::{HistoryField, Trajectory};
use crate::profiles::Profile;
use crate::quadrature::{gaussian_tail_radius, polar_moments, powi, sphere_area, GaussLegendre};
use crate::vector::{Vector, MAX_DIM};

/// Discretization of the `η` and `r` integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    /// Truncation radius of `η`-space about the profile center; derived from
    /// `tail_tolerance` when `None`.
    pub eta_radius: Option<f64>,
    /// Gauss–Legendre nodes per `η` panel (radial shells and polar angle).
    pub eta_nodes_per_axis: usize,
    /// Gauss–Legendre nodes per `r` panel of the memory integral.
    pub r_substeps_per_history_step: usize,
    /// Relative Gaussian tail dropped by the truncation.
    pub tail_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            eta_radius: None,
            eta_nodes_per_axis: 16,
            r_substeps_per_history_step: 8,
            tail_tolerance: 1e-13,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.eta_nodes_per_axis < 8 {
            return Err(Error::invalid("eta_nodes_per_axis must be at least 8"));
        }
        if self.r_substeps_per_history_step < 1 {
            return Err(Error::invalid("r_substeps_per_history_step must be at least 1"));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(Error::invalid("tail_tolerance must lie in (0, 1)"));
        }
        if let Some(r) = self.eta_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid("eta_radius must be positive"));
            }
        }
        Ok(())
    }

    /// Truncation radius about the profile center.
    ///
    /// The zeroth and first Gaussian moments outside the radius are below
    /// `tail_tolerance` relative to the full moments.
    pub fn radius_for(&self, profile: &Profile) -> f64 {
        self.eta_radius.unwrap_or_else(|| {
            let d = profile.dimension();
            let s = profile.width();
            gaussian_tail_radius(d, 1, s, self.tail_tolerance)
                .max(gaussian_tail_radius(d, 0, s, self.tail_tolerance))
        })
    }
}

/// `φ(η; u) = |η|² - 2 η·u`.
pub fn phase(eta: &Vector, u: &Vector) -> Result<f64> {
    u.check_dim(eta.dim())?;
    Ok(eta.norm_squared() - 2.0 * eta.dot(u))
}

/// `sin(Rφ)/φ`, continuous at `φ = 0` (value `R`).
#[inline]
pub fn sin_ratio(reach: f64, phi: f64) -> f64 {
    let x = reach * phi;
    if x.abs() < 1e-4 {
        reach * (1.0 - x * x / 6.0)
    } else {
        libm::sin(x) / phi
    }
}

fn check_times(t: f64, h: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(alloc::format!("time must be positive, got {t}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(alloc::format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// Frozen field `F⁽ʰ⁾(u)(t)`.
///
/// With `x = η - u`, `w = c - u` and `θ` the angle between `x` and `w`,
/// `|x - w|² = ρ² + |w|² - 2ρ|w| cos θ`, so the angular integral over each
/// shell `|x| = ρ` reduces to the two polar moments of
/// `e^{-2ρ|w|(1 - cos θ)/s²}`.
pub fn eval_f_h_frozen(
    u: &Vector,
    t: f64,
    h: f64,
    profile: &Profile,
    quad: &QuadratureSpec,
) -> Result<Vector> {
    let d = profile.dimension();
    u.check_dim(d)?;
    check_times(t, h)?;
    quad.validate()?;
    let a2 = profile.amplitude() * profile.amplitude();
    if a2 == 0.0 {
        return Ok(Vector::zeros(d));
    }

    let reach = t / h;
    let s = profile.width();
    let s2 = s * s;
    let w = *profile.center() - *u;
    let dist = w.norm();
    let axis = if dist > 0.0 { w * (1.0 / dist) } else { Vector::unit(d, 0) };
    let speed = u.norm();

    let radius = quad.radius_for(profile);
    let lo = (dist - radius).max(0.0);
    let hi = dist + radius;
    // one oscillation of sin(R(ρ² - |u|²)) spans π/(Rρ)
    let panel = (0.5 * s).min(PI / (reach * hi));
    let panels = libm::ceil((hi - lo) / panel).max(1.0) as usize;
    let panel = (hi - lo) / panels as f64;

    let gl = GaussLegendre::new(quad.eta_nodes_per_axis);
    let shell_area = if d >= 2 { sphere_area(d - 2) } else { 0.0 };
    let mut along_u = 0.0;
    let mut along_axis = 0.0;
    for p in 0..panels {
        let start = lo + panel * p as f64;
        for (rho, weight) in gl.on(start, start + panel) {
            let phi = (rho - speed) * (rho + speed);
            let radial = weight
                * sin_ratio(reach, phi)
                * powi(rho, d as i32 - 1)
                * libm::exp(-(rho - dist) * (rho - dist) / s2);
            let (j0, j1) = if d >= 2 {
                let (j0, j1) = polar_moments(2.0 * rho * dist / s2, d - 2, &gl);
                (shell_area * j0, shell_area * j1)
            } else {
                // S^0 = {+axis, -axis}
                let back = libm::exp(-4.0 * rho * dist / s2);
                (1.0 + back, 1.0 - back)
            };
            along_u += radial * j0;
            along_axis += radial * rho * j1;
        }
    }
    let mut out = *u * along_u;
    out.axpy(along_axis, &axis);
    Ok(out * (-2.0 * a2))
}

/// `∫_{R^d} e^{-i r φ(η; v)} g(η) dη` in closed form.
///
/// With `α = 1/s² + i r` and `b = 2c/s² + 2 i r v`,
/// `∫ η e^{-α|η|² + b·η} dη = (π/α)^{d/2} e^{b·b/(4α)} b / (2α)`.
pub fn eta_kernel(profile: &Profile, r: f64, v: &[f64]) -> [Complex64; MAX_DIM] {
    let d = profile.dimension();
    let s2 = profile.width() * profile.width();
    let center = profile.center();
    let alpha = Complex64::new(1.0 / s2, r);
    let mut b = [Complex64::new(0.0, 0.0); MAX_DIM];
    let mut bb = Complex64::new(0.0, 0.0);
    for k in 0..d {
        b[k] = Complex64::new(2.0 * center[k] / s2, 2.0 * r * v[k]);
        bb += b[k] * b[k];
    }
    let log_alpha = alpha.ln();
    let exponent = bb / (4.0 * alpha) - center.norm_squared() / s2
        + 0.5 * d as f64 * (Complex64::new(libm::log(PI), 0.0) - log_alpha);
    let a2 = profile.amplitude() * profile.amplitude();
    let scale = exponent.exp() * a2 / (2.0 * alpha);
    for bk in b.iter_mut().take(d) {
        *bk *= scale;
    }
    b
}

/// Memory field `𝓕⁽ʰ⁾` evaluated against a recorded history.
#[derive(Debug, Clone)]
pub struct MemoryField {
    profile: Profile,
    h: f64,
    rule: GaussLegendre,
}

impl MemoryField {
    pub fn new(profile: Profile, h: f64, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(alloc::format!("h must be positive, got {h}")));
        }
        Ok(MemoryField {
            profile,
            h,
            rule: GaussLegendre::new(quad.r_substeps_per_history_step),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `𝓕⁽ʰ⁾(ξ)(t)` for the history recorded in `traj`.
    ///
    /// The `r`-axis is split where `t - hr` crosses a grid node, so the
    /// running average is smooth on every panel; long panels are further cut
    /// to a fraction of the kernel's oscillation period, `2π/|v|²` for large
    /// `r` and shortened by the offset `|c|` of the profile.
    pub fn eval_at(&self, traj: &Trajectory, t: f64) -> Result<Vector> {
        let d = self.profile.dimension();
        if traj.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: traj.dim(),
            });
        }
        if !(t >= 0.0) {
            return Err(Error::invalid(alloc::format!("time must be non-negative, got {t}")));
        }
        // surfaces an out-of-range t before the empty-range shortcut
        traj.value_at(t)?;
        if t == 0.0 || self.profile.amplitude() == 0.0 {
            return Ok(Vector::zeros(d));
        }

        let h = self.h;
        let dt = traj.dt();
        let s2 = self.profile.width() * self.profile.width();
        let vmax = traj.max_norm();
        let reach = vmax + self.profile.center().norm();
        let max_width = 0.5 / (1.0 / s2 + reach * reach);

        let mut acc = Vector::zeros(d);
        let mut lower = 0.0;
        let mut node = libm::floor(t / dt) as isize;
        if traj.time(node.max(0) as usize) >= t {
            node -= 1;
        }
        while lower < t / h {
            let upper = if node >= 0 {
                (t - dt * node as f64) / h
            } else {
                t / h
            };
            node -= 1;
            if upper <= lower {
                continue;
            }
            let pieces = libm::ceil((upper - lower) / max_width).max(1.0) as usize;
            let width = (upper - lower) / pieces as f64;
            for piece in 0..pieces {
                let a = lower + width * piece as f64;
                for (r, w) in self.rule.on(a, a + width) {
                    let avg = traj.running_average(t, (h * r).min(t))?;
                    let k = eta_kernel(&self.profile, r, &avg);
                    for (out, kc) in acc.iter_mut().zip(k.iter()) {
                        *out += w * kc.re;
                    }
                }
            }
            lower = upper;
        }
        Ok(acc * -2.0)
    }
}

impl HistoryField for MemoryField {
    fn dimension(&self) -> usize {
        self.profile.dimension()
    }

    fn eval(&self, history: &Trajectory, t: f64) -> Result<Vector> {
        self.eval_at(history, t)
    }
}

/// One-shot form of [`MemoryField::eval_at`].
pub fn eval_memory_field(
    traj: &Trajectory,
    t: f64,
    h: f64,
    profile: &Profile,
    quad: &QuadratureSpec,
) -> Result<Vector> {
    MemoryField::new(*profile, h, quad)?.eval_at(traj, t)
}

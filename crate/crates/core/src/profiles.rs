//! Gaussian coupling profiles `f(η) = A exp(-|η - c|² / (2 s²))`, the vector
//! function `g(η) = η |f(η)|²`, its Fourier transform and the constants that
//! enter the a priori bounds.
//!
//! Fourier convention: `û(y) = (2π)^{-d/2} ∫ e^{-i y·η} u(η) dη`.
//!
//! Writing `G(y) = (s²/2)^{d/2} e^{-i y·c} e^{-s²|y|²/4}` and
//! `a(y) = c - i s² y / 2`, one has `ĝ(y) = A² G(y) a(y)` and
//! `∂_k ĝ_j = -i A² G (a_j a_k + (s²/2) δ_jk)`. Both `|ĝ|` and the Frobenius
//! norm of `Dĝ` depend on `|y|` only, so their `L¹` norms are 1-D integrals.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{gaussian_tail_radius, polar_moments, powi, sphere_area, GaussLegendre};
use crate::vector::{Vector, MAX_DIM};

/// Gaussian coupling profile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    amplitude: f64,
    center: Vector,
    width: f64,
}

impl Profile {
    /// `amplitude = 0` is accepted and gives the zero coupling.
    pub fn new(amplitude: f64, center: &[f64], width: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "amplitude must be finite and non-negative, got {amplitude}"
            )));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "width must be finite and positive, got {width}"
            )));
        }
        let center = Vector::from_slice(center)?;
        if !center.is_finite() {
            return Err(Error::invalid("center must be finite"));
        }
        Ok(Profile {
            amplitude,
            center,
            width,
        })
    }

    /// Centered Gaussian in dimension `d`.
    pub fn radial(d: usize, amplitude: f64, width: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension {
                dim: d,
                reason: "profiles need 1 <= d <= 8",
            });
        }
        Profile::new(amplitude, &[0.0; MAX_DIM][..d], width)
    }

    pub fn dimension(&self) -> usize {
        self.center.dim()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `|f|²` depends on `|η|` only.
    pub fn is_radial(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0)
    }

    /// The same profile with amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Profile::new(self.amplitude * factor, &self.center, self.width)
    }

    #[inline]
    pub(crate) fn f_squared_unchecked(&self, eta: &[f64]) -> f64 {
        let r2: f64 = eta
            .iter()
            .zip(self.center.iter())
            .map(|(e, c)| (e - c) * (e - c))
            .sum();
        self.amplitude * self.amplitude * libm::exp(-r2 / (self.width * self.width))
    }

    /// `|f|²` as a function of `|η|` for a radial profile.
    #[inline]
    pub(crate) fn radial_f_squared(&self, radius: f64) -> f64 {
        self.amplitude * self.amplitude * libm::exp(-radius * radius / (self.width * self.width))
    }

    pub fn eval_f(&self, eta: &Vector) -> Result<f64> {
        eta.check_dim(self.dimension())?;
        let r2 = (*eta - self.center).norm_squared();
        Ok(self.amplitude * libm::exp(-r2 / (2.0 * self.width * self.width)))
    }

    pub fn eval_f_squared(&self, eta: &Vector) -> Result<f64> {
        eta.check_dim(self.dimension())?;
        Ok(self.f_squared_unchecked(eta))
    }

    /// `g(η) = η |f(η)|²`.
    pub fn eval_g(&self, eta: &Vector) -> Result<Vector> {
        Ok(*eta * self.eval_f_squared(eta)?)
    }

    /// `ĝ(y)`, one complex number per component.
    pub fn eval_g_hat(&self, y: &Vector) -> Result<Vec<Complex64>> {
        y.check_dim(self.dimension())?;
        let g = self.g_hat_envelope(y);
        Ok(self
            .center
            .iter()
            .zip(y.iter())
            .map(|(&c, &yk)| g * Complex64::new(c, -0.5 * self.width * self.width * yk))
            .collect())
    }

    /// Jacobian `∂_k ĝ_j`, row-major `[j][k]`.
    pub fn eval_g_hat_jacobian(&self, y: &Vector) -> Result<Vec<Complex64>> {
        y.check_dim(self.dimension())?;
        let d = self.dimension();
        let sigma = 0.5 * self.width * self.width;
        let g = self.g_hat_envelope(y);
        let a: Vec<Complex64> = self
            .center
            .iter()
            .zip(y.iter())
            .map(|(&c, &yk)| Complex64::new(c, -sigma * yk))
            .collect();
        let mut out = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in 0..d {
                let delta = if j == k { sigma } else { 0.0 };
                out.push(-Complex64::i() * g * (a[j] * a[k] + delta));
            }
        }
        Ok(out)
    }

    /// `A² G(y)`.
    fn g_hat_envelope(&self, y: &Vector) -> Complex64 {
        let s2 = self.width * self.width;
        let d = self.dimension() as f64;
        let modulus = self.amplitude * self.amplitude
            * libm::pow(0.5 * s2, 0.5 * d)
            * libm::exp(-0.25 * s2 * y.norm_squared());
        Complex64::from_polar(modulus, -y.dot(&self.center))
    }

    /// Extremes of `|f|²` over the closed ball `B̄(0, radius)`.
    pub fn f_squared_extrema_on_ball(&self, radius: f64) -> (f64, f64) {
        let a2 = self.amplitude * self.amplitude;
        let s2 = self.width * self.width;
        let c = self.center.norm();
        let nearest = (c - radius).max(0.0);
        let farthest = c + radius;
        (a2 * libm::exp(-farthest * farthest / s2), a2 * libm::exp(-nearest * nearest / s2))
    }
}

/// Constants of the a priori estimates for one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantSet {
    pub dimension: usize,
    /// Exponent slack `δ` in `h^{ν(d) - δ}`.
    pub delta: f64,
    /// `∫ |η| |g(η)| dη`
    pub c_g: f64,
    pub norm_g_l1: f64,
    /// `∫ |ĝ(y)|₂ dy`
    pub norm_ghat_l1: f64,
    /// `∫ ‖Dĝ(y)‖_F dy`
    pub norm_ghat_prime_l1: f64,
    /// Derivative bound constant, `‖ξ'‖ <= 2 C1_g`.
    pub c1_g: f64,
    pub c2_g: f64,
    pub c3_g: f64,
    /// Dissipation constant of the limit field, see [`dissipation_constant`].
    pub c_d: f64,
}

/// `ν(d) = (d - 2) / 4`.
pub fn nu(d: usize) -> f64 {
    (d as f64 - 2.0) / 4.0
}

/// Default node count per panel for the norm integrals.
pub const DEFAULT_NORM_NODES: usize = 24;

const NORM_TAIL: f64 = 1e-15;

impl ConstantSet {
    pub fn compute(profile: &Profile, delta: f64) -> Result<Self> {
        Self::compute_with_nodes(profile, delta, DEFAULT_NORM_NODES)
    }

    /// As [`ConstantSet::compute`] with `nodes` Gauss–Legendre points per panel.
    pub fn compute_with_nodes(profile: &Profile, delta: f64, nodes: usize) -> Result<Self> {
        let d = profile.dimension();
        if d < 3 {
            return Err(Error::UnsupportedDimension {
                dim: d,
                reason: "C1_g, C2_g, C3_g and C_d are only defined for d >= 3",
            });
        }
        if !(delta > 0.0 && delta < nu(d)) {
            return Err(Error::invalid(alloc::format!(
                "delta must lie in (0, {}) for d = {d}, got {delta}",
                nu(d)
            )));
        }
        let gl = GaussLegendre::new(nodes);
        let norm_g_l1 = eta_moment(profile, 1, &gl);
        let c_g = eta_moment(profile, 2, &gl);
        let (norm_ghat_l1, norm_ghat_prime_l1) = fourier_norms(profile, &gl);

        let df = d as f64;
        let pi_d2 = libm::pow(PI, 0.5 * df);
        let c1_g = norm_g_l1 + (0.5 * df - 1.0) * pi_d2 * norm_ghat_l1;
        let c2_g = 4.0 * norm_g_l1 + 2.0 * pi_d2 * (c1_g * norm_ghat_prime_l1 + norm_ghat_l1);
        let c3_g = (0.5 * df - 1.0) * pi_d2 * norm_ghat_l1;
        Ok(ConstantSet {
            dimension: d,
            delta,
            c_g,
            norm_g_l1,
            norm_ghat_l1,
            norm_ghat_prime_l1,
            c1_g,
            c2_g,
            c3_g,
            c_d: dissipation_constant(d),
        })
    }

    /// Memory-versus-frozen field envelope `C2_g h^{ν(d) - δ}`.
    pub fn memory_envelope(&self, h: f64) -> f64 {
        self.c2_g * libm::pow(h, nu(self.dimension) - self.delta)
    }

    /// Frozen-versus-limit field envelope `C3_g (h/t)^{d/2 - 1}`.
    pub fn limit_envelope(&self, h: f64, t: f64) -> f64 {
        self.c3_g * libm::pow(h / t, 0.5 * self.dimension as f64 - 1.0)
    }
}

/// `C_g = ∫ |η|² |f(η)|² dη`, the constant of the Picard contraction window.
pub fn c_g(profile: &Profile) -> f64 {
    let gl = GaussLegendre::new(DEFAULT_NORM_NODES);
    if profile.dimension() >= 2 {
        return eta_moment(profile, 2, &gl);
    }
    let s = profile.width;
    let c = profile.center[0];
    let reach = gaussian_tail_radius(1, 2, s, NORM_TAIL) + c.abs();
    let panels = (libm::ceil(2.0 * reach / (0.5 * s)) as usize).max(4);
    gl.integrate_composite(-reach, reach, panels, |x| x * x * profile.f_squared_unchecked(&[x]))
}

/// `C_d = 2π |S^{d-2}| ∫_0^π (1 - cos θ) sin^{d-2} θ dθ`.
///
/// With `y = |ξ|²` and `ξ' = F⁽⁰⁾(ξ)` one has `y' = -π |ξ|^d ∫ ρ |f|² dμ`
/// where `μ` is the surface measure of `û + S^{d-1}` written in the polar
/// angle `θ` about `-û` (`ρ = 1 - cos θ`); bounding `|f|²` by its extremes
/// gives `-C_d max|f|² y^{d/2} <= y' <= -C_d min|f|² y^{d/2}`.
pub fn dissipation_constant(d: usize) -> f64 {
    let gl = GaussLegendre::new(64);
    let integral = gl.integrate(0.0, PI, |theta| {
        (1.0 - libm::cos(theta)) * powi(libm::sin(theta), d as i32 - 2)
    });
    2.0 * PI * sphere_area(d - 2) * integral
}

/// `∫ |η|^k |f(η)|² dη` for `d >= 2`.
///
/// In polar coordinates about the origin with axis along `c`, the integrand
/// is `ρ^{d-1+k} e^{-(ρ-|c|)²/s²} e^{-2ρ|c|(1 - cos θ)/s²} sin^{d-2} θ`,
/// smooth in both variables.
fn eta_moment(profile: &Profile, k: usize, gl: &GaussLegendre) -> f64 {
    let d = profile.dimension();
    let a2 = profile.amplitude * profile.amplitude;
    if a2 == 0.0 {
        return 0.0;
    }
    let s = profile.width;
    let s2 = s * s;
    let c = profile.center.norm();
    let reach = gaussian_tail_radius(d, k, s, NORM_TAIL).max(gaussian_tail_radius(1, d + k, s, NORM_TAIL));
    let lo = (c - reach).max(0.0);
    let hi = c + reach;
    let panels = (libm::ceil((hi - lo) / (0.5 * s)) as usize).max(4);
    let radial = gl.integrate_composite(lo, hi, panels, |rho| {
        let base = powi(rho, (d - 1 + k) as i32) * libm::exp(-(rho - c) * (rho - c) / s2);
        let (j0, _) = polar_moments(2.0 * rho * c / s2, d - 2, gl);
        base * j0
    });
    a2 * sphere_area(d - 2) * radial
}

/// `(‖ĝ‖_{L¹}, ‖Dĝ‖_{L¹})` with the Euclidean and Frobenius pointwise norms.
fn fourier_norms(profile: &Profile, gl: &GaussLegendre) -> (f64, f64) {
    let d = profile.dimension();
    let df = d as f64;
    let a2 = profile.amplitude * profile.amplitude;
    if a2 == 0.0 {
        return (0.0, 0.0);
    }
    let s2 = profile.width * profile.width;
    let sigma = 0.5 * s2;
    let c2 = profile.center.norm_squared();
    // e^{-s²y²/4}: Gaussian scale 2/s; polynomial degree up to d - 1 + 2
    let scale = 2.0 / profile.width;
    let reach = gaussian_tail_radius(d, 2, scale, NORM_TAIL).max(gaussian_tail_radius(1, d + 2, scale, NORM_TAIL));
    let panels = (libm::ceil(reach / (0.5 * scale)) as usize).max(4);
    let prefactor = a2 * libm::pow(sigma, 0.5 * df) * sphere_area(d - 1);
    let mut value = 0.0;
    let mut jacobian = 0.0;
    let width = reach / panels as f64;
    for p in 0..panels {
        let lo = width * p as f64;
        for (y, w) in gl.on(lo, lo + width) {
            let q = 0.25 * s2 * s2 * y * y;
            let weight = w * powi(y, d as i32 - 1) * libm::exp(-0.5 * sigma * y * y);
            value += weight * libm::sqrt(c2 + q);
            let frob2 = (c2 + q) * (c2 + q) + df * sigma * sigma + 2.0 * sigma * (c2 - q);
            jacobian += weight * libm::sqrt(frob2.max(0.0));
        }
    }
    (prefactor * value, prefactor * jacobian)
}

//! The limit field `F⁽⁰⁾` as an integral over the resonance sphere.
//!
//! The phase `|η|² - 2η·u` vanishes on the sphere `u + |u| S^{d-1}` and
//! `Re ∫_0^∞ e^{-irφ} dr = π δ(φ)`, so
//!
//! ```text
//! F⁽⁰⁾(u) = -π |u|^{d-1} ∫_{û + S^{d-1}} η |f(|u| η)|² dH^{d-1}(η).
//! ```
//!
//! Points of `û + S^{d-1}` are written `η = ρ û + sin θ ω'` with
//! `ρ = 1 - cos θ ∈ [0, 2]`, `θ` the polar angle about `-û` and `ω'` on the
//! unit sphere of `û^⊥`; the surface measure is `sin^{d-2} θ dθ dω'`, which
//! in the `ρ` variable reads `(2ρ - ρ²)^{(d-3)/2} dρ dω'`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrators::LocalField;
use crate::profiles::Profile;
use crate::quadrature::{chebyshev_second_kind, powi, sphere_area, GaussLegendre, SphereRule};
use crate::vector::{Vector, MAX_DIM};

/// Node counts of the sphere quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SphereQuadSpec {
    /// Gauss–Legendre nodes in the polar angle `θ` (and in `ρ` for the
    /// radial reduction).
    pub rho_nodes: usize,
    /// Uniform azimuth nodes on `S^{d-2}`; inner polar angles of `S^2` and
    /// `S^3` use half as many Gauss–Legendre nodes.
    pub circle_nodes: usize,
}

impl Default for SphereQuadSpec {
    fn default() -> Self {
        SphereQuadSpec {
            rho_nodes: 48,
            circle_nodes: 32,
        }
    }
}

impl SphereQuadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rho_nodes < 8 || self.circle_nodes < 8 {
            return Err(Error::invalid("sphere quadrature needs at least 8 nodes per axis"));
        }
        Ok(())
    }
}

pub(crate) fn check_limit_dimension(d: usize) -> Result<()> {
    if !(3..=5).contains(&d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "the limit field is implemented for d in {3, 4, 5}",
        });
    }
    Ok(())
}

/// Orthonormal frame whose first column is `±unit` (Householder reflection
/// of `e_1`); the remaining `d - 1` columns span `unit^⊥`.
pub fn orthonormal_frame(unit: &Vector) -> [Vector; MAX_DIM] {
    let d = unit.dim();
    let mut v = *unit;
    let sign = if unit[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let scale = 2.0 / v.norm_squared();
    let mut frame = [Vector::zeros(d); MAX_DIM];
    for (j, col) in frame.iter_mut().enumerate().take(d) {
        let mut e = Vector::unit(d, j);
        e.axpy(-scale * v[j], &v);
        *col = e;
    }
    frame
}

/// `F⁽⁰⁾` for one profile with precomputed sphere nodes.
#[derive(Debug, Clone)]
pub struct LimitField {
    profile: Profile,
    /// `(ρ, sin θ, weight · sin^{d-2} θ)`
    polar: Vec<(f64, f64, f64)>,
    transverse: SphereRule,
    /// Nodes and weights of the 1-D `ρ` rule (radial reduction).
    radial: Vec<(f64, f64)>,
}

impl LimitField {
    pub fn new(profile: Profile, squad: &SphereQuadSpec) -> Result<Self> {
        let d = profile.dimension();
        check_limit_dimension(d)?;
        squad.validate()?;
        let gl = GaussLegendre::new(squad.rho_nodes);
        let polar = gl
            .on(0.0, PI)
            .map(|(theta, w)| {
                let s = libm::sin(theta);
                (1.0 - libm::cos(theta), s, w * powi(s, d as i32 - 2))
            })
            .collect();
        let transverse = SphereRule::new(d - 2, (squad.circle_nodes / 2).max(4), squad.circle_nodes);
        let radial = if d % 2 == 1 {
            // (2ρ - ρ²)^{(d-3)/2} is a polynomial
            gl.on(0.0, 2.0)
                .map(|(rho, w)| (rho, w * powi(2.0 * rho - rho * rho, (d as i32 - 3) / 2)))
                .collect()
        } else {
            // d = 4: sqrt(2ρ - ρ²) = sqrt(1 - x²) with x = ρ - 1
            let (x, w) = chebyshev_second_kind(squad.rho_nodes);
            x.into_iter().zip(w).map(|(x, w)| (1.0 + x, w)).collect()
        };
        Ok(LimitField {
            profile,
            polar,
            transverse,
            radial,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `F⁽⁰⁾(u)`; refuses `u = 0`.
    pub fn eval(&self, u: &Vector) -> Result<Vector> {
        let d = self.profile.dimension();
        u.check_dim(d)?;
        let speed = u.norm();
        if speed == 0.0 {
            return Err(Error::SingularInput);
        }
        if self.profile.amplitude() == 0.0 {
            return Ok(Vector::zeros(d));
        }
        let unit = *u * (1.0 / speed);
        let frame = orthonormal_frame(&unit);
        let mut acc = Vector::zeros(d);
        let mut point = Vector::zeros(d);
        let mut scaled = Vector::zeros(d);
        for &(rho, sin_theta, w_polar) in &self.polar {
            for (omega, w_omega) in self.transverse.iter() {
                point.copy_from_slice(&(unit * rho));
                for (coef, col) in omega.iter().zip(&frame[1..d]) {
                    point.axpy(sin_theta * coef, col);
                }
                for (s, p) in scaled.iter_mut().zip(point.iter()) {
                    *s = speed * p;
                }
                let weight = w_polar * w_omega * self.profile.f_squared_unchecked(&scaled);
                acc.axpy(weight, &point);
            }
        }
        Ok(acc * (-PI * powi(speed, d as i32 - 1)))
    }

    /// `λ(|u|) >= 0` with `F⁽⁰⁾(u) = -λ(|u|) û` for a radial profile,
    /// computed from the 1-D `ρ` integral only.
    pub fn radial_coeff(&self, speed: f64) -> Result<f64> {
        if !self.profile.is_radial() {
            return Err(Error::invalid("the radial reduction needs a centered profile"));
        }
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::invalid(alloc::format!("speed must be positive, got {speed}")));
        }
        let d = self.profile.dimension();
        let integral: f64 = self
            .radial
            .iter()
            .map(|&(rho, w)| w * rho * self.profile.radial_f_squared(speed * libm::sqrt(2.0 * rho)))
            .sum();
        Ok(PI * powi(speed, d as i32 - 1) * sphere_area(d - 2) * integral)
    }

    /// `u · F⁽⁰⁾(u)`, never positive.
    pub fn dissipation(&self, u: &Vector) -> Result<f64> {
        Ok(u.dot(&self.eval(u)?))
    }
}

impl LocalField for LimitField {
    fn dimension(&self) -> usize {
        self.profile.dimension()
    }

    fn eval(&self, u: &Vector) -> Result<Vector> {
        LimitField::eval(self, u)
    }
}

pub fn eval_f0(u: &Vector, profile: &Profile, squad: &SphereQuadSpec) -> Result<Vector> {
    LimitField::new(*profile, squad)?.eval(u)
}

pub fn eval_f0_radial_coeff(speed: f64, profile: &Profile, squad: &SphereQuadSpec) -> Result<f64> {
    LimitField::new(*profile, squad)?.radial_coeff(speed)
}

pub fn dissipation(u: &Vector, profile: &Profile, squad: &SphereQuadSpec) -> Result<f64> {
    LimitField::new(*profile, squad)?.dissipation(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v3(a: f64, b: f64, c: f64) -> Vector {
        Vector::from_slice(&[a, b, c]).unwrap()
    }

    #[test]
    fn frame_is_orthonormal() {
        for raw in [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.3, -0.5, 0.2, 0.9], [-0.1, 0.0, 0.7, -0.2]] {
            let u = Vector::from_slice(&raw).unwrap();
            let unit = u * (1.0 / u.norm());
            let f = orthonormal_frame(&unit);
            assert_relative_eq!(f[0].dot(&unit).abs(), 1.0, epsilon = 1e-15);
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((f[i].dot(&f[j]) - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn singular_and_unsupported_inputs() {
        let p = Profile::radial(3, 1.0, 1.0).unwrap();
        let squad = SphereQuadSpec::default();
        assert_eq!(eval_f0(&Vector::zeros(3), &p, &squad), Err(Error::SingularInput));
        assert!(dissipation(&Vector::zeros(3), &p, &squad).is_err());
        let p2 = Profile::radial(2, 1.0, 1.0).unwrap();
        assert!(matches!(
            eval_f0(&Vector::unit(2, 0), &p2, &squad),
            Err(Error::UnsupportedDimension { dim: 2, .. })
        ));
        let shifted = Profile::new(1.0, &[0.5, 0.0, 0.0], 1.0).unwrap();
        assert!(eval_f0_radial_coeff(1.0, &shifted, &squad).is_err());
    }

    #[test]
    fn zero_amplitude() {
        let p = Profile::radial(3, 0.0, 1.0).unwrap();
        let squad = SphereQuadSpec::default();
        assert_eq!(eval_f0(&v3(1.0, 2.0, 0.0), &p, &squad).unwrap().norm(), 0.0);
        assert_eq!(eval_f0_radial_coeff(1.0, &p, &squad).unwrap(), 0.0);
        assert_eq!(dissipation(&v3(1.0, 2.0, 0.0), &p, &squad).unwrap(), 0.0);
    }

    #[test]
    fn radial_profile_gives_antiparallel_field() {
        let p = Profile::radial(3, 1.0, 1.0).unwrap();
        let squad = SphereQuadSpec::default();
        let u = v3(0.3, -0.6, 0.5);
        let f = eval_f0(&u, &p, &squad).unwrap();
        let unit = u * (1.0 / u.norm());
        let along = f.dot(&unit);
        assert!(along < 0.0);
        assert!((f - unit * along).norm() < 1e-10 * along.abs());
    }

    #[test]
    fn d3_radial_coefficient_closed_form() {
        // |f(|u|η)|² = A² e^{-2ρ|u|²/s²}; ∫_0^2 ρ e^{-aρ} dρ = (1 - e^{-2a}(1 + 2a))/a²
        let p = Profile::radial(3, 1.0, 1.0).unwrap();
        let squad = SphereQuadSpec::default();
        for x in [0.2, 1.0, 1.7] {
            let a = 2.0 * x * x;
            let integral = (1.0 - libm::exp(-2.0 * a) * (1.0 + 2.0 * a)) / (a * a);
            let want = PI * x * x * 2.0 * PI * integral;
            assert_relative_eq!(eval_f0_radial_coeff(x, &p, &squad).unwrap(), want, max_relative = 1e-13);
        }
    }
}

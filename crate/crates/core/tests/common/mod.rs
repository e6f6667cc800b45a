//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use nonlocal_core::quadrature::GaussLegendre;
use nonlocal_core::{Profile, Vector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vector {
    let v: Vec<f64> = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
    Vector::from_slice(&v).unwrap()
}

/// Point uniformly on the sphere of the given radius.
pub fn random_direction(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vector {
    loop {
        let v = random_vector(rng, d, -1.0, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (radius / n);
        }
    }
}

/// Minimum number of `r` panels of [`frozen_brute_force`].
pub const BRUTE_R_PANELS: usize = 10_000;

/// `F⁽ʰ⁾(u)(t)` by plain double quadrature: two-point Gauss–Legendre in `r`
/// on at least [`BRUTE_R_PANELS`] panels, and for each `r` the `η`-integral
/// as a product of numerically integrated 1-D factors
/// `∫ x^m e^{-ir(x² - 2u_k x)} e^{-(x - c_k)²/s²} dx`, `m ∈ {0, 1}`.
pub fn frozen_brute_force(u: &Vector, t: f64, h: f64, profile: &Profile) -> Vector {
    let d = profile.dimension();
    let s = profile.width();
    let c = profile.center();
    let a2 = profile.amplitude() * profile.amplitude();
    let reach = t / h;
    let half_width = 7.0 * s;
    let x_rule = GaussLegendre::new(16);
    let r_rule = GaussLegendre::new(2);

    let factor = |r: f64, k: usize| -> (Complex64, Complex64) {
        let lo = c[k] - half_width;
        let hi = c[k] + half_width;
        let freq = 2.0 * r * (c[k].abs() + half_width + u[k].abs());
        let width = (0.5 * s).min(3.0 * std::f64::consts::PI / freq.max(1e-300));
        let panels = ((hi - lo) / width).ceil() as usize;
        let step = (hi - lo) / panels as f64;
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = lo + step * p as f64;
            for (x, w) in x_rule.on(a, a + step) {
                let env = (-(x - c[k]) * (x - c[k]) / (s * s)).exp();
                let z = Complex64::from_polar(w * env, -r * (x * x - 2.0 * u[k] * x));
                i0 += z;
                i1 += z * x;
            }
        }
        (i0, i1)
    };

    let mut out = vec![0.0; d];
    let panels = BRUTE_R_PANELS.max((reach * 1000.0).ceil() as usize);
    let step = reach / panels as f64;
    for p in 0..panels {
        let a = step * p as f64;
        for (r, w) in r_rule.on(a, a + step) {
            let factors: Vec<(Complex64, Complex64)> = (0..d).map(|k| factor(r, k)).collect();
            for (j, o) in out.iter_mut().enumerate() {
                let mut prod = factors[j].1;
                for (k, f) in factors.iter().enumerate() {
                    if k != j {
                        prod *= f.0;
                    }
                }
                *o += w * prod.re;
            }
        }
    }
    Vector::from_slice(&out).unwrap() * (-2.0 * a2)
}

/// Random non-radial Gaussian in `d` dimensions with moderate parameters.
pub fn random_profile(rng: &mut ChaCha8Rng, d: usize) -> Profile {
    let amplitude = rng.gen_range(0.5..1.5);
    let width = rng.gen_range(0.7..1.3);
    let center = random_vector(rng, d, -0.5, 0.5);
    Profile::new(amplitude, &center, width).unwrap()
}

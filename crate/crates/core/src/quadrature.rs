//! Quadrature building blocks: Gauss–Legendre rules, a Chebyshev rule for
//! `sqrt(1 - x^2)` weights, product rules on spheres, geometrically graded
//! polar integrals and certified Gaussian truncation radii.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule with `panels` equal panels.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + width * k as f64;
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Gauss–Chebyshev rule of the second kind: `∫_{-1}^{1} f(x) sqrt(1 - x^2) dx`.
pub fn chebyshev_second_kind(n: usize) -> (Vec<f64>, Vec<f64>) {
    let step = PI / (n as f64 + 1.0);
    (1..=n)
        .map(|i| {
            let a = step * i as f64;
            let s = libm::sin(a);
            (libm::cos(a), step * s * s)
        })
        .unzip()
}

/// Surface measure of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    let half = (m as f64 + 1.0) / 2.0;
    2.0 * libm::pow(PI, half) / libm::tgamma(half)
}

/// Product quadrature on the unit sphere `S^m`, `m >= 1`.
///
/// `S^1` uses the uniform (periodic trapezoid) rule; each higher sphere adds
/// a Gauss–Legendre polar angle with its `sin^{m-1}` weight.
#[derive(Debug, Clone)]
pub struct SphereRule {
    ambient: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(m: usize, polar_nodes: usize, azimuth_nodes: usize) -> Self {
        assert!(m >= 1, "sphere rules start at S^1");
        assert!(polar_nodes > 0 && azimuth_nodes > 0);
        let mut points = Vec::with_capacity(2 * azimuth_nodes);
        let mut weights = Vec::with_capacity(azimuth_nodes);
        let dphi = 2.0 * PI / azimuth_nodes as f64;
        for j in 0..azimuth_nodes {
            let phi = dphi * j as f64;
            points.push(libm::cos(phi));
            points.push(libm::sin(phi));
            weights.push(dphi);
        }
        let mut rule = SphereRule {
            ambient: 2,
            points,
            weights,
        };
        let gl = GaussLegendre::new(polar_nodes);
        for level in 2..=m {
            rule = rule.lift(&gl, level);
        }
        rule
    }

    fn lift(&self, gl: &GaussLegendre, level: usize) -> SphereRule {
        let ambient = self.ambient + 1;
        let mut points = Vec::with_capacity(ambient * gl.len() * self.len());
        let mut weights = Vec::with_capacity(gl.len() * self.len());
        for (alpha, wa) in gl.on(0.0, PI) {
            let (s, c) = (libm::sin(alpha), libm::cos(alpha));
            let wa = wa * libm::pow(s, (level - 1) as f64);
            for (p, wp) in self.iter() {
                points.push(c);
                points.extend(p.iter().map(|x| s * x));
                weights.push(wa * wp);
            }
        }
        SphereRule {
            ambient,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Dimension of the ambient space (`m + 1`).
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.ambient)
            .zip(self.weights.iter().copied())
    }
}

/// `∫_0^π e^{-κ(1 - cos θ)} sin^p θ (1, cos θ) dθ` for `κ >= 0`.
///
/// The integrand concentrates in a cap of width `~ κ^{-1/2}` around `θ = 0`,
/// so the interval is split at `π/2, π/4, …` down to the cap scale and every
/// panel gets the full rule.
pub fn polar_moments(kappa: f64, sin_power: usize, gl: &GaussLegendre) -> (f64, f64) {
    let levels = if kappa > 1.0 {
        (libm::log2(PI * libm::sqrt(kappa)) as usize + 3).min(60)
    } else {
        2
    };
    let p = sin_power as i32;
    let mut hi = PI;
    let (mut j0, mut j1) = (0.0, 0.0);
    for level in 0..=levels {
        let lo = if level == levels { 0.0 } else { 0.5 * hi };
        for (theta, w) in gl.on(lo, hi) {
            let c = libm::cos(theta);
            // 1 - cos θ = 2 sin²(θ/2) avoids cancellation near the pole
            let sh = libm::sin(0.5 * theta);
            let e = libm::exp(-2.0 * kappa * sh * sh) * powi(libm::sin(theta), p) * w;
            j0 += e;
            j1 += e * c;
        }
        hi = lo;
    }
    (j0, j1)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Upper bound on the upper incomplete gamma function `Γ(a, x)`.
///
/// Uses `Γ(a,x) <= x^{a-1} e^{-x}` for `a <= 1` and
/// `Γ(a,x) <= x^a e^{-x} / (x - a + 1)` for `a > 1, x > a - 1`; returns
/// `Γ(a)` where neither applies.
pub fn upper_gamma_bound(a: f64, x: f64) -> f64 {
    if a <= 1.0 {
        libm::pow(x, a - 1.0) * libm::exp(-x)
    } else if x > a - 1.0 {
        libm::pow(x, a) * libm::exp(-x) / (x - a + 1.0)
    } else {
        libm::tgamma(a)
    }
}

/// Radius `W` with `∫_{|x|>W} |x|^k e^{-|x|²/σ²} dx` at most `rel_tol` times
/// the full moment, for `x ∈ R^d`.
///
/// Certified through [`upper_gamma_bound`]: the ratio equals
/// `Γ((d+k)/2, W²/σ²) / Γ((d+k)/2)`.
pub fn gaussian_tail_radius(d: usize, k: usize, sigma: f64, rel_tol: f64) -> f64 {
    let a = (d + k) as f64 / 2.0;
    let full = libm::tgamma(a);
    let mut x = a.max(1.0);
    while upper_gamma_bound(a, x) > rel_tol * full {
        x *= 1.05;
    }
    sigma * libm::sqrt(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_on_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let gl = GaussLegendre::new(n);
            assert_relative_eq!(gl.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                let got = gl.integrate(-1.0, 1.0, |x| powi(x, k as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn legendre_nodes_sorted_and_symmetric() {
        let gl = GaussLegendre::new(12);
        assert!(gl.nodes().windows(2).all(|w| w[0] < w[1]));
        for (a, b) in gl.nodes().iter().zip(gl.nodes().iter().rev()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn chebyshev_rule_integrates_semicircle_moments() {
        let (x, w) = chebyshev_second_kind(10);
        let zeroth: f64 = w.iter().sum();
        let second: f64 = x.iter().zip(&w).map(|(x, w)| x * x * w).sum();
        assert_relative_eq!(zeroth, PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(second, PI / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(2), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(3), 2.0 * PI * PI, epsilon = 1e-14);
    }

    #[test]
    fn sphere_rules_integrate_constants_and_moments() {
        for m in 1..=3 {
            let rule = SphereRule::new(m, 20, 16);
            assert_eq!(rule.ambient(), m + 1);
            let area: f64 = rule.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(area, sphere_area(m), epsilon = 1e-12);
            // ∫ x_i x_j dω = δ_ij |S^m| / (m + 1)
            for i in 0..=m {
                for j in 0..=m {
                    let got: f64 = rule.iter().map(|(p, w)| p[i] * p[j] * w).sum();
                    let want = if i == j { sphere_area(m) / (m as f64 + 1.0) } else { 0.0 };
                    assert!((got - want).abs() < 1e-12, "m={m} ({i},{j}) {got} vs {want}");
                }
            }
            for (p, _) in rule.iter() {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                assert_relative_eq!(r2, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn polar_moments_match_closed_forms() {
        let gl = GaussLegendre::new(16);
        for kappa in [0.0, 0.3, 2.0, 40.0, 900.0, 1e5] {
            let (j0, j1) = polar_moments(kappa, 1, &gl);
            // sin θ dθ = dx with x = cos θ
            let (e0, e1) = if kappa == 0.0 {
                (2.0, 0.0)
            } else {
                let t = libm::exp(-2.0 * kappa);
                ((1.0 - t) / kappa, (1.0 + t) / kappa - (1.0 - t) / (kappa * kappa))
            };
            assert_relative_eq!(j0, e0, max_relative = 1e-13, epsilon = 1e-300);
            assert!((j1 - e1).abs() <= 1e-13 * e0, "κ={kappa}: {j1} vs {e1}");
        }
    }

    #[test]
    fn tail_radius_is_certified() {
        // d = 1, k = 0: ratio is erfc(W/σ)
        let w = gaussian_tail_radius(1, 0, 1.0, 1e-12);
        assert!(libm::erfc(w) <= 1e-12);
        assert!(libm::erfc(0.9 * w) > 1e-12);
        let w3 = gaussian_tail_radius(3, 2, 2.0, 1e-10);
        assert!(w3 > 2.0 * 4.0 && w3 < 2.0 * 6.5);
    }
}

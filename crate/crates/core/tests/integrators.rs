use nonlocal_core::integrators::{
    integrate_heun, integrate_rk4, solve_limit, solve_memory, HistoryField, LocalField, Localized, Scale,
    SolveStatus, SolverConfig, Trajectory, TruncationReason, Warning,
};
use nonlocal_core::{Error, LimitField, Profile, Result, SphereQuadSpec, Vector};

/// `ξ' = -|ξ| ξ`, solved by `ξ₀ / (1 + |ξ₀| t)`.
struct Quadratic;

impl LocalField for Quadratic {
    fn dimension(&self) -> usize {
        3
    }
    fn eval(&self, u: &Vector) -> Result<Vector> {
        Ok(*u * -u.norm())
    }
}

/// `ξ'(t) = -∫_0^t ξ`, so `ξ'' = -ξ` and `ξ = ξ₀ cos t`.
struct Integrated;

impl HistoryField for Integrated {
    fn dimension(&self) -> usize {
        2
    }
    fn eval(&self, history: &Trajectory, t: f64) -> Result<Vector> {
        Ok(history.window_integral(0.0, t)? * -1.0)
    }
}

fn xi0() -> Vector {
    Vector::from_slice(&[1.0, -0.5, 0.25]).unwrap()
}

fn rk4_error(steps: usize) -> f64 {
    let dt = 2.0 / steps as f64;
    let sol = integrate_rk4(&Quadratic, xi0(), dt, steps, 0.0).unwrap();
    let exact = xi0() * (1.0 / (1.0 + xi0().norm() * 2.0));
    sol.trajectory.last().distance(&exact)
}

#[test]
fn rk4_is_fourth_order() {
    let ratio = rk4_error(40) / rk4_error(80);
    assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
}

fn heun_error<F: HistoryField>(field: &F, x0: Vector, exact: Vector, steps: usize) -> f64 {
    let dt = 2.0 / steps as f64;
    let sol = integrate_heun(field, x0, dt, steps, 1e-14, 100).unwrap();
    sol.trajectory.last().distance(&exact)
}

#[test]
fn heun_is_second_order_on_local_fields() {
    let exact = xi0() * (1.0 / (1.0 + xi0().norm() * 2.0));
    let ratio = heun_error(&Localized(Quadratic), xi0(), exact, 40) / heun_error(&Localized(Quadratic), xi0(), exact, 80);
    assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn heun_is_second_order_on_history_fields() {
    let x0 = Vector::from_slice(&[1.0, 2.0]).unwrap();
    let exact = x0 * 2.0f64.cos();
    let e1 = heun_error(&Integrated, x0, exact, 40);
    let e2 = heun_error(&Integrated, x0, exact, 80);
    assert!((3.6..4.4).contains(&(e1 / e2)), "ratio {}", e1 / e2);
}

#[test]
fn frozen_stub_agrees_with_rk4_at_second_order() {
    let p = Profile::radial(3, 1.0, 1.0).unwrap();
    let field = LimitField::new(p, &SphereQuadSpec::default()).unwrap();
    let x0 = Vector::from_slice(&[1.0, 0.0, 0.0]).unwrap();
    let reference = integrate_rk4(&field, x0, 1.0 / 512.0, 512, 0.0).unwrap();
    let diff = |steps: usize| {
        let sol = integrate_heun(&Localized(field.clone()), x0, 1.0 / steps as f64, steps, 1e-14, 100).unwrap();
        sol.trajectory.last().distance(reference.trajectory.last())
    };
    let ratio = diff(32) / diff(64);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

fn baseline(scale: Scale) -> SolverConfig {
    let p = Profile::radial(3, 1.0, 1.0).unwrap();
    SolverConfig::new(p, Vector::from_slice(&[1.0, 0.0, 0.0]).unwrap(), 1.0, 1.0 / 64.0).with_scale(scale)
}

#[test]
fn zero_amplitude_keeps_the_state() {
    let mut cfg = baseline(Scale::Memory(0.1));
    cfg.profile = Profile::radial(3, 0.0, 1.0).unwrap();
    for sol in [solve_memory(&cfg).unwrap(), solve_limit(&cfg).unwrap()] {
        assert!(sol.is_complete());
        assert!(sol.warnings.is_empty());
        assert!(sol.trajectory.values().iter().all(|v| *v == cfg.xi0));
        assert!(sol.fields.iter().all(|f| f.norm() == 0.0));
    }
}

#[test]
fn memory_solve_records_fields_and_picard_warning() {
    let sol = solve_memory(&baseline(Scale::Memory(0.1))).unwrap();
    assert_eq!(sol.trajectory.len(), 65);
    assert_eq!(sol.fields.len(), 65);
    assert_eq!(sol.fields[0].norm(), 0.0);
    assert!(matches!(sol.warnings.as_slice(), [Warning::PicardWindow { .. }]));
    // short step on a short horizon stays inside the contraction window
    let mut cfg = baseline(Scale::Memory(0.4));
    cfg.horizon = 1.0 / 64.0;
    cfg.dt = 1.0 / 1024.0;
    assert!(solve_memory(&cfg).unwrap().warnings.is_empty());
}

#[test]
fn corrector_reports_divergence() {
    let mut cfg = baseline(Scale::Memory(0.1));
    cfg.fp_max_iter = 1;
    cfg.fp_tol = Some(1e-300);
    let sol = solve_memory(&cfg).unwrap();
    assert!(matches!(sol.failure(), Some(Error::FixedPointDivergence { step: 1, iterations: 1, .. })));
    assert_eq!(sol.trajectory.len(), 1);
    assert_eq!(sol.fields.len(), 1);
    assert!(matches!(sol.status, SolveStatus::Truncated { time, .. } if time == cfg.dt));
}

#[test]
fn configuration_errors() {
    assert!(solve_memory(&baseline(Scale::Limit)).is_err());
    assert!(solve_memory(&baseline(Scale::Memory(-0.1))).is_err());
    let mut cfg = baseline(Scale::Limit);
    cfg.dt = 0.3;
    assert!(solve_limit(&cfg).is_err());
    let mut cfg = baseline(Scale::Limit);
    cfg.xi0 = Vector::zeros(3);
    assert!(solve_limit(&cfg).is_err());
    let mut cfg = baseline(Scale::Limit);
    cfg.xi0 = Vector::zeros(2);
    assert!(matches!(solve_limit(&cfg), Err(Error::DimensionMismatch { .. })));
    let mut cfg = baseline(Scale::Limit);
    cfg.profile = Profile::radial(2, 1.0, 1.0).unwrap();
    cfg.xi0 = Vector::unit(2, 0);
    assert!(matches!(solve_limit(&cfg), Err(Error::UnsupportedDimension { .. })));
}

/// `ξ' = -10 ξ`; one RK4 step at `dt = 0.1` multiplies by `3/8`.
struct Drag;

impl LocalField for Drag {
    fn dimension(&self) -> usize {
        3
    }
    fn eval(&self, u: &Vector) -> Result<Vector> {
        Ok(*u * -10.0)
    }
}

#[test]
fn rk4_truncates_at_the_norm_floor() {
    let sol = integrate_rk4(&Drag, Vector::unit(3, 0), 0.1, 100, 1e-6).unwrap();
    // 0.375^14 > 1e-6 > 0.375^15
    match sol.status {
        SolveStatus::Truncated {
            time,
            reason: TruncationReason::NormFloor { .. },
        } => assert!((time - 1.5).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert_eq!(sol.trajectory.len(), sol.fields.len());
    assert!(sol.trajectory.last().norm() >= 1e-6);
}

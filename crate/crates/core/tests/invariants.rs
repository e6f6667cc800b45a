mod common;

use nonlocal_core::analysis::check_decay;
use nonlocal_core::integrators::{solve_limit, SolverConfig, Trajectory};
use nonlocal_core::limit_field::{dissipation, eval_f0};
use nonlocal_core::oscillatory::{eval_f_h_frozen, eval_memory_field};
use nonlocal_core::{ConstantSet, Profile, QuadratureSpec, SphereQuadSpec, Vector};
use proptest::prelude::*;

fn vec_strategy(d: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(lo..hi, d)
}

fn nonzero(v: Vec<f64>, min: f64) -> Option<Vector> {
    let v = Vector::from_slice(&v).unwrap();
    (v.norm() > min).then_some(v)
}

/// Rotation by `angle` in the `(i, j)` coordinate plane.
fn givens(v: &Vector, i: usize, j: usize, angle: f64) -> Vector {
    let (s, c) = angle.sin_cos();
    let mut out = *v;
    out[i] = c * v[i] - s * v[j];
    out[j] = s * v[i] + c * v[j];
    out
}

fn close(a: &Vector, b: &Vector, rel: f64) -> bool {
    a.distance(b) <= rel * a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn limit_field_is_rotation_equivariant(
        d in 3usize..=5,
        u in vec_strategy(5, -1.5, 1.5),
        c in vec_strategy(5, -0.5, 0.5),
        plane in (0usize..5, 0usize..5),
        angle in -3.0f64..3.0,
    ) {
        let (i, j) = (plane.0 % d, plane.1 % d);
        prop_assume!(i != j);
        let Some(u) = nonzero(u[..d].to_vec(), 0.2) else { return Ok(()) };
        let c = Vector::from_slice(&c[..d]).unwrap();
        let squad = SphereQuadSpec::default();
        let p = Profile::new(1.0, &c, 1.0).unwrap();
        let rotated = Profile::new(1.0, &givens(&c, i, j, angle), 1.0).unwrap();
        let f = eval_f0(&u, &p, &squad).unwrap();
        let g = eval_f0(&givens(&u, i, j, angle), &rotated, &squad).unwrap();
        prop_assert!(close(&givens(&f, i, j, angle), &g, 1e-9));
    }

    #[test]
    fn frozen_field_is_rotation_equivariant(
        d in 3usize..=5,
        u in vec_strategy(5, -1.5, 1.5),
        c in vec_strategy(5, -0.5, 0.5),
        plane in (0usize..5, 0usize..5),
        angle in -3.0f64..3.0,
        h in 0.05f64..0.5,
    ) {
        let (i, j) = (plane.0 % d, plane.1 % d);
        prop_assume!(i != j);
        let u = Vector::from_slice(&u[..d]).unwrap();
        let c = Vector::from_slice(&c[..d]).unwrap();
        let quad = QuadratureSpec::default();
        let p = Profile::new(1.0, &c, 0.9).unwrap();
        let rotated = Profile::new(1.0, &givens(&c, i, j, angle), 0.9).unwrap();
        let f = eval_f_h_frozen(&u, 1.0, h, &p, &quad).unwrap();
        let g = eval_f_h_frozen(&givens(&u, i, j, angle), 1.0, h, &rotated, &quad).unwrap();
        prop_assert!(close(&givens(&f, i, j, angle), &g, 1e-9));
    }

    #[test]
    fn fields_scale_with_amplitude_squared(
        a in 0.1f64..3.0,
        u in vec_strategy(3, -1.5, 1.5),
        c in vec_strategy(3, -0.5, 0.5),
        h in 0.05f64..0.5,
    ) {
        let Some(u) = nonzero(u, 0.2) else { return Ok(()) };
        let unit = Profile::new(1.0, &c, 1.0).unwrap();
        let scaled = Profile::new(a, &c, 1.0).unwrap();
        let squad = SphereQuadSpec::default();
        let quad = QuadratureSpec::default();
        let a2 = a * a;
        prop_assert!(close(&(eval_f0(&u, &unit, &squad).unwrap() * a2), &eval_f0(&u, &scaled, &squad).unwrap(), 1e-13));
        prop_assert!(close(
            &(eval_f_h_frozen(&u, 1.0, h, &unit, &quad).unwrap() * a2),
            &eval_f_h_frozen(&u, 1.0, h, &scaled, &quad).unwrap(),
            1e-13
        ));
        let traj = Trajectory::from_values(0.125, &[u, u * 0.9, u * 0.7]).unwrap();
        prop_assert!(close(
            &(eval_memory_field(&traj, 0.25, h, &unit, &quad).unwrap() * a2),
            &eval_memory_field(&traj, 0.25, h, &scaled, &quad).unwrap(),
            1e-13
        ));
        let c1 = ConstantSet::compute(&unit, 0.05).unwrap();
        let ca = ConstantSet::compute(&scaled, 0.05).unwrap();
        prop_assert!((ca.c1_g - a2 * c1.c1_g).abs() <= 1e-12 * ca.c1_g);
        prop_assert!((ca.c3_g - a2 * c1.c3_g).abs() <= 1e-12 * ca.c3_g);
    }

    #[test]
    fn dissipation_is_never_positive(
        d in 3usize..=5,
        u in vec_strategy(5, -2.0, 2.0),
        c in vec_strategy(5, -1.0, 1.0),
        s in 0.5f64..1.5,
    ) {
        let Some(u) = nonzero(u[..d].to_vec(), 0.05) else { return Ok(()) };
        let p = Profile::new(1.0, &c[..d], s).unwrap();
        prop_assert!(dissipation(&u, &p, &SphereQuadSpec::default()).unwrap() <= 0.0);
    }

    #[test]
    fn doubling_resolution_leaves_fields_unchanged(
        u in vec_strategy(3, -1.5, 1.5),
        c in vec_strategy(3, -0.5, 0.5),
        h in 0.05f64..0.5,
    ) {
        let Some(u) = nonzero(u, 0.2) else { return Ok(()) };
        let p = Profile::new(1.0, &c, 1.0).unwrap();
        let fine_sphere = SphereQuadSpec { rho_nodes: 96, circle_nodes: 64 };
        prop_assert!(close(
            &eval_f0(&u, &p, &SphereQuadSpec::default()).unwrap(),
            &eval_f0(&u, &p, &fine_sphere).unwrap(),
            1e-10
        ));
        let base = QuadratureSpec::default();
        let fine = QuadratureSpec {
            eta_nodes_per_axis: 2 * base.eta_nodes_per_axis,
            r_substeps_per_history_step: 2 * base.r_substeps_per_history_step,
            ..base
        };
        prop_assert!(close(
            &eval_f_h_frozen(&u, 1.0, h, &p, &base).unwrap(),
            &eval_f_h_frozen(&u, 1.0, h, &p, &fine).unwrap(),
            10.0 * base.tail_tolerance
        ));
        let traj = Trajectory::from_values(0.125, &[u, u * 0.8, u * 0.5, u * 0.4]).unwrap();
        prop_assert!(close(
            &eval_memory_field(&traj, 0.375, h, &p, &QuadratureSpec::default()).unwrap(),
            &eval_memory_field(&traj, 0.375, h, &p, &fine).unwrap(),
            1e-10
        ));
    }

    #[test]
    fn running_average_reproduces_linear_histories(
        a in vec_strategy(3, -2.0, 2.0),
        b in vec_strategy(3, -2.0, 2.0),
        t in 0.1f64..1.0,
        frac in 0.01f64..1.0,
    ) {
        let a = Vector::from_slice(&a).unwrap();
        let b = Vector::from_slice(&b).unwrap();
        let dt = 1.0 / 64.0;
        let values: Vec<Vector> = (0..=64).map(|k| a + b * (k as f64 * dt)).collect();
        let traj = Trajectory::from_values(dt, &values).unwrap();
        let span = frac * t;
        let want = a + b * (t - 0.5 * span);
        prop_assert!(traj.running_average(t, span).unwrap().distance(&want) <= 1e-12);
        let split = t - 0.5 * span;
        let whole = traj.window_integral(t - span, t).unwrap();
        let parts = traj.window_integral(t - span, split).unwrap() + traj.window_integral(split, t).unwrap();
        prop_assert!(whole.distance(&parts) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn limit_runs_never_gain_norm(
        c in vec_strategy(3, -0.8, 0.8),
        s in 0.6f64..1.4,
        xi in vec_strategy(3, -1.0, 1.0),
    ) {
        let Some(xi) = nonzero(xi, 0.3) else { return Ok(()) };
        let p = Profile::new(1.0, &c, s).unwrap();
        let sol = solve_limit(&SolverConfig::new(p, xi, 1.0, 1.0 / 64.0)).unwrap();
        prop_assert!(check_decay(&sol.trajectory).passed());
    }
}

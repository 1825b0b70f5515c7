use g2coflow::coflow::{self, IntegratorOptions};
use g2coflow::g2core::{canonical_g2, Convention};
use g2coflow::planar::{self, embed, embedding_consistency, lyapunov, planar_rhs, PhaseGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lyapunov_chain_rule(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let (f, g) = planar_rhs(x, y);
        let grad = 2.0 * (x + y);
        let (_, v_dot) = lyapunov(x, y);
        prop_assert!((v_dot - grad * (f + g)).abs() < 1e-10 * (1.0 + v_dot.abs()));
        prop_assert!(v_dot <= 0.0);
    }

    #[test]
    fn lyapunov_polar_form(r in 0.0f64..5.0, th in 0.0f64..std::f64::consts::TAU) {
        let (x, y) = (r * th.cos(), r * th.sin());
        let polar = -2.0 * r * r * (r * th.sin() + r * th.cos()).powi(2) * (6.0 - 2.0 * (2.0 * th).sin());
        let (_, v_dot) = lyapunov(x, y);
        prop_assert!((v_dot - polar).abs() < 1e-9 * (1.0 + polar.abs()));
    }

    #[test]
    fn h_is_a_first_integral(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(x.abs() > 1e-2 && y.abs() > 1e-2 && (x - y).abs() > 1e-2);
        let (f, g) = planar_rhs(x, y);
        let d_log_h = 2.0 * (g - f) / (y - x) - 3.0 * f / x - 3.0 * g / y;
        prop_assert!(d_log_h.abs() < 1e-8 * (1.0 + f.abs() + g.abs()) / x.abs().min(y.abs()).min((x - y).abs()));
    }

    #[test]
    fn planar_system_is_four_times_the_bracket_flow(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let g2 = canonical_g2(Convention::Example);
        let p = embedding_consistency(x, y, &g2).unwrap();
        prop_assert!(p.off_family < 1e-12 * (1.0 + x.abs() + y.abs()).powi(3));
        let scale = 1e-12 * (1.0 + p.planar.0.abs() + p.planar.1.abs());
        prop_assert!((p.planar.0 - 4.0 * p.restricted.0).abs() < scale);
        prop_assert!((p.planar.1 - 4.0 * p.restricted.1).abs() < scale);
    }

    #[test]
    fn equilibria_are_the_anti_diagonal(x in -5.0f64..5.0) {
        prop_assert!(planar::is_equilibrium(x, -x));
        prop_assume!(x != 0.0);
        prop_assert!(!planar::is_equilibrium(x, 0.3 * x));
        prop_assert!(!planar::is_equilibrium(x, 0.0));
    }
}

#[test]
fn axes_are_invariant() {
    for &(x0, y0) in &[(0.8, 0.0), (-1.2, 0.0), (0.0, 0.5), (0.0, -2.0)] {
        let tr = planar::integrate_planar(x0, y0, 3.0, &[]).unwrap();
        for &(_, x, y) in &tr.samples {
            assert_eq!(if x0 == 0.0 { x } else { y }, 0.0);
        }
        assert!(tr.h_drift().is_none());
    }
}

#[test]
fn unit_start_closed_form() {
    let out: Vec<f64> = (1..=40).map(|k| k as f64 * 0.25).collect();
    let tr = planar::integrate_planar(1.0, 0.0, 10.0, &out).unwrap();
    for &(t, x, _) in &tr.samples {
        let e = (1.0 + 12.0 * t).powf(-0.5);
        assert!(((x - e) / e).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn bracket_flow_runs_four_times_slower() {
    let g2 = canonical_g2(Convention::Example);
    let (x0, y0) = (0.5, 1.2);
    let mut opts = IntegratorOptions::forward(2.0);
    opts.rel_tol = 1e-11;
    opts.abs_tol = 1e-13;
    let trace = coflow::integrate(&embed(x0, y0), &opts, &g2).unwrap();
    let tr = planar::integrate_planar(x0, y0, 0.5, &[]).unwrap();
    let (_, x, y) = tr.last();
    let a = trace.last().a;
    assert!((a.0 - embed(a.0[(0, 1)], a.0[(1, 0)]).0).amax() < 1e-12);
    assert!((a.0[(0, 1)] - x).abs() < 1e-7 && (a.0[(1, 0)] - y).abs() < 1e-7);
}

#[test]
fn h_conserved_along_trajectories() {
    let grid = PhaseGrid::square(2.0, 2);
    for (x, y) in planar::random_starts(&grid, 10, 5) {
        let tr = planar::integrate_planar(x, y, 5.0, &[]).unwrap();
        if let Some(d) = tr.h_drift() {
            assert!(d < 1e-6, "({x}, {y}): {d}");
        }
    }
}

#[test]
fn nullcline_flags_on_known_lines() {
    let f = planar::nullcline_flags(1.0, 3.0);
    assert!(f.y_three_x && f.x_nullcline() && !f.y_nullcline());
    let f = planar::nullcline_flags(3.0, 1.0);
    assert!(f.y_third_x && f.y_nullcline() && !f.x_nullcline());
    let f = planar::nullcline_flags(2.0, -2.0);
    assert!(f.anti_diagonal && f.x_nullcline() && f.y_nullcline());
}

#[test]
fn phase_portrait_csv() {
    let grid = PhaseGrid::square(1.0, 3);
    let ds = planar::phase_portrait(&grid, 0.5, &[(0.5, 0.25)]).unwrap();
    assert_eq!(ds.points.len(), 9);
    assert_eq!(ds.points.iter().filter(|p| p.equilibrium).count(), 3);
    let mut buf = Vec::new();
    ds.write_points_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 10);
    assert_eq!(ds.trajectories.len(), 1);
}

use g2coflow::almost_abelian::{frob, q_matrix, sym};
use g2coflow::coflow::{self, norm_derivative, rhs, IntegratorOptions, Termination};
use g2coflow::g2core::{canonical_g2, Convention, G2Data};
use g2coflow::metric_lie::{BracketMatrix, Mat6, Mat7};
use g2coflow::planar::embed;
use g2coflow::sampling::{random_sp, random_su3, rng};
use proptest::prelude::*;

fn sp_from(g2: &G2Data, v: &[f64]) -> BracketMatrix {
    let x = Mat6::from_iterator(v.iter().copied());
    BracketMatrix(g2.j * (x + x.transpose()) * 0.5)
}

fn conventions() -> impl Strategy<Value = Convention> {
    prop_oneof![Just(Convention::Section4), Just(Convention::Example)]
}

/// Bracket of `exp(−εQ)·A` read back from transported structure constants.
fn transported(a: &BracketMatrix, q: &Mat7, eps: f64) -> Mat6 {
    let h = (q * -eps).exp();
    let sc = a.structure_constants().transport(&h).unwrap();
    Mat6::from_fn(|i, j| sc.c[6][j][i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rhs_is_tangent_to_sp(c in conventions(), v in prop::collection::vec(-1.0f64..1.0, 36)) {
        let g2 = canonical_g2(c);
        let a = sp_from(&g2, &v);
        prop_assert!(g2.sp_residual(&rhs(&a, &g2).unwrap()) < 1e-12);
    }

    #[test]
    fn norm_derivative_matches_rhs(c in conventions(), v in prop::collection::vec(-1.0f64..1.0, 36)) {
        let g2 = canonical_g2(c);
        let a = sp_from(&g2, &v);
        let nd = norm_derivative(&a, &g2).unwrap();
        let via_rhs = 2.0 * frob(&rhs(&a, &g2).unwrap(), &a.0);
        prop_assert!((nd - via_rhs).abs() < 1e-11 * (1.0 + nd.abs()));
        prop_assert!(nd <= 1e-12);
    }

    #[test]
    fn rhs_is_the_derivative_of_transport_by_q(c in conventions(), v in prop::collection::vec(-1.0f64..1.0, 36)) {
        let g2 = canonical_g2(c);
        let a = sp_from(&g2, &v);
        let q = q_matrix(&a, &g2).unwrap().assembled();
        let eps = 1e-5;
        let fd = (transported(&a, &q, eps) - transported(&a, &q, -eps)) / (2.0 * eps);
        let exact = rhs(&a, &g2).unwrap();
        prop_assert!((fd - exact).amax() < 1e-7 * (1.0 + exact.amax()), "{}", (fd - exact).amax());
    }

    #[test]
    fn rhs_is_cubic(v in prop::collection::vec(-1.0f64..1.0, 36), s in 0.1f64..3.0) {
        let g2 = canonical_g2(Convention::Section4);
        let a = sp_from(&g2, &v);
        let scaled = rhs(&BracketMatrix(a.0 * s), &g2).unwrap();
        let expected = rhs(&a, &g2).unwrap() * s.powi(3);
        prop_assert!((scaled - expected).amax() < 1e-12 * (1.0 + expected.amax()));
    }
}

#[test]
fn planar_unit_bracket_velocity() {
    let g2 = canonical_g2(Convention::Example);
    let v = rhs(&embed(1.0, 0.0), &g2).unwrap();
    assert!((v[(0, 1)] + 1.5).abs() < 1e-14);
    assert!((v[(4, 3)] - 1.5).abs() < 1e-14);
    assert!((norm_derivative(&embed(1.0, 0.0), &g2).unwrap() + 6.0).abs() < 1e-14);
}

#[test]
fn decrease_is_strict_unless_torsion_free() {
    let g2 = canonical_g2(Convention::Section4);
    let mut r = rng(11);
    for _ in 0..50 {
        let a = BracketMatrix(random_sp(&mut r, &g2, 1.0));
        assert!(sym(&a.0).norm() > 1e-3);
        assert!(norm_derivative(&a, &g2).unwrap() < 0.0);
        let k = BracketMatrix(random_su3(&mut r, &g2, 1.0));
        assert!(norm_derivative(&k, &g2).unwrap().abs() < 1e-14);
    }
}

#[test]
fn su3_brackets_are_fixed_points() {
    let g2 = canonical_g2(Convention::Section4);
    let a = BracketMatrix(random_su3(&mut rng(2), &g2, 1.0));
    let mut opts = IntegratorOptions::forward(5.0);
    opts.output_times = vec![1.0, 2.0];
    let trace = coflow::integrate(&a, &opts, &g2).unwrap();
    assert!((trace.last().a.0 - a.0).amax() < 1e-13);
    for (_, h) in coflow::reconstruct_h(&trace, &g2).unwrap() {
        assert!((h - Mat7::identity()).amax() < 1e-13);
    }
}

#[test]
fn norm_derivative_by_finite_differences() {
    let g2 = canonical_g2(Convention::Example);
    let a = BracketMatrix(random_sp(&mut rng(4), &g2, 1.0));
    for p in coflow::norm_derivative_fd(&a, &[0.5, 2.0, 8.0], 1e-3, &g2).unwrap() {
        assert!(p.residual < 1e-5, "{p:?}");
    }
}

#[test]
fn backward_planar_run_blows_up_before_one_third() {
    let g2 = canonical_g2(Convention::Example);
    let opts = IntegratorOptions { norm_ceiling: 1e4, ..IntegratorOptions::backward(1.0) };
    let trace = coflow::integrate(&embed(1.0, 0.0), &opts, &g2).unwrap();
    match trace.meta.termination {
        Termination::NormCeiling { t, .. } => assert!(t > -1.0 / 3.0 && t < -0.3, "{t}"),
        ref other => panic!("{other:?}"),
    }
    // relative error is amplified like 1/(1+3t) near the singularity
    for s in trace.samples.iter().filter(|s| s.t >= -0.3) {
        let exact = (1.0 + 3.0 * s.t).powf(-0.5);
        assert!(((s.a.0[(0, 1)] - exact) / exact).abs() < 1e-6, "t = {}", s.t);
    }
    let bound = coflow::scalar_bound_check(&trace);
    assert!(bound.pass, "{bound:?}");
    assert!(bound.backward_violation <= 0.0);
}

#[test]
fn forward_scalar_bound_is_sharp_for_planar_start() {
    // R = −x² and x² = 1/(1+3t): here R(t) = 1/(−3t − 1) sits above 1/(−t/2 − 1)
    let g2 = canonical_g2(Convention::Example);
    let trace = coflow::integrate(&embed(1.0, 0.0), &IntegratorOptions::forward(10.0), &g2).unwrap();
    let bound = coflow::scalar_bound_check(&trace);
    assert!(bound.pass && !bound.skipped, "{bound:?}");
    assert!((trace.initial().r + 1.0).abs() < 1e-14);
    assert!(bound.non_strict_steps == 0);
}

#[test]
fn trace_save_writes_csv_and_meta() {
    let g2 = canonical_g2(Convention::Section4);
    let a = BracketMatrix(random_sp(&mut rng(6), &g2, 1.0));
    let trace = coflow::integrate(&a, &IntegratorOptions::forward(1.0), &g2).unwrap();
    let dir = std::env::temp_dir().join(format!("g2coflow-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.csv");
    trace.save(&path).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), trace.samples.len() + 1);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["termination"]["reason"], "completed");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn pde_reconstruction_is_second_order() {
    let g2 = canonical_g2(Convention::Example);
    let a = BracketMatrix(random_sp(&mut rng(9), &g2, 0.8));
    let pts = coflow::pde_reconstruction_check(&a, 0.5, &[1e-2, 1e-3], &g2).unwrap();
    let order = (pts[0].residual / pts[1].residual).log10();
    assert!((1.8..2.2).contains(&order), "{pts:?}");
    assert!(pts[0].bracket_mismatch < 1e-10);
}

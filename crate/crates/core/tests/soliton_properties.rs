use g2coflow::almost_abelian::{block7, full_torsion};
use g2coflow::coflow::{self, IntegratorOptions};
use g2coflow::error::Error;
use g2coflow::g2core::{canonical_g2, Convention, G2Data};
use g2coflow::metric_lie::{BracketMatrix, Mat6};
use g2coflow::sampling::{random_sp, random_su3, random_u3, rng};
use g2coflow::soliton::{self, classify, Classification, SolitonField, SolitonKind};
use proptest::prelude::*;

fn u3_from(g2: &G2Data, v: &[f64]) -> Mat6 {
    let m = Mat6::from_iterator(v.iter().copied());
    let k = (m - m.transpose()) * 0.5;
    (k - g2.j * k * g2.j) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn skew_brackets_are_algebraic_and_not_shrinking(v in prop::collection::vec(-1.0f64..1.0, 36)) {
        let g2 = canonical_g2(Convention::Section4);
        let a = BracketMatrix(u3_from(&g2, &v));
        prop_assume!(a.0.norm() > 1e-3);
        let rep = soliton::certify(&a, None, &g2).unwrap();
        prop_assert_eq!(rep.kind, SolitonKind::Algebraic);
        prop_assert!(rep.c <= 1e-12);
        prop_assert!(soliton::expanding_only_audit(&rep));
        for (name, r) in &rep.residuals {
            prop_assert!(*r < 1e-9, "{} = {}", name, r);
        }
    }

    #[test]
    fn constants_scale_quadratically(v in prop::collection::vec(-1.0f64..1.0, 36), s in 0.2f64..3.0) {
        let g2 = canonical_g2(Convention::Section4);
        let a = BracketMatrix(g2.j * Mat6::from_iterator(v.iter().copied()).symmetric_part());
        let k = soliton::soliton_constants(&a, &g2).unwrap();
        let ks = soliton::soliton_constants(&BracketMatrix(a.0 * s), &g2).unwrap();
        prop_assert!((ks.c - s * s * k.c).abs() < 1e-11 * (1.0 + k.c.abs()));
        prop_assert!((ks.d - s * s * k.d).abs() < 1e-11 * (1.0 + k.d.abs()));
    }

    #[test]
    fn classification_follows_sign(c in -5.0f64..5.0) {
        let expected = if c > 1e-10 { Classification::Shrinking } else if c < -1e-10 { Classification::Expanding } else { Classification::Steady };
        prop_assert_eq!(classify(c), expected);
    }
}

#[test]
fn steady_skew_solitons_are_torsion_free() {
    let g2 = canonical_g2(Convention::Section4);
    let mut r = rng(7);
    for _ in 0..20 {
        let a = BracketMatrix(random_su3(&mut r, &g2, 1.0));
        let rep = soliton::certify(&a, None, &g2).unwrap();
        assert_eq!(rep.classification, Classification::Steady);
        assert!(rep.torsion_norm < 1e-12);
    }
}

#[test]
fn skew_self_similar_orbit_matches_flow() {
    let g2 = canonical_g2(Convention::Section4);
    let a = BracketMatrix(random_u3(&mut rng(12), &g2, 1.0));
    let alg = soliton::algebraic_check(&a, &g2).unwrap();
    assert!(alg.pass);
    let mut opts = IntegratorOptions::forward(4.0);
    opts.output_times = vec![0.5, 1.0, 2.0, 3.0];
    let trace = coflow::integrate(&a, &opts, &g2).unwrap();
    for s in &trace.samples {
        let exact = soliton::self_similar_bracket(&a, &alg.d_matrix, alg.constants.c, s.t).unwrap();
        assert!((s.a.0 - exact).norm() / exact.norm() < 1e-7, "t = {}", s.t);
    }
}

#[test]
fn example_fixture_values() {
    let ex = soliton::example("nilpotent3").unwrap();
    assert_eq!(ex.convention, Convention::Example);
    let g2 = canonical_g2(ex.convention);
    let a = BracketMatrix(ex.a);
    let k = soliton::soliton_constants(&a, &g2).unwrap();
    assert!((k.c + 2.5).abs() < 1e-14 && (k.d - 1.0).abs() < 1e-14 && (k.q + 1.5).abs() < 1e-14);
    assert!((k.lambda() - 10.0).abs() < 1e-13);
    assert_eq!(block7(&ex.d1, ex.d_const), ex.d);

    let alg = soliton::algebraic_check(&a, &g2).unwrap();
    assert!(!alg.pass);
    assert!((alg.derivation_residual - 1.0).abs() < 1e-12);
    assert!(soliton::semi_algebraic_check(&a, &ex.d1, &g2).unwrap().pass);

    let rep = soliton::certify(&a, Some(&ex.d1), &g2).unwrap();
    assert_eq!(rep.kind, SolitonKind::SemiAlgebraic);
    assert_eq!(rep.classification, Classification::Expanding);
    assert!(rep.residuals.values().all(|r| *r < 1e-10), "{:?}", rep.residuals);
}

#[test]
fn example_pde_fails_without_the_right_constant() {
    let ex = soliton::example("nilpotent3").unwrap();
    let g2 = canonical_g2(ex.convention);
    let a = BracketMatrix(ex.a);
    assert!(soliton::soliton_pde_check(&a, &ex.d, -2.5, &g2).unwrap().residual < 1e-10);
    assert!(soliton::soliton_pde_check(&a, &ex.d, 0.0, &g2).unwrap().residual > 1.0);
}

#[test]
fn least_squares_derivation_recovers_a_soliton() {
    let ex = soliton::example("nilpotent3").unwrap();
    let g2 = canonical_g2(ex.convention);
    let a = BracketMatrix(ex.a);
    let fit = soliton::find_derivation(&a, ex.d_const, &g2).unwrap().expect("derivation exists");
    assert!(soliton::semi_algebraic_check(&a, &fit.d1, &g2).unwrap().pass);
    let rep = soliton::certify(&a, None, &g2).unwrap();
    assert_eq!(rep.kind, SolitonKind::SemiAlgebraic);
}

#[test]
fn lie_derivative_of_derivation_matches_pullback() {
    let ex = soliton::example("nilpotent3").unwrap();
    let g2 = canonical_g2(ex.convention);
    let exact = soliton::lie_derivative_derivation(&ex.d, &g2);
    let err = |eps| exact.dist(&soliton::lie_derivative_derivation_fd(&ex.d, &g2, eps).unwrap());
    let (coarse, fine) = (err(1e-2), err(1e-3));
    assert!(fine < 1e-3 && (coarse / fine - 100.0).abs() < 5.0, "{coarse} {fine}");
}

#[test]
fn derivation_field_kinematics() {
    let ex = soliton::example("nilpotent3").unwrap();
    let x = SolitonField::from_derivation(&ex.d);
    assert!((x.divergence() + ex.d.trace()).abs() < 1e-14);
    assert!((x.lie_derivative_metric() + ex.d + ex.d.transpose()).amax() < 1e-14);
}

#[test]
fn generic_brackets_are_not_solitons() {
    let g2 = canonical_g2(Convention::Section4);
    let a = BracketMatrix(random_sp(&mut rng(3), &g2, 1.0));
    let rep = soliton::certify(&a, None, &g2).unwrap();
    assert_eq!(rep.kind, SolitonKind::None);
    assert!(soliton::expanding_only_audit(&rep));
    assert!((rep.torsion_norm - full_torsion(&a.0, &g2).norm()).abs() < 1e-14);
}

#[test]
fn zero_bracket_and_bad_domain_are_errors() {
    let g2 = canonical_g2(Convention::Section4);
    assert!(matches!(soliton::soliton_constants(&BracketMatrix::zero(), &g2), Err(Error::ZeroBracket)));
    let ex = soliton::example("nilpotent3").unwrap();
    // 1 − 2ct ≤ 0 needs t ≤ 1/2c < 0 for c < 0
    assert!(matches!(
        soliton::self_similar_bracket(&BracketMatrix(ex.a), &ex.d, -2.5, -0.2),
        Err(Error::SelfSimilarDomain(_))
    ));
}

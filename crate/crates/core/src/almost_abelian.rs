//! Closed-form geometry of coclosed structures on almost Abelian algebras,
//! parametrized by the bracket `A ∈ sp(ℝ⁶, ω)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::g2core::{circ6, torsion_from_connection, G2Data, TorsionPackage};
use crate::metric_lie::{ce_differential, koszul_connection, to_dmatrix, BracketMatrix, Mat6, Mat7, DIM};

/// Default relative tolerance for sp(ℝ⁶) membership at API boundaries.
pub const SP_TOL: f64 = 1e-9;

pub fn sym(a: &Mat6) -> Mat6 {
    (a + a.transpose()) * 0.5
}

pub fn commutator(a: &Mat6, b: &Mat6) -> Mat6 {
    a * b - b * a
}

pub fn block7(h: &Mat6, q: f64) -> Mat7 {
    let mut m = Mat7::zeros();
    m.fixed_view_mut::<6, 6>(0, 0).copy_from(h);
    m[(6, 6)] = q;
    m
}

pub fn upper6(m: &Mat7) -> Mat6 {
    m.fixed_view::<6, 6>(0, 0).into_owned()
}

/// Frobenius inner product `tr(XYᵗ)`.
pub fn frob(x: &Mat6, y: &Mat6) -> f64 {
    x.component_mul(y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpCheck {
    pub is_sp: bool,
    /// `|AJ + JAᵗ|`
    pub residual: f64,
    /// `|θ(A)ω|`
    pub theta_omega: f64,
    /// `|dψ|` through the Chevalley–Eilenberg differential
    pub d_psi: f64,
}

pub fn sp_check(a: &BracketMatrix, g2: &G2Data) -> SpCheck {
    let m = a.matrix();
    let residual = g2.sp_residual(m);
    let theta_omega = g2.omega.theta(&to_dmatrix(m)).norm_sq().sqrt();
    let d_psi = ce_differential(&a.structure_constants(), &g2.psi).norm_sq().sqrt();
    SpCheck { is_sp: residual <= SP_TOL * (1.0 + m.norm()), residual, theta_omega, d_psi }
}

pub fn require_sp(a: &Mat6, g2: &G2Data) -> Result<()> {
    let r = g2.sp_residual(a);
    if r > SP_TOL * (1.0 + a.norm()) {
        return Err(Error::NotSymplectic(r));
    }
    Ok(())
}

/// `T = diag(½[J,A], ½ tr(JA))`.
pub fn full_torsion(a: &Mat6, g2: &G2Data) -> Mat7 {
    block7(&(commutator(&g2.j, a) * 0.5), 0.5 * (g2.j * a).trace())
}

/// `τ₀ = (2/7) tr(JA)`, `τ₂₇ = diag((1/14) tr(JA) I − ½[J,A], −(3/7) tr(JA))`.
pub fn torsion_forms(a: &BracketMatrix, g2: &G2Data) -> Result<TorsionPackage> {
    let m = a.matrix();
    require_sp(m, g2)?;
    let tr_ja = (g2.j * m).trace();
    let tau27 = block7(
        &(Mat6::identity() * (tr_ja / 14.0) - commutator(&g2.j, m) * 0.5),
        -3.0 / 7.0 * tr_ja,
    );
    Ok(TorsionPackage {
        tau0: 2.0 / 7.0 * tr_ja,
        tau1: [0.0; 7],
        tau2: vec![0.0; 21],
        tau27,
        t: full_torsion(m, g2),
    })
}

/// Full torsion read off from the Levi-Civita derivative of φ, with the
/// residual of `∇_i φ = T_i^m e_m⌟ψ`.
pub fn torsion_from_nabla_phi(a: &BracketMatrix, g2: &G2Data) -> Result<(Mat7, f64)> {
    require_sp(a.matrix(), g2)?;
    let conn = koszul_connection(&a.structure_constants());
    let t = torsion_from_connection(&conn, g2);
    let mut residual = 0.0f64;
    for i in 0..DIM {
        let mut fit = KForm::zero(DIM, 3);
        for m in 0..DIM {
            let mut e = [0.0; DIM];
            e[m] = 1.0;
            fit += &g2.psi.interior(&e).unwrap().scale(t[(i, m)]);
        }
        residual = residual.max(conn.covariant_form(i, &g2.phi).dist(&fit));
    }
    Ok((t, residual))
}

/// `T∘T = diag(−½ tr(JA)[J,A] − S∘₆S, −tr S²)`.
pub fn t_circ_t(a: &BracketMatrix, g2: &G2Data) -> Result<Mat7> {
    let m = a.matrix();
    require_sp(m, g2)?;
    let s = sym(m);
    let tr_ja = (g2.j * m).trace();
    Ok(block7(
        &(-commutator(&g2.j, m) * (0.5 * tr_ja) - circ6(&s, &s, g2)),
        -(s * s).trace(),
    ))
}

/// The symbol `Q_A` with `Δψ = θ(Q_A)ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolQ {
    #[serde(rename = "Qh", with = "crate::io::matrix")]
    pub qh: Mat6,
    pub q: f64,
}

impl SymbolQ {
    pub fn assembled(&self) -> Mat7 {
        block7(&self.qh, self.q)
    }
}

/// `Qʰ = ½[A,Aᵗ] + ½ S∘₆S`, `q = −½ tr S² − ¼ (tr JA)²`; no sp check.
pub fn q_matrix_unchecked(a: &Mat6, g2: &G2Data) -> SymbolQ {
    let s = sym(a);
    let tr_ja = (g2.j * a).trace();
    SymbolQ {
        qh: commutator(a, &a.transpose()) * 0.5 + circ6(&s, &s, g2) * 0.5,
        q: -0.5 * (s * s).trace() - 0.25 * tr_ja * tr_ja,
    }
}

pub fn q_matrix(a: &BracketMatrix, g2: &G2Data) -> Result<SymbolQ> {
    require_sp(a.matrix(), g2)?;
    Ok(q_matrix_unchecked(a.matrix(), g2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarDiagnostics {
    /// scalar curvature `−tr S²`
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "torsionNormSq")]
    pub torsion_norm_sq: f64,
    #[serde(rename = "trJA")]
    pub tr_ja: f64,
    #[serde(rename = "trS2")]
    pub tr_s2: f64,
    #[serde(rename = "normSq")]
    pub norm_sq: f64,
    /// `|R − ((tr T)² − |T|²)|`
    pub identity_residual: f64,
}

pub fn scalar_diagnostics_unchecked(a: &Mat6, g2: &G2Data) -> ScalarDiagnostics {
    let s = sym(a);
    let tr_s2 = (s * s).trace();
    let t = full_torsion(a, g2);
    let r = -tr_s2;
    let tr_t = t.trace();
    ScalarDiagnostics {
        r,
        torsion_norm_sq: t.norm_squared(),
        tr_ja: (g2.j * a).trace(),
        tr_s2,
        norm_sq: a.norm_squared(),
        identity_residual: (r - (tr_t * tr_t - t.norm_squared())).abs(),
    }
}

pub fn scalar_diagnostics(a: &BracketMatrix, g2: &G2Data) -> Result<ScalarDiagnostics> {
    require_sp(a.matrix(), g2)?;
    Ok(scalar_diagnostics_unchecked(a.matrix(), g2))
}

/// The 3-step nilpotent bracket `A = [[0, B], [C, 0]]` of the worked soliton
/// example (to be used with the example convention).
pub fn nilpotent_example() -> BracketMatrix {
    let r2 = std::f64::consts::SQRT_2;
    let mut a = Mat6::zeros();
    a[(1, 5)] = 1.0;
    a[(2, 4)] = 1.0;
    a[(3, 1)] = r2;
    a[(4, 0)] = r2;
    BracketMatrix(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{canonical_g2, circ, Convention};
    use crate::metric_lie::{curvature, hodge_laplacian};
    use crate::sampling::{random_sp, random_su3, rng};

    #[test]
    fn sp_examples() {
        for c in Convention::ALL {
            let g2 = canonical_g2(c);
            assert!(sp_check(&BracketMatrix(g2.j), &g2).is_sp);
            let chk = sp_check(&BracketMatrix(Mat6::identity()), &g2);
            assert!(!chk.is_sp && chk.residual > 1.0 && chk.d_psi > 1.0 && chk.theta_omega > 1.0);
            assert!(require_sp(&Mat6::identity(), &g2).is_err());
        }
        let g2 = canonical_g2(Convention::Example);
        let chk = sp_check(&nilpotent_example(), &g2);
        assert!(chk.is_sp && chk.residual == 0.0 && chk.d_psi < 1e-15);
    }

    #[test]
    fn a_equals_j() {
        for c in Convention::ALL {
            let g2 = canonical_g2(c);
            let a = BracketMatrix(g2.j);
            let pkg = torsion_forms(&a, &g2).unwrap();
            assert!((pkg.tau0 + 12.0 / 7.0).abs() < 1e-14);
            let expected = block7(&Mat6::zeros(), -3.0);
            assert!((pkg.t - expected).amax() < 1e-14);
            let (t, res) = torsion_from_nabla_phi(&a, &g2).unwrap();
            assert!(res < 1e-13);
            assert!((t - expected).amax() < 1e-13, "{c}: {t}");
            let d = scalar_diagnostics(&a, &g2).unwrap();
            assert!(d.r.abs() < 1e-14 && (d.torsion_norm_sq - 9.0).abs() < 1e-13);
            assert!((d.tr_ja + 6.0).abs() < 1e-14);
            assert!(d.identity_residual < 1e-13);
        }
    }

    #[test]
    fn su3_is_torsion_free() {
        let mut r = rng(9);
        for c in Convention::ALL {
            let g2 = canonical_g2(c);
            let a = BracketMatrix(random_su3(&mut r, &g2, 1.0));
            assert!(torsion_forms(&a, &g2).unwrap().t.amax() < 1e-15);
            assert!(q_matrix(&a, &g2).unwrap().assembled().amax() < 1e-15);
            assert!(t_circ_t(&a, &g2).unwrap().amax() < 1e-15);
            let lap = hodge_laplacian(&a.structure_constants(), &g2.psi);
            assert!(lap.max_abs() < 1e-14);
        }
    }

    #[test]
    fn example_values() {
        let g2 = canonical_g2(Convention::Example);
        let a = nilpotent_example();
        let d = scalar_diagnostics(&a, &g2).unwrap();
        assert!((d.tr_s2 - 3.0).abs() < 1e-14 && d.tr_ja.abs() < 1e-15);
        assert!((d.r + 3.0).abs() < 1e-14 && (d.norm_sq - 6.0).abs() < 1e-14);
        assert!((t_circ_t(&a, &g2).unwrap()[(6, 6)] + 3.0).abs() < 1e-14);
        let q = q_matrix(&a, &g2).unwrap();
        assert!((q.q + 1.5).abs() < 1e-14);
        let m = a.matrix();
        let r2 = std::f64::consts::SQRT_2;
        let comm = commutator(m, &m.transpose());
        assert!((comm - Mat6::from_diagonal(&[-2.0, -1.0, 1.0, 2.0, 1.0, -1.0].into())).amax() < 1e-14);
        let s = sym(m);
        #[rustfmt::skip]
        let ss = Mat6::new(
            1.0, 0.0, -r2, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            -r2, 0.0, 2.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, -1.0, 0.0, r2,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, r2, 0.0, -2.0,
        );
        assert!((circ6(&s, &s, &g2) - ss).amax() < 1e-14);
    }

    #[test]
    fn routes_agree_on_random_brackets() {
        let mut r = rng(17);
        for c in Convention::ALL {
            let g2 = canonical_g2(c);
            for _ in 0..25 {
                let a = BracketMatrix(random_sp(&mut r, &g2, 1.0));
                let pkg = torsion_forms(&a, &g2).unwrap();
                assert!(pkg.tau27.trace().abs() < 1e-13);
                assert!((pkg.t - (Mat7::identity() * (pkg.tau0 / 4.0) - pkg.tau27)).amax() < 1e-14);
                let (t, res) = torsion_from_nabla_phi(&a, &g2).unwrap();
                assert!(res < 1e-12);
                assert!((t - pkg.t).amax() < 1e-12, "{c}: torsion routes differ");
                let tt = t_circ_t(&a, &g2).unwrap();
                assert!((tt - circ(&pkg.t, &pkg.t, &g2)).amax() < 1e-12);
                let q = q_matrix(&a, &g2).unwrap();
                assert!(g2.sp_residual(&q.qh) < 1e-12);
                let lap = hodge_laplacian(&a.structure_constants(), &g2.psi);
                let sym_q = -g2.psi.theta(&to_dmatrix(&q.assembled()));
                assert!(lap.dist(&-sym_q) < 1e-12);
                let sc = a.structure_constants();
                let ric = curvature(&sc, &koszul_connection(&sc)).ricci();
                let m = a.matrix();
                let s = sym(m);
                let expected = block7(&(commutator(m, &m.transpose()) * 0.5), -(s * s).trace());
                assert!((ric - expected).amax() < 1e-12);
                let d = scalar_diagnostics(&a, &g2).unwrap();
                assert!(d.identity_residual < 1e-12);
                assert!(m.trace().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_names() {
        let g2 = canonical_g2(Convention::Example);
        let d = scalar_diagnostics(&nilpotent_example(), &g2).unwrap();
        let v: serde_json::Value = serde_json::to_value(d).unwrap();
        for k in ["R", "torsionNormSq", "trJA", "trS2", "normSq"] {
            assert!(v.get(k).is_some());
        }
    }
}

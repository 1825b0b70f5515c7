//! Algebraic and semi-algebraic solitons `Q_A = cI + ½(D + Dᵗ)` with
//! `D ∈ Der(g, A)`, their certification against the coflow soliton
//! equation `Δψ = λψ + L_{X_D}ψ`, `λ = −4c`, and the self-similar orbit.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::almost_abelian::{block7, commutator, frob, full_torsion, q_matrix, require_sp, sym, upper6};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::g2core::{circ, circ6, G2Data};
use crate::metric_lie::{
    curl_of_gradient, curvature, div_tensor, hodge_laplacian, koszul_connection, to_dmatrix, BracketMatrix, Mat6,
    Mat7, Vec7,
};

/// Certification tolerance on every residual.
pub const CERT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonConstants {
    pub c: f64,
    pub d: f64,
    /// `q_A = c + d`
    pub q: f64,
}

impl SolitonConstants {
    pub fn lambda(&self) -> f64 {
        -4.0 * self.c
    }
}

fn nonzero(a: &BracketMatrix, g2: &G2Data) -> Result<()> {
    if a.0.norm_squared() == 0.0 {
        return Err(Error::ZeroBracket);
    }
    require_sp(a.matrix(), g2)
}

/// `[A,Aᵗ] + S∘₆S`, i.e. `2Qʰ_A`.
fn two_qh(a: &Mat6, g2: &G2Data) -> Mat6 {
    let s = sym(a);
    commutator(a, &a.transpose()) + circ6(&s, &s, g2)
}

/// `d = (|[A,Aᵗ]|² + ⟨S∘₆S,[A,Aᵗ]⟩) / 2|A|²` and `c = q_A − d`.
pub fn soliton_constants(a: &BracketMatrix, g2: &G2Data) -> Result<SolitonConstants> {
    nonzero(a, g2)?;
    let m = a.matrix();
    let s = sym(m);
    let comm = commutator(m, &m.transpose());
    let d = (comm.norm_squared() + frob(&circ6(&s, &s, g2), &comm)) / (2.0 * m.norm_squared());
    let tr_ja = (g2.j * m).trace();
    let q = -0.5 * (s * s).trace() - 0.25 * tr_ja * tr_ja;
    Ok(SolitonConstants { c: q - d, d, q })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgebraicCheck {
    pub pass: bool,
    pub constants: SolitonConstants,
    /// `|[[A,Aᵗ] + S∘₆S, A] − 2d A|`
    pub equation_residual: f64,
    /// `D = Q_A − cI`
    #[serde(rename = "D", with = "crate::io::matrix")]
    pub d_matrix: Mat7,
    pub derivation_residual: f64,
    pub transpose_derivation_residual: f64,
}

pub fn algebraic_check(a: &BracketMatrix, g2: &G2Data) -> Result<AlgebraicCheck> {
    let k = soliton_constants(a, g2)?;
    let m = a.matrix();
    let equation_residual = (commutator(&two_qh(m, g2), m) - m * (2.0 * k.d)).amax();
    let d_matrix = q_matrix(a, g2)?.assembled() - Mat7::identity() * k.c;
    let sc = a.structure_constants();
    let derivation_residual = sc.derivation_residual(&d_matrix);
    let transpose_derivation_residual = sc.derivation_residual(&d_matrix.transpose());
    Ok(AlgebraicCheck {
        pass: equation_residual < CERT_TOL && derivation_residual < CERT_TOL && transpose_derivation_residual < CERT_TOL,
        constants: k,
        equation_residual,
        d_matrix,
        derivation_residual,
        transpose_derivation_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SemiAlgebraicCheck {
    pub pass: bool,
    pub constants: SolitonConstants,
    /// `|[D₁,A] − dA|`
    pub derivation_residual: f64,
    /// `|[A,Aᵗ] + S∘₆S + (tr S² + ½(tr JA)² + 2d) I − D₁ − D₁ᵗ|`
    pub equation_residual: f64,
    /// `|Q_A − cI − ½(D + Dᵗ)|`
    pub q_residual: f64,
    #[serde(rename = "D", with = "crate::io::matrix")]
    pub d_matrix: Mat7,
}

/// Right-hand side target `M` with `D₁ + D₁ᵗ = M`.
fn semi_target(a: &Mat6, d: f64, g2: &G2Data) -> Mat6 {
    let s = sym(a);
    let tr_ja = (g2.j * a).trace();
    two_qh(a, g2) + Mat6::identity() * ((s * s).trace() + 0.5 * tr_ja * tr_ja + 2.0 * d)
}

pub fn semi_algebraic_check(a: &BracketMatrix, d1: &Mat6, g2: &G2Data) -> Result<SemiAlgebraicCheck> {
    let k = soliton_constants(a, g2)?;
    let m = a.matrix();
    let derivation_residual = (commutator(d1, m) - m * k.d).amax();
    let equation_residual = (semi_target(m, k.d, g2) - d1 - d1.transpose()).amax();
    let d_matrix = block7(d1, k.d);
    let q_residual =
        (q_matrix(a, g2)?.assembled() - Mat7::identity() * k.c - (d_matrix + d_matrix.transpose()) * 0.5).amax();
    Ok(SemiAlgebraicCheck {
        pass: derivation_residual < CERT_TOL && equation_residual < CERT_TOL && q_residual < CERT_TOL,
        constants: k,
        derivation_residual,
        equation_residual,
        q_residual,
        d_matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationFit {
    #[serde(rename = "D1", with = "crate::io::matrix")]
    pub d1: Mat6,
    pub residual: f64,
}

/// Minimum-norm least-squares `D₁` for `[D₁,A] = dA` together with
/// `D₁ + D₁ᵗ = M`; `None` when the system is inconsistent. The skew part of
/// `D₁` is fixed only up to skew matrices commuting with `A`.
pub fn find_derivation(a: &BracketMatrix, d: f64, g2: &G2Data) -> Result<Option<DerivationFit>> {
    nonzero(a, g2)?;
    let m = a.matrix();
    let target = semi_target(m, d, g2);
    let mut lhs = DMatrix::<f64>::zeros(72, 36);
    let mut rhs = DMatrix::<f64>::zeros(72, 1);
    for (col, (p, q)) in (0..6).flat_map(|p| (0..6).map(move |q| (p, q))).enumerate() {
        let mut e = Mat6::zeros();
        e[(p, q)] = 1.0;
        let c = commutator(&e, m);
        let s = e + e.transpose();
        for r in 0..36 {
            lhs[(r, col)] = c[(r / 6, r % 6)];
            lhs[(36 + r, col)] = s[(r / 6, r % 6)];
        }
    }
    for r in 0..36 {
        rhs[(r, 0)] = d * m[(r / 6, r % 6)];
        rhs[(36 + r, 0)] = target[(r / 6, r % 6)];
    }
    let svd = lhs.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd.solve(&rhs, 1e-12 * smax.max(1.0)).map_err(|e| Error::InvalidForm(e.to_string()))?;
    let residual = (&lhs * &x - &rhs).amax();
    let d1 = Mat6::from_fn(|p, q| x[(6 * p + q, 0)]);
    Ok((residual < CERT_TOL).then_some(DerivationFit { d1, residual }))
}

/// `L_{X_D}ψ` for `X_D = −D`: the derivative of `(e^{−tD})*ψ` at `t = 0`,
/// which is `θ(D)ψ`.
pub fn lie_derivative_derivation(d: &Mat7, g2: &G2Data) -> KForm {
    g2.psi.theta(&to_dmatrix(d))
}

/// Central difference of `t ↦ (e^{−tD})*ψ`.
pub fn lie_derivative_derivation_fd(d: &Mat7, g2: &G2Data, eps: f64) -> Result<KForm> {
    let fwd = g2.psi.pullback(&to_dmatrix(&(d * -eps).exp()))?;
    let bwd = g2.psi.pullback(&to_dmatrix(&(d * eps).exp()))?;
    Ok((fwd - bwd).scale(0.5 / eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PdeResidual {
    /// `|Δψ − λψ − L_{X_D}ψ|`
    pub residual: f64,
    /// `|θ(D)ψ − (finite-difference L_{X_D}ψ)|`
    pub lie_fd_residual: f64,
}

/// `Δψ` from the Chevalley–Eilenberg Laplacian, `λ = −4c`.
pub fn soliton_pde_check(a: &BracketMatrix, d: &Mat7, c: f64, g2: &G2Data) -> Result<PdeResidual> {
    let lap = hodge_laplacian(&a.structure_constants(), &g2.psi);
    let lie = lie_derivative_derivation(d, g2);
    let gap = lap - g2.psi.scale(-4.0 * c) - lie.clone();
    let eps = 1e-4 / (1.0 + d.amax());
    let fd = lie_derivative_derivation_fd(d, g2, eps)?;
    Ok(PdeResidual { residual: gap.norm_sq().sqrt(), lie_fd_residual: lie.dist(&fd) })
}

/// A soliton vector field through its value and gradient `M_ab = ∇_a X_b`
/// at the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonField {
    pub value: Vec7,
    pub gradient: Mat7,
}

impl SolitonField {
    pub fn left_invariant(x: &Vec7, a: &BracketMatrix) -> Self {
        let conn = koszul_connection(&a.structure_constants());
        SolitonField { value: *x, gradient: conn.vector_gradient(x) }
    }

    /// `X_D = −D`, generated by the automorphisms `e^{−tD}`: vanishes at the
    /// identity with `∇_a X_b = −D_{ba}`.
    pub fn from_derivation(d: &Mat7) -> Self {
        SolitonField { value: Vec7::zeros(), gradient: -d.transpose() }
    }

    pub fn divergence(&self) -> f64 {
        self.gradient.trace()
    }

    pub fn lie_derivative_metric(&self) -> Mat7 {
        self.gradient + self.gradient.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneralConditions {
    /// `|div T + ½ Curl X + X⌟T|`
    pub vector_residual: f64,
    /// `|−Ric + ½ T∘T + (tr T) T − (λ/4) g − ½ L_X g|`
    pub tensor_residual: f64,
}

pub fn general_soliton_conditions(
    t: &Mat7,
    div_t: &Vec7,
    ric: &Mat7,
    x: &SolitonField,
    lambda: f64,
    g2: &G2Data,
) -> GeneralConditions {
    let curl_x = curl_of_gradient(&x.gradient, &g2.phi);
    let vector = div_t + curl_x * 0.5 + t.transpose() * x.value;
    let tensor = -ric + circ(t, t, g2) * 0.5 + t * t.trace()
        - Mat7::identity() * (lambda / 4.0)
        - x.lie_derivative_metric() * 0.5;
    GeneralConditions { vector_residual: vector.amax(), tensor_residual: tensor.amax() }
}

/// Both general conditions with `T`, `div T` and `Ric` taken from the
/// Koszul connection of `A`.
pub fn general_conditions_for(a: &BracketMatrix, x: &SolitonField, lambda: f64, g2: &G2Data) -> Result<GeneralConditions> {
    require_sp(a.matrix(), g2)?;
    let sc = a.structure_constants();
    let conn = koszul_connection(&sc);
    let t = full_torsion(a.matrix(), g2);
    let nabla_t = conn.covariant_derivative_tensor(&t);
    let ric = curvature(&sc, &conn).ricci();
    Ok(general_soliton_conditions(&t, &div_tensor(&nabla_t), &ric, x, lambda, g2))
}

/// `½((tr T)² + |T|²) − (7λ/4 + div X)`.
pub fn trace_identity_check(t: &Mat7, x: &SolitonField, lambda: f64) -> f64 {
    let tr = t.trace();
    0.5 * (tr * tr + t.norm_squared()) - (1.75 * lambda + x.divergence())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Expanding,
    Steady,
    Shrinking,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Classification::Expanding => "expanding",
            Classification::Steady => "steady",
            Classification::Shrinking => "shrinking",
        })
    }
}

/// `c < 0` expanding (`λ = −4c > 0`), `c = 0` steady, `c > 0` shrinking;
/// `|c| ≤ 1e−10` counts as zero.
pub fn classify(c: f64) -> Classification {
    if c < -1e-10 {
        Classification::Expanding
    } else if c <= 1e-10 {
        Classification::Steady
    } else {
        Classification::Shrinking
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonKind {
    Algebraic,
    SemiAlgebraic,
    None,
}

impl fmt::Display for SolitonKind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            SolitonKind::Algebraic => "algebraic",
            SolitonKind::SemiAlgebraic => "semi_algebraic",
            SolitonKind::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub kind: SolitonKind,
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
    #[serde(rename = "D", with = "crate::io::matrix")]
    pub d_matrix: Mat7,
    pub residuals: BTreeMap<String, f64>,
    pub classification: Classification,
    #[serde(rename = "torsionNorm")]
    pub torsion_norm: f64,
}

impl SolitonReport {
    pub fn is_soliton(&self) -> bool {
        self.kind != SolitonKind::None
    }
}

/// Algebraic check first; otherwise a semi-algebraic check with `d1` (or a
/// derivation found by least squares). PDE and trace residuals are computed
/// for whichever `D` was used.
pub fn certify(a: &BracketMatrix, d1: Option<&Mat6>, g2: &G2Data) -> Result<SolitonReport> {
    let alg = algebraic_check(a, g2)?;
    let k = alg.constants;
    let mut residuals = BTreeMap::new();
    let (kind, d_matrix) = if alg.pass {
        residuals.insert("derivation".into(), alg.derivation_residual.max(alg.transpose_derivation_residual));
        residuals.insert("soliton_eq".into(), alg.equation_residual);
        (SolitonKind::Algebraic, alg.d_matrix)
    } else {
        let candidate = match d1 {
            Some(m) => Some(*m),
            None => find_derivation(a, k.d, g2)?.map(|f| f.d1),
        };
        match candidate {
            Some(m) => {
                let semi = semi_algebraic_check(a, &m, g2)?;
                residuals.insert("derivation".into(), semi.derivation_residual);
                residuals.insert("soliton_eq".into(), semi.equation_residual.max(semi.q_residual));
                let kind = if semi.pass { SolitonKind::SemiAlgebraic } else { SolitonKind::None };
                (kind, semi.d_matrix)
            }
            None => {
                residuals.insert("derivation".into(), alg.derivation_residual);
                residuals.insert("soliton_eq".into(), alg.equation_residual);
                (SolitonKind::None, alg.d_matrix)
            }
        }
    };
    let pde = soliton_pde_check(a, &d_matrix, k.c, g2)?;
    residuals.insert("pde".into(), pde.residual);
    let t = full_torsion(a.matrix(), g2);
    let field = SolitonField::from_derivation(&d_matrix);
    residuals.insert("trace_identity".into(), trace_identity_check(&t, &field, k.lambda()).abs());
    let general = general_conditions_for(a, &field, k.lambda(), g2)?;
    residuals.insert("general_vector".into(), general.vector_residual);
    residuals.insert("general_tensor".into(), general.tensor_residual);
    Ok(SolitonReport {
        kind,
        c: k.c,
        d: k.d,
        lambda: k.lambda(),
        d_matrix,
        residuals,
        classification: classify(k.c),
        torsion_norm: t.norm(),
    })
}

/// Certified solitons are never shrinking, and steady ones are torsion-free.
pub fn expanding_only_audit(report: &SolitonReport) -> bool {
    if !report.is_soliton() {
        return true;
    }
    match report.classification {
        Classification::Shrinking => false,
        Classification::Steady => report.torsion_norm < 1e-8,
        Classification::Expanding => true,
    }
}

/// `A(t) = (1 − 2ct)^{−1/2} e^{s(t)E} A e^{−s(t)E}`, `E = ½(D − Dᵗ)`,
/// `s(t) = −log(1 − 2ct)/2c` (`s = t` when `c = 0`).
pub fn self_similar_bracket(a: &BracketMatrix, d: &Mat7, c: f64, t: f64) -> Result<Mat6> {
    let base = 1.0 - 2.0 * c * t;
    if base <= 0.0 {
        return Err(Error::SelfSimilarDomain(base));
    }
    let s = if c == 0.0 { t } else { -base.ln() / (2.0 * c) };
    let e = upper6(&((d - d.transpose()) * 0.5));
    let rot = (e * s).exp();
    let rot_inv = (e * -s).exp();
    Ok(rot * a.0 * rot_inv / base.sqrt())
}

/// Worked 3-step nilpotent example with its derivation, as shipped in the
/// `nilpotent3` fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSoliton {
    pub name: String,
    pub convention: crate::g2core::Convention,
    #[serde(rename = "A", with = "crate::io::matrix")]
    pub a: Mat6,
    #[serde(rename = "D1", with = "crate::io::matrix")]
    pub d1: Mat6,
    #[serde(rename = "D", with = "crate::io::matrix")]
    pub d: Mat7,
    #[serde(rename = "d")]
    pub d_const: f64,
    pub c: f64,
}

const NILPOTENT3: &str = include_str!("../data/nilpotent3.json");

pub fn example(name: &str) -> Result<ExampleSoliton> {
    match name {
        "nilpotent3" => Ok(serde_json::from_str(NILPOTENT3)?),
        _ => Err(Error::InvalidForm(format!("unknown example `{name}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{canonical_g2, Convention};

    #[test]
    fn fixture_matches_builtin() {
        let ex = example("nilpotent3").unwrap();
        assert_eq!(ex.a, crate::almost_abelian::nilpotent_example().0);
        assert_eq!(block7(&ex.d1, ex.d_const), ex.d);
        assert!(example("nope").is_err());
    }

    #[test]
    fn zero_bracket_rejected() {
        let g2 = canonical_g2(Convention::Example);
        assert_eq!(soliton_constants(&BracketMatrix::zero(), &g2), Err(Error::ZeroBracket));
    }

    #[test]
    fn self_similar_domain() {
        let a = BracketMatrix(Mat6::identity());
        assert!(matches!(self_similar_bracket(&a, &Mat7::zeros(), 1.0, 0.5), Err(Error::SelfSimilarDomain(_))));
        assert_eq!(self_similar_bracket(&a, &Mat7::zeros(), 1.0, 0.0).unwrap(), a.0);
    }
}

//! G₂ and SU(3) linear algebra on ℝ⁷ = ℝ⁶ ⊕ ℝe₇: the forms φ, ψ, ω, ρ±, the
//! maps i_φ and i_ψ, type decomposition of 4-forms, the ∘ products, and the
//! torsion-level formulas for coclosed structures (Ricci, Laplacian of ψ,
//! Lie derivative of ψ, Einstein condition).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::metric_lie::{
    curl_of_gradient, to_dmatrix, ConnectionCoefficients, Mat6, Mat7, Vec7, DIM,
};

/// Basis convention for the SU(3)-structure on h = span(e₁…e₆).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// ω = e¹²+e³⁴+e⁵⁶, ρ⁺ = e¹³⁵−e¹⁴⁶−e²⁴⁵−e²³⁶
    Section4,
    /// ω = e¹⁴+e²⁵+e³⁶, ρ⁺ = e¹²³−e¹⁵⁶+e²⁴⁶−e³⁴⁵
    Example,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::Section4, Convention::Example];

    pub fn name(self) -> &'static str {
        match self {
            Convention::Section4 => "section4",
            Convention::Example => "example",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "section4" => Ok(Convention::Section4),
            "example" => Ok(Convention::Example),
            other => Err(Error::UnknownConvention(other.to_string())),
        }
    }
}

/// All antisymmetric components of a form as a dense row-major array.
#[derive(Debug, Clone)]
pub struct DenseForm {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl DenseForm {
    pub fn new(form: &KForm) -> Self {
        let (n, k) = (form.dim(), form.degree());
        let mut data = vec![0.0; n.pow(k as u32)];
        let perms = permutations(k);
        for (idx, c) in form.terms() {
            for (p, sign) in &perms {
                let flat = p.iter().fold(0, |acc, &s| acc * n + idx[s]);
                data[flat] = sign * c;
            }
        }
        DenseForm { n, k, data }
    }

    #[inline]
    pub fn at(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.k);
        self.data[idx.iter().fold(0, |acc, &i| acc * self.n + i)]
    }

    #[inline]
    pub fn at3(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn at4(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn at2(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.n + b]
    }
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, f64)>) {
        if cur.len() == used.len() {
            let mut inv = 0;
            for i in 0..cur.len() {
                for j in i + 1..cur.len() {
                    if cur[i] > cur[j] {
                        inv += 1;
                    }
                }
            }
            out.push((cur.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for s in 0..used.len() {
            if !used[s] {
                used[s] = true;
                cur.push(s);
                rec(cur, used, out);
                cur.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Invariant G₂-structure `φ = ω∧e⁷ + ρ⁺` with its SU(3) data.
#[derive(Debug, Clone)]
pub struct G2Data {
    pub convention: Convention,
    pub phi: KForm,
    pub psi: KForm,
    pub omega: KForm,
    pub rho_plus: KForm,
    pub rho_minus: KForm,
    /// `J e_i = Σ_j ω_{ij} e_j`, so `ω_{ij} = ⟨J e_i, e_j⟩`.
    pub j: Mat6,
    /// `vol_φ = orientation · e¹²³⁴⁵⁶⁷`.
    pub orientation: f64,
    phi_d: DenseForm,
    psi_d: DenseForm,
    rho_plus_d: DenseForm,
}

pub fn canonical_g2(convention: Convention) -> G2Data {
    let (omega, rho_plus) = match convention {
        Convention::Section4 => (
            KForm::from_labels(6, 2, &[(1.0, &[1, 2]), (1.0, &[3, 4]), (1.0, &[5, 6])]),
            KForm::from_labels(
                6,
                3,
                &[(1.0, &[1, 3, 5]), (-1.0, &[1, 4, 6]), (-1.0, &[2, 4, 5]), (-1.0, &[2, 3, 6])],
            ),
        ),
        Convention::Example => (
            KForm::from_labels(6, 2, &[(1.0, &[1, 4]), (1.0, &[2, 5]), (1.0, &[3, 6])]),
            KForm::from_labels(
                6,
                3,
                &[(1.0, &[1, 2, 3]), (-1.0, &[1, 5, 6]), (1.0, &[2, 4, 6]), (-1.0, &[3, 4, 5])],
            ),
        ),
    };
    G2Data::from_su3(convention, omega, rho_plus)
}

pub fn canonical_g2_named(name: &str) -> Result<G2Data> {
    Ok(canonical_g2(name.parse()?))
}

impl G2Data {
    pub fn from_su3(convention: Convention, omega: KForm, rho_plus: KForm) -> Self {
        let j = Mat6::from_fn(|r, c| omega.get(&[c, r]));
        let rho_minus = rho_plus
            .pullback(&DMatrix::from_column_slice(6, 6, j.as_slice()))
            .expect("J is invertible");
        let e7 = KForm::monomial(7, &[6]);
        let phi = omega.lift(7).wedge(&e7).unwrap() + rho_plus.lift(7);
        // 6 g(e₁,e₁) vol_φ = (e₁⌟φ)∧(e₁⌟φ)∧φ
        let e1phi = phi.interior(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let top = e1phi.wedge(&e1phi).unwrap().wedge(&phi).unwrap().coeffs()[0];
        let orientation = top.signum();
        let psi = phi.hodge_star().scale(orientation);
        G2Data {
            orientation,
            convention,
            phi_d: DenseForm::new(&phi),
            psi_d: DenseForm::new(&psi),
            rho_plus_d: DenseForm::new(&rho_plus),
            phi,
            psi,
            omega,
            rho_plus,
            rho_minus,
            j,
        }
    }

    pub fn phi_dense(&self) -> &DenseForm {
        &self.phi_d
    }

    pub fn psi_dense(&self) -> &DenseForm {
        &self.psi_d
    }

    pub fn rho_plus_dense(&self) -> &DenseForm {
        &self.rho_plus_d
    }

    /// Hodge star of the metric and orientation induced by φ.
    pub fn star(&self, alpha: &KForm) -> KForm {
        alpha.hodge_star().scale(self.orientation)
    }

    /// `J` extended to ℝ⁷ by zero on e₇.
    pub fn j7(&self) -> Mat7 {
        let mut m = Mat7::zeros();
        m.fixed_view_mut::<6, 6>(0, 0).copy_from(&self.j);
        m
    }

    /// `|AJ + JA^t|`, zero iff `A ∈ sp(ℝ⁶, ω)`.
    pub fn sp_residual(&self, a: &Mat6) -> f64 {
        (a * self.j + self.j * a.transpose()).norm()
    }
}

pub(crate) fn symmetry_check(h: &Mat7) -> Result<()> {
    let asym = (h - h.transpose()).amax();
    if asym > 1e-10 * (1.0 + h.amax()) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// `i_φ(h)_{ijk} = h_i^m φ_{mjk} + h_j^m φ_{imk} + h_k^m φ_{ijm}`.
pub fn i_phi(h: &Mat7, g2: &G2Data) -> Result<KForm> {
    symmetry_check(h)?;
    Ok(-g2.phi.theta(&to_dmatrix(h)))
}

/// `i_ψ(h)_{ijkl} = h_i^m ψ_{mjkl} + … + h_l^m ψ_{ijkm}`.
pub fn i_psi(h: &Mat7, g2: &G2Data) -> Result<KForm> {
    symmetry_check(h)?;
    Ok(-g2.psi.theta(&to_dmatrix(h)))
}

pub fn trace_free(h: &Mat7) -> Mat7 {
    h - Mat7::identity() * (h.trace() / 7.0)
}

/// `X^♭ ∧ φ`.
pub fn vector_wedge_phi(x: &Vec7, g2: &G2Data) -> KForm {
    let xf = KForm::from_coeffs(7, 1, x.iter().copied().collect()).unwrap();
    xf.wedge(&g2.phi).unwrap()
}

/// Type components of a 4-form: `Ξ = aψ + X^♭∧φ + ∗i_φ(s)` with `s` traceless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourFormComponents {
    pub a: f64,
    #[serde(rename = "X", with = "crate::io::vector")]
    pub x: Vec7,
    #[serde(with = "crate::io::matrix")]
    pub s: Mat7,
}

impl FourFormComponents {
    pub fn zero() -> Self {
        FourFormComponents { a: 0.0, x: Vec7::zeros(), s: Mat7::zeros() }
    }

    pub fn reconstruct(&self, g2: &G2Data) -> KForm {
        let s27 = g2.star(&i_phi(&self.s, g2).expect("symmetric"));
        g2.psi.scale(self.a) + vector_wedge_phi(&self.x, g2) + s27
    }

    pub fn max_diff(&self, other: &FourFormComponents) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.x - other.x).amax())
            .max((self.s - other.s).amax())
    }
}

pub fn decompose_4form(xi: &KForm, g2: &G2Data) -> Result<FourFormComponents> {
    if xi.dim() != DIM {
        return Err(Error::DimensionMismatch(xi.dim(), DIM));
    }
    if xi.degree() != 4 {
        return Err(Error::DegreeMismatch(xi.degree(), 4));
    }
    let a = xi.inner(&g2.psi)? / 7.0;
    let x = Vec7::from_fn(|m, _| {
        xi.inner(&vector_wedge_phi(&Vec7::ith(m, 1.0), g2)).unwrap() / 4.0
    });
    // the Ω⁴₂₇ remainder is ∗i_φ(s); for traceless s, i_φ(s)_{ijk} φ_{ljk} = 4 s_{il}
    let rest = xi - &(g2.psi.scale(a) + vector_wedge_phi(&x, g2));
    let gamma = DenseForm::new(&g2.star(&rest));
    let phi = g2.phi_dense();
    let mut s = Mat7::from_fn(|i, l| {
        let mut acc = 0.0;
        for j in 0..DIM {
            for k in 0..DIM {
                acc += gamma.at3(i, j, k) * phi.at3(l, j, k);
            }
        }
        acc / 4.0
    });
    s = (s + s.transpose()) * 0.5;
    Ok(FourFormComponents { a, x, s })
}

/// `(h∘k)_{ab} = φ_{amn} φ_{bpq} h^{mp} k^{nq}`.
pub fn circ(h: &Mat7, k: &Mat7, g2: &G2Data) -> Mat7 {
    let phi = g2.phi_dense();
    // u[a][p][n] = Σ_m φ_{amn} h_{mp}
    let mut u = [[[0.0; DIM]; DIM]; DIM];
    for a in 0..DIM {
        for m in 0..DIM {
            for n in 0..DIM {
                let f = phi.at3(a, m, n);
                if f == 0.0 {
                    continue;
                }
                for p in 0..DIM {
                    u[a][p][n] += f * h[(m, p)];
                }
            }
        }
    }
    Mat7::from_fn(|a, b| {
        let mut acc = 0.0;
        for p in 0..DIM {
            for q in 0..DIM {
                let f = phi.at3(b, p, q);
                if f == 0.0 {
                    continue;
                }
                for n in 0..DIM {
                    acc += u[a][p][n] * f * k[(n, q)];
                }
            }
        }
        acc
    })
}

/// `(S∘₆K)_{ab} = S_{mn} K_{pq} ρ⁺_{mpa} ρ⁺_{nqb}`.
pub fn circ6(s: &Mat6, k: &Mat6, g2: &G2Data) -> Mat6 {
    let rho = g2.rho_plus_dense();
    Mat6::from_fn(|a, b| {
        let mut acc = 0.0;
        for m in 0..6 {
            for p in 0..6 {
                let r1 = rho.at3(m, p, a);
                if r1 == 0.0 {
                    continue;
                }
                for n in 0..6 {
                    for q in 0..6 {
                        let r2 = rho.at3(n, q, b);
                        if r2 != 0.0 {
                            acc += s[(m, n)] * k[(p, q)] * r1 * r2;
                        }
                    }
                }
            }
        }
        acc
    })
}

/// Torsion forms of a coclosed structure with full torsion `T = (τ₀/4)g − τ₂₇`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionPackage {
    pub tau0: f64,
    pub tau1: [f64; 7],
    pub tau2: Vec<f64>,
    #[serde(with = "crate::io::matrix")]
    pub tau27: Mat7,
    #[serde(rename = "T", with = "crate::io::matrix")]
    pub t: Mat7,
}

impl TorsionPackage {
    pub fn from_full_torsion(t: &Mat7) -> Result<Self> {
        symmetry_check(t)?;
        let tau0 = 4.0 * t.trace() / 7.0;
        Ok(TorsionPackage {
            tau0,
            tau1: [0.0; 7],
            tau2: vec![0.0; 21],
            tau27: Mat7::identity() * (tau0 / 4.0) - t,
            t: *t,
        })
    }

    /// `τ₃ = i_φ(τ₂₇)`.
    pub fn tau3(&self, g2: &G2Data) -> KForm {
        i_phi(&self.tau27, g2).expect("symmetric")
    }
}

/// Full torsion from `∇_i φ_{jkl} = T_i^m ψ_{mjkl}`, read off as
/// `T_{im} = ⟨∇_{e_i}φ, e_m⌟ψ⟩ / 4`.
pub fn torsion_from_connection(conn: &ConnectionCoefficients, g2: &G2Data) -> Mat7 {
    let contractions: Vec<KForm> = (0..DIM)
        .map(|m| g2.psi.interior(Vec7::ith(m, 1.0).as_slice()).unwrap())
        .collect();
    let mut t = Mat7::zeros();
    for i in 0..DIM {
        let nphi = conn.covariant_form(i, &g2.phi);
        for m in 0..DIM {
            t[(i, m)] = nphi.inner(&contractions[m]).unwrap() / 4.0;
        }
    }
    t
}

/// `Ric = −Curl T − T² + (tr T)T` and `R = (tr T)² − |T|²`.
pub fn ricci_from_torsion(t: &Mat7, curl_t: &Mat7) -> (Mat7, f64) {
    let tr = t.trace();
    let ric = -curl_t - t * t + t * tr;
    (ric, tr * tr - t.norm_squared())
}

/// `i_φ(Curl T) − (3/7)|T|²φ + (tr T)τ₃ + i_φ(T²)`, zero iff the metric is Einstein.
pub fn einstein_defect(t: &Mat7, curl_t: &Mat7, g2: &G2Data) -> Result<KForm> {
    let pkg = TorsionPackage::from_full_torsion(t)?;
    let curl_sym = (curl_t + curl_t.transpose()) * 0.5;
    Ok(i_phi(&curl_sym, g2)? - g2.phi.scale(3.0 / 7.0 * t.norm_squared())
        + pkg.tau3(g2).scale(t.trace())
        + i_phi(&(t * t), g2)?)
}

/// Type components of `Δ_ψψ` for coclosed ψ:
/// `a = (2/7)((tr T)² + |T|²)`, `X = div T`,
/// `s = Ric − ½T∘T − (tr T)T + (1/14)((tr T)² + |T|²)g`.
pub fn laplacian_closed_form(t: &Mat7, curl_t: &Mat7, div_t: &Vec7, g2: &G2Data) -> FourFormComponents {
    let tr = t.trace();
    let n2 = t.norm_squared();
    let (ric, _) = ricci_from_torsion(t, curl_t);
    let s = ric - circ(t, t, g2) * 0.5 - t * tr + Mat7::identity() * ((tr * tr + n2) / 14.0);
    FourFormComponents { a: 2.0 / 7.0 * (tr * tr + n2), x: *div_t, s: (s + s.transpose()) * 0.5 }
}

/// Type components of `L_Xψ`:
/// `a = (4/7) div X`, `W = −½ Curl X − X⌟T`, `h = (1/7)(div X)g − ½ L_Xg`,
/// with T normalized by `∇_iφ_{jkl} = T_i^m ψ_{mjkl}`.
pub fn lie_derivative_psi_decomposition(
    x: &Vec7,
    conn: &ConnectionCoefficients,
    t: &Mat7,
    g2: &G2Data,
) -> FourFormComponents {
    lie_derivative_psi_from_gradient(&conn.vector_gradient(x), x, t, g2)
}

/// Same as [`lie_derivative_psi_decomposition`] from the gradient
/// `M_{ab} = ∇_a X_b` and the value of X at the point.
pub fn lie_derivative_psi_from_gradient(m: &Mat7, x: &Vec7, t: &Mat7, g2: &G2Data) -> FourFormComponents {
    let div = m.trace();
    let lxg = m + m.transpose();
    FourFormComponents {
        a: 4.0 / 7.0 * div,
        x: -curl_of_gradient(m, &g2.phi) * 0.5 - t.transpose() * x,
        s: Mat7::identity() * (div / 7.0) - lxg * 0.5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub is_symmetry: bool,
    pub killing_residual: f64,
    pub curl_residual: f64,
}

/// X preserves ψ iff it is Killing and `Curl X = −2 X⌟T`.
pub fn infinitesimal_symmetry_check(
    x: &Vec7,
    conn: &ConnectionCoefficients,
    t: &Mat7,
    g2: &G2Data,
    tol: f64,
) -> SymmetryCheck {
    let killing_residual = conn.lie_derivative_metric(x).amax();
    let curl_residual = (conn.curl_vector(x, &g2.phi) + t.transpose() * x * 2.0).amax();
    SymmetryCheck {
        is_symmetry: killing_residual < tol && curl_residual < tol,
        killing_residual,
        curl_residual,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub convention: Convention,
    pub identities: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.identities.iter().fold(0.0, |m, r| m.max(r.residual))
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Residuals of the standard G₂ and SU(3) contraction identities.
pub fn identity_suite(g2: &G2Data) -> IdentityReport {
    let n = DIM;
    let phi = g2.phi_dense();
    let psi = g2.psi_dense();
    let om = DenseForm::new(&g2.omega);
    let rp = g2.rho_plus_dense();
    let rm = DenseForm::new(&g2.rho_minus);
    let mut out = Vec::new();
    let mut push = |name: &str, r: f64| out.push(IdentityResidual { name: name.to_string(), residual: r });

    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                s += phi.at3(a, b, c).powi(2);
            }
        }
    }
    push("phi_abc phi_abc = 42", (s - 42.0).abs());

    let mut r = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += phi.at3(a, b, j) * phi.at3(a, b, k);
                }
            }
            r = r.max((s - 6.0 * delta(j, k)).abs());
        }
    }
    push("phi_abj phi_abk = 6 g_jk", r);

    let mut r = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s: f64 = (0..n).map(|a| phi.at3(a, p, q) * phi.at3(a, j, k)).sum();
                    let rhs = delta(p, j) * delta(q, k) - delta(p, k) * delta(q, j) + psi.at4(p, q, j, k);
                    r = r.max((s - rhs).abs());
                }
            }
        }
    }
    push("phi_apq phi_ajk = g_pj g_qk - g_pk g_qj + psi_pqjk", r);

    let mut r = 0.0f64;
    for a in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += phi.at3(i, j, k) * psi.at4(a, i, j, k);
                }
            }
        }
        r = r.max(s.abs());
    }
    push("phi_ijk psi_aijk = 0", r);

    let mut r = 0.0f64;
    for q in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += phi.at3(i, j, q) * psi.at4(i, j, k, l);
                    }
                }
                r = r.max((s - 4.0 * phi.at3(q, k, l)).abs());
            }
        }
    }
    push("phi_ijq psi_ijkl = 4 phi_qkl", r);

    let mut r = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s: f64 = (0..n).map(|i| phi.at3(i, p, q) * psi.at4(i, j, k, l)).sum();
                        let rhs = delta(p, j) * phi.at3(q, k, l) - delta(j, q) * phi.at3(p, k, l)
                            + delta(p, k) * phi.at3(j, q, l)
                            - delta(k, q) * phi.at3(j, p, l)
                            + delta(p, l) * phi.at3(j, k, q)
                            - delta(l, q) * phi.at3(j, k, p);
                        r = r.max((s - rhs).abs());
                    }
                }
            }
        }
    }
    push("phi_ipq psi_ijkl = g_pj phi_qkl - ... (six terms)", r);

    let mut r = 0.0f64;
    for c in 0..n {
        for d in 0..n {
            for m in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            s += psi.at4(a, b, c, d) * psi.at4(a, b, m, k);
                        }
                    }
                    let rhs = 4.0 * (delta(c, m) * delta(d, k) - delta(c, k) * delta(d, m)) + 2.0 * psi.at4(c, d, m, k);
                    r = r.max((s - rhs).abs());
                }
            }
        }
    }
    push("psi_abcd psi_abmn = 4 g_cm g_dn - 4 g_cn g_dm + 2 psi_cdmn", r);

    let mut r = 0.0f64;
    let mut total = 0.0;
    for a in 0..n {
        for m in 0..n {
            let mut s = 0.0;
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        s += psi.at4(a, b, c, d) * psi.at4(m, b, c, d);
                    }
                }
            }
            if a == m {
                total += s;
            }
            r = r.max((s - 24.0 * delta(a, m)).abs());
        }
    }
    push("psi_abcd psi_mbcd = 24 g_am", r);
    push("psi_abcd psi_abcd = 168", (total - 168.0).abs());

    let six = 6;
    let mut r = 0.0f64;
    for i in 0..six {
        for j in 0..six {
            let s: f64 = (0..six).map(|p| om.at2(i, p) * om.at2(p, j)).sum();
            r = r.max((s + delta(i, j)).abs());
        }
    }
    push("omega_ip omega_pj = -delta_ij", r);

    let mut r = 0.0f64;
    for i in 0..six {
        let mut s = 0.0;
        for a in 0..six {
            for b in 0..six {
                s += rp.at3(i, a, b) * om.at2(a, b);
            }
        }
        r = r.max(s.abs());
    }
    push("rho+_iab omega_ab = 0", r);

    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for i in 0..six {
        for j in 0..six {
            for k in 0..six {
                let s1: f64 = (0..six).map(|p| rp.at3(i, j, p) * om.at2(p, k)).sum();
                let s2: f64 = (0..six).map(|p| rm.at3(i, j, p) * om.at2(p, k)).sum();
                r1 = r1.max((s1 - rm.at3(i, j, k)).abs());
                r2 = r2.max((s2 + rp.at3(i, j, k)).abs());
            }
        }
    }
    push("rho+_ijp omega_pk = rho-_ijk", r1);
    push("rho-_ijp omega_pk = -rho+_ijk", r2);

    let (mut r1, mut r2, mut r3) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..six {
        for j in 0..six {
            let (mut pm, mut pp, mut mm) = (0.0, 0.0, 0.0);
            for p in 0..six {
                for q in 0..six {
                    pm += rp.at3(i, p, q) * rm.at3(j, p, q);
                    pp += rp.at3(i, p, q) * rp.at3(j, p, q);
                    mm += rm.at3(i, p, q) * rm.at3(j, p, q);
                }
            }
            r1 = r1.max((pm - 4.0 * om.at2(i, j)).abs());
            r2 = r2.max((pp - 4.0 * delta(i, j)).abs());
            r3 = r3.max((mm - 4.0 * delta(i, j)).abs());
        }
    }
    push("rho+_ipq rho-_jpq = 4 omega_ij", r1);
    push("rho+_ipq rho+_jpq = 4 delta_ij", r2);
    push("rho-_ipq rho-_jpq = 4 delta_ij", r3);

    let (mut r1, mut r2, mut r3) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..six {
        for j in 0..six {
            for k in 0..six {
                for l in 0..six {
                    let (mut mp, mut pp, mut mm) = (0.0, 0.0, 0.0);
                    for p in 0..six {
                        mp += rm.at3(i, j, p) * rp.at3(k, l, p);
                        pp += rp.at3(i, j, p) * rp.at3(k, l, p);
                        mm += rm.at3(i, j, p) * rm.at3(k, l, p);
                    }
                    let w = |a, b| om.at2(a, b);
                    let rhs_mp = -w(i, k) * delta(j, l) + w(j, k) * delta(i, l) + w(i, l) * delta(j, k)
                        - w(j, l) * delta(i, k);
                    let rhs_pp = -w(i, k) * w(j, l) + w(i, l) * w(j, k) + delta(i, k) * delta(j, l)
                        - delta(j, k) * delta(i, l);
                    r1 = r1.max((mp - rhs_mp).abs());
                    r2 = r2.max((pp - rhs_pp).abs());
                    r3 = r3.max((mm - rhs_pp).abs());
                }
            }
        }
    }
    push("rho-_ijp rho+_klp = -omega_ik d_jl + omega_jk d_il + omega_il d_jk - omega_jl d_ik", r1);
    push("rho+_ijp rho+_klp = -omega_ik omega_jl + omega_il omega_jk + d_ik d_jl - d_jk d_il", r2);
    push("rho-_ijp rho-_klp = rho+_ijp rho+_klp", r3);

    IdentityReport { convention: g2.convention, identities: out }
}

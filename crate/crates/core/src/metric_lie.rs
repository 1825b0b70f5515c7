//! Invariant Riemannian geometry of a metric Lie algebra with orthonormal
//! basis e₁…e₇: Chevalley–Eilenberg differential, codifferential, Hodge
//! Laplacian, Levi-Civita connection via the Koszul formula, curvature and
//! covariant derivatives of left-invariant tensors.
//!
//! Everything here works from raw structure constants, so it serves as the
//! independent check on the closed-form almost Abelian formulas.

use nalgebra::{DMatrix, Matrix6, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::KForm;

pub const DIM: usize = 7;

pub type Mat6 = Matrix6<f64>;
pub type Mat7 = SMatrix<f64, 7, 7>;
pub type Vec7 = SVector<f64, 7>;

pub type Tensor3 = [[[f64; DIM]; DIM]; DIM];
pub type Tensor4 = [[[[f64; DIM]; DIM]; DIM]; DIM];

pub(crate) fn zero3() -> Tensor3 {
    [[[0.0; DIM]; DIM]; DIM]
}

pub(crate) fn zero4() -> Tensor4 {
    [[[[0.0; DIM]; DIM]; DIM]; DIM]
}

pub fn max_abs3(t: &Tensor3) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn to_dmatrix<const R: usize>(m: &SMatrix<f64, R, R>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, R, m.as_slice())
}

/// `A = ad(e₇)|_h` on the Abelian ideal `h = span(e₁…e₆)`: the only nonzero
/// brackets are `[e₇, e_i] = A e_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BracketJson", into = "BracketJson")]
pub struct BracketMatrix(pub Mat6);

#[derive(Serialize, Deserialize)]
struct BracketJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
}

impl TryFrom<BracketJson> for BracketMatrix {
    type Error = Error;
    fn try_from(j: BracketJson) -> Result<Self> {
        if j.a.len() != 6 || j.a.iter().any(|r| r.len() != 6) {
            return Err(Error::InvalidForm("bracket matrix must be 6x6".into()));
        }
        Ok(BracketMatrix(Mat6::from_fn(|i, k| j.a[i][k])))
    }
}

impl From<BracketMatrix> for BracketJson {
    fn from(b: BracketMatrix) -> Self {
        BracketJson { a: (0..6).map(|i| (0..6).map(|k| b.0[(i, k)]).collect()).collect() }
    }
}

impl BracketMatrix {
    pub fn new(a: Mat6) -> Self {
        BracketMatrix(a)
    }

    pub fn zero() -> Self {
        BracketMatrix(Mat6::zeros())
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    pub fn structure_constants(&self) -> StructureConstants {
        let mut c = zero3();
        for i in 0..6 {
            for j in 0..6 {
                c[6][i][j] = self.0[(j, i)];
                c[i][6][j] = -self.0[(j, i)];
            }
        }
        StructureConstants { c }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bracket serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Structure constants `[e_a, e_b] = Σ_k c[a][b][k] e_k` of a 7-dimensional
/// Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    pub c: Tensor3,
}

impl StructureConstants {
    pub fn bracket(&self, x: &Vec7, y: &Vec7) -> Vec7 {
        let mut out = Vec7::zeros();
        for a in 0..DIM {
            for b in 0..DIM {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..DIM {
                    out[k] += xy * self.c[a][b][k];
                }
            }
        }
        out
    }

    /// `ad_x` as a matrix.
    pub fn ad(&self, x: &Vec7) -> Mat7 {
        Mat7::from_fn(|k, b| (0..DIM).map(|a| x[a] * self.c[a][b][k]).sum())
    }

    /// Bracket transported by `h`: `[x, y]' = h[h⁻¹x, h⁻¹y]`, making `h` a Lie
    /// algebra isomorphism onto the new structure.
    pub fn transport(&self, h: &Mat7) -> Result<StructureConstants> {
        let hinv = h.try_inverse().ok_or(Error::Singular)?;
        let mut c = zero3();
        for a in 0..DIM {
            for b in 0..DIM {
                let v = h * self.bracket(&hinv.column(a).into(), &hinv.column(b).into());
                for k in 0..DIM {
                    c[a][b][k] = v[k];
                }
            }
        }
        Ok(StructureConstants { c })
    }

    /// Residual of `D[x,y] = [Dx,y] + [x,Dy]` over basis pairs.
    pub fn derivation_residual(&self, d: &Mat7) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..DIM {
            for b in 0..DIM {
                let ea = Vec7::ith(a, 1.0);
                let eb = Vec7::ith(b, 1.0);
                let lhs = d * self.bracket(&ea, &eb);
                let rhs = self.bracket(&(d * ea), &eb) + self.bracket(&ea, &(d * eb));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    pub fn jacobi_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    let (x, y, z) = (Vec7::ith(a, 1.0), Vec7::ith(b, 1.0), Vec7::ith(c, 1.0));
                    let s = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }
}

/// Chevalley–Eilenberg differential
/// `dα(x₀…x_k) = Σ_{i<j} (−1)^{i+j} α([x_i,x_j], x₀,…,x̂_i,…,x̂_j,…,x_k)`.
pub fn ce_differential(sc: &StructureConstants, alpha: &KForm) -> KForm {
    assert_eq!(alpha.dim(), DIM, "CE differential acts on forms over ℝ⁷");
    let k = alpha.degree();
    if k == DIM {
        return KForm::zero(DIM, DIM);
    }
    let mut out = KForm::zero(DIM, k + 1);
    let mut rest = vec![0usize; k];
    for r in 0..out.coeffs().len() {
        let idx = out.multi_index(r);
        let mut acc = 0.0;
        for p in 0..=k {
            for q in p + 1..=k {
                let mut w = 1;
                for (s, &i) in idx.iter().enumerate() {
                    if s != p && s != q {
                        rest[w] = i;
                        w += 1;
                    }
                }
                let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                for (m, &cm) in sc.c[idx[p]][idx[q]].iter().enumerate() {
                    if cm == 0.0 {
                        continue;
                    }
                    if k == 0 {
                        continue;
                    }
                    rest[0] = m;
                    acc += sign * cm * alpha.get(&rest);
                }
            }
        }
        out.coeffs_mut()[r] = acc;
    }
    out
}

/// `d* = (−1)^k ∗ d ∗` on k-forms in dimension 7.
pub fn codifferential(sc: &StructureConstants, alpha: &KForm) -> KForm {
    let k = alpha.degree();
    if k == 0 {
        return KForm::zero(DIM, 0);
    }
    let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    ce_differential(sc, &alpha.hodge_star()).hodge_star().scale(s)
}

/// `Δ = d d* + d* d`.
pub fn hodge_laplacian(sc: &StructureConstants, alpha: &KForm) -> KForm {
    let k = alpha.degree();
    let mut out = KForm::zero(DIM, k);
    if k > 0 {
        out += &ce_differential(sc, &codifferential(sc, alpha));
    }
    if k < DIM {
        out += &codifferential(sc, &ce_differential(sc, alpha));
    }
    out
}

/// Christoffel symbols `gamma[i][j][k] = ⟨∇_{e_i} e_j, e_k⟩` in the orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    pub gamma: Tensor3,
}

/// Levi-Civita connection from `2⟨∇_x y, z⟩ = ⟨[x,y],z⟩ − ⟨[y,z],x⟩ + ⟨[z,x],y⟩`.
pub fn koszul_connection(sc: &StructureConstants) -> ConnectionCoefficients {
    let c = &sc.c;
    let mut gamma = zero3();
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                gamma[i][j][k] = 0.5 * (c[i][j][k] - c[j][k][i] + c[k][i][j]);
            }
        }
    }
    ConnectionCoefficients { gamma }
}

impl ConnectionCoefficients {
    /// Matrix of the endomorphism `∇_{e_i}` (column j holds `∇_{e_i} e_j`).
    pub fn nabla(&self, i: usize) -> Mat7 {
        Mat7::from_fn(|p, j| self.gamma[i][j][p])
    }

    /// `max |Γ_{ij}^k + Γ_{ik}^j|`.
    pub fn metric_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    worst = worst.max((self.gamma[i][j][k] + self.gamma[i][k][j]).abs());
                }
            }
        }
        worst
    }

    /// `max |Γ_{ij}^k − Γ_{ji}^k − c_{ij}^k|`.
    pub fn torsion_residual(&self, sc: &StructureConstants) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let t = self.gamma[i][j][k] - self.gamma[j][i][k] - sc.c[i][j][k];
                    worst = worst.max(t.abs());
                }
            }
        }
        worst
    }

    /// Covariant derivative of a left-invariant k-form in direction `e_i`.
    pub fn covariant_form(&self, i: usize, alpha: &KForm) -> KForm {
        alpha.theta(&crate::metric_lie::to_dmatrix(&self.nabla(i)))
    }

    /// `(∇T)[i][j][k] = (∇_{e_i} T)_{jk}` for a left-invariant (0,2)-tensor.
    pub fn covariant_derivative_tensor(&self, t: &Mat7) -> Tensor3 {
        let mut out = zero3();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut acc = 0.0;
                    for p in 0..DIM {
                        acc -= self.gamma[i][j][p] * t[(p, k)] + self.gamma[i][k][p] * t[(j, p)];
                    }
                    out[i][j][k] = acc;
                }
            }
        }
        out
    }

    /// `M_{ab} = ⟨∇_{e_a} X, e_b⟩` for a left-invariant vector field X.
    pub fn vector_gradient(&self, x: &Vec7) -> Mat7 {
        Mat7::from_fn(|a, b| (0..DIM).map(|j| x[j] * self.gamma[a][j][b]).sum())
    }

    /// `(L_X g)_{ij} = ⟨∇_{e_i}X, e_j⟩ + ⟨∇_{e_j}X, e_i⟩`.
    pub fn lie_derivative_metric(&self, x: &Vec7) -> Mat7 {
        let m = self.vector_gradient(x);
        m + m.transpose()
    }

    pub fn divergence(&self, x: &Vec7) -> f64 {
        self.vector_gradient(x).trace()
    }

    /// `(Curl X)_c = ∇_a X_b φ_{abc}`.
    pub fn curl_vector(&self, x: &Vec7, phi: &KForm) -> Vec7 {
        curl_of_gradient(&self.vector_gradient(x), phi)
    }
}

/// `(Curl X)_c = M_{ab} φ_{abc}` for a gradient matrix `M_{ab} = ∇_a X_b`.
pub fn curl_of_gradient(m: &Mat7, phi: &KForm) -> Vec7 {
    let mut out = Vec7::zeros();
    for a in 0..DIM {
        for b in 0..DIM {
            if m[(a, b)] == 0.0 {
                continue;
            }
            for c in 0..DIM {
                out[c] += m[(a, b)] * phi.get(&[a, b, c]);
            }
        }
    }
    out
}

/// `(div T)_a = ∇_b T_{ab}`.
pub fn div_tensor(nabla_t: &Tensor3) -> Vec7 {
    Vec7::from_fn(|a, _| (0..DIM).map(|b| nabla_t[b][a][b]).sum())
}

/// `(Curl T)_{ab} = ∇_m T_{an} φ_{bmn}`.
pub fn curl_tensor(nabla_t: &Tensor3, phi: &KForm) -> Mat7 {
    Mat7::from_fn(|a, b| {
        let mut acc = 0.0;
        for m in 0..DIM {
            for n in 0..DIM {
                let v = nabla_t[m][a][n];
                if v != 0.0 {
                    acc += v * phi.get(&[b, m, n]);
                }
            }
        }
        acc
    })
}

/// `(grad tr T)_a = ∇_a T_{bb}`.
pub fn grad_trace(nabla_t: &Tensor3) -> Vec7 {
    Vec7::from_fn(|a, _| (0..DIM).map(|b| nabla_t[a][b][b]).sum())
}

/// Riemann tensor `r[i][j][k][m] = ⟨R(e_i,e_j)e_k, e_m⟩` with
/// `R(x,y)z = ∇_x∇_y z − ∇_y∇_x z − ∇_{[x,y]} z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    pub r: Tensor4,
}

pub fn curvature(sc: &StructureConstants, conn: &ConnectionCoefficients) -> CurvatureTensor {
    let g = &conn.gamma;
    let mut r = zero4();
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for m in 0..DIM {
                    let mut acc = 0.0;
                    for p in 0..DIM {
                        acc += g[j][k][p] * g[i][p][m] - g[i][k][p] * g[j][p][m] - sc.c[i][j][p] * g[p][k][m];
                    }
                    r[i][j][k][m] = acc;
                }
            }
        }
    }
    CurvatureTensor { r }
}

impl CurvatureTensor {
    /// `R_{jk} = R_{ljkl}`.
    pub fn ricci(&self) -> Mat7 {
        Mat7::from_fn(|j, k| (0..DIM).map(|l| self.r[l][j][k][l]).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    /// `max |R_{abmn} + R_{amnb} + R_{anbm}|`.
    pub fn bianchi_residual(&self) -> f64 {
        let r = &self.r;
        let mut worst = 0.0f64;
        for a in 0..DIM {
            for b in 0..DIM {
                for m in 0..DIM {
                    for n in 0..DIM {
                        worst = worst.max((r[a][b][m][n] + r[a][m][n][b] + r[a][n][b][m]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Antisymmetry residual in the first and in the last index pair.
    pub fn antisymmetry_residual(&self) -> f64 {
        let r = &self.r;
        let mut worst = 0.0f64;
        for a in 0..DIM {
            for b in 0..DIM {
                for m in 0..DIM {
                    for n in 0..DIM {
                        worst = worst
                            .max((r[a][b][m][n] + r[b][a][m][n]).abs())
                            .max((r[a][b][m][n] + r[a][b][n][m]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Divergence of a left-invariant X from the volume change of its flow:
/// central difference of `t ↦ det Ad(exp(−tX)) = det exp(−t ad_X)`.
pub fn divergence_finite_difference(sc: &StructureConstants, x: &Vec7, t: f64) -> f64 {
    let ad = sc.ad(x);
    let fwd = (ad * (-t)).exp().determinant();
    let bwd = (ad * t).exp().determinant();
    (fwd - bwd) / (2.0 * t)
}

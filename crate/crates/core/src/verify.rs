//! Residual batteries comparing closed forms against the independent
//! oracles (CE complex, Koszul connection), per sample and as seeded sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::almost_abelian::{full_torsion, q_matrix_unchecked, torsion_forms};
use crate::g2core::{
    decompose_4form, einstein_defect, i_phi, identity_suite, laplacian_closed_form,
    lie_derivative_psi_decomposition, ricci_from_torsion, torsion_from_connection, trace_free, G2Data,
    IdentityReport,
};
use crate::metric_lie::{
    ce_differential, codifferential, curl_tensor, curvature, div_tensor, grad_trace, hodge_laplacian,
    koszul_connection, max_abs3, to_dmatrix, BracketMatrix, Mat6, Mat7, Vec7, DIM,
};
use crate::sampling::{random_sp, random_vec7, rng};
use crate::KForm;

/// A named maximum residual over a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, residual: f64, tol: f64) -> Self {
        Check { name: name.to_string(), residual, tol, pass: residual.is_finite() && residual < tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Residuals of the torsion-level identities for one bracket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleResiduals {
    pub d_psi: f64,
    pub laplacian_symbol: f64,
    pub torsion_routes: f64,
    pub nabla_phi_fit: f64,
    pub div_t: f64,
    pub grad_tr_t: f64,
    pub curl_t_symmetry: f64,
    pub ricci_block: f64,
    pub ricci_from_torsion: f64,
    pub scalar_from_torsion: f64,
    pub g2_bianchi: f64,
    pub einstein_defect: f64,
    pub laplacian_lemma: f64,
    pub lie_derivative: f64,
}

impl SampleResiduals {
    pub fn max(self, o: SampleResiduals) -> SampleResiduals {
        SampleResiduals {
            d_psi: self.d_psi.max(o.d_psi),
            laplacian_symbol: self.laplacian_symbol.max(o.laplacian_symbol),
            torsion_routes: self.torsion_routes.max(o.torsion_routes),
            nabla_phi_fit: self.nabla_phi_fit.max(o.nabla_phi_fit),
            div_t: self.div_t.max(o.div_t),
            grad_tr_t: self.grad_tr_t.max(o.grad_tr_t),
            curl_t_symmetry: self.curl_t_symmetry.max(o.curl_t_symmetry),
            ricci_block: self.ricci_block.max(o.ricci_block),
            ricci_from_torsion: self.ricci_from_torsion.max(o.ricci_from_torsion),
            scalar_from_torsion: self.scalar_from_torsion.max(o.scalar_from_torsion),
            g2_bianchi: self.g2_bianchi.max(o.g2_bianchi),
            einstein_defect: self.einstein_defect.max(o.einstein_defect),
            laplacian_lemma: self.laplacian_lemma.max(o.laplacian_lemma),
            lie_derivative: self.lie_derivative.max(o.lie_derivative),
        }
    }
}

/// `max |∇_iT_{jk} − ∇_jT_{ik} − (½R_{ijnm} − T_{im}T_{jn})φ_{kmn}|`.
///
/// With `R_{ijkm} = ⟨R(e_i,e_j)e_k, e_m⟩` (the ordering whose contraction
/// `R_{ljkl}` is the Ricci tensor) the curvature term carries its last pair
/// swapped.
pub fn g2_bianchi_residual(
    nabla_t: &crate::metric_lie::Tensor3,
    r: &crate::metric_lie::CurvatureTensor,
    t: &Mat7,
    g2: &G2Data,
) -> f64 {
    let phi = g2.phi_dense();
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let mut rhs = 0.0;
                for m in 0..DIM {
                    for n in 0..DIM {
                        let f = phi.at3(k, m, n);
                        if f != 0.0 {
                            rhs += (0.5 * r.r[i][j][n][m] - t[(i, m)] * t[(j, n)]) * f;
                        }
                    }
                }
                worst = worst.max((nabla_t[i][j][k] - nabla_t[j][i][k] - rhs).abs());
            }
        }
    }
    worst
}

/// Every torsion-level residual for bracket `a` and invariant vector `x`.
pub fn sample_residuals(a: &Mat6, x: &Vec7, g2: &G2Data) -> SampleResiduals {
    let bracket = BracketMatrix(*a);
    let sc = bracket.structure_constants();
    let conn = koszul_connection(&sc);
    let curv = curvature(&sc, &conn);
    let ric = curv.ricci();
    let t = full_torsion(a, g2);

    let d_psi = ce_differential(&sc, &g2.psi).max_abs();
    let lap = hodge_laplacian(&sc, &g2.psi);
    let q = q_matrix_unchecked(a, g2).assembled();
    let laplacian_symbol = lap.dist(&g2.psi.theta(&to_dmatrix(&q)));

    let t_nabla = torsion_from_connection(&conn, g2);
    let torsion_routes = (t_nabla - t).amax();
    let mut nabla_phi_fit = 0.0f64;
    for i in 0..DIM {
        let mut fit = KForm::zero(DIM, 3);
        for m in 0..DIM {
            fit += &g2.psi.interior(Vec7::ith(m, 1.0).as_slice()).unwrap().scale(t[(i, m)]);
        }
        nabla_phi_fit = nabla_phi_fit.max(conn.covariant_form(i, &g2.phi).dist(&fit));
    }

    let nabla_t = conn.covariant_derivative_tensor(&t);
    let div_t = div_tensor(&nabla_t);
    let grad_tr = grad_trace(&nabla_t);
    let curl_t = curl_tensor(&nabla_t, &g2.phi);
    let (ric_t, r_t) = ricci_from_torsion(&t, &curl_t);

    let s = crate::almost_abelian::sym(a);
    let block = crate::almost_abelian::block7(
        &(crate::almost_abelian::commutator(a, &a.transpose()) * 0.5),
        -(s * s).trace(),
    );

    let defect = einstein_defect(&t, &curl_t, g2).expect("symmetric torsion");
    let ric0 = trace_free(&((ric + ric.transpose()) * 0.5));
    let einstein = defect.dist(&-i_phi(&ric0, g2).expect("symmetric"));

    let lap_parts = decompose_4form(&lap, g2).expect("4-form");
    let lemma = laplacian_closed_form(&t, &curl_t, &div_t, g2);

    let x_psi = g2.psi.interior(x.as_slice()).unwrap();
    let lie = ce_differential(&sc, &x_psi);
    let lie_parts = decompose_4form(&lie, g2).expect("4-form");
    let lie_closed = lie_derivative_psi_decomposition(x, &conn, &t, g2);

    SampleResiduals {
        d_psi,
        laplacian_symbol,
        torsion_routes,
        nabla_phi_fit,
        div_t: (div_t - grad_tr).amax(),
        grad_tr_t: grad_tr.amax(),
        curl_t_symmetry: (curl_t - curl_t.transpose()).amax(),
        ricci_block: (ric - block).amax(),
        ricci_from_torsion: (ric - ric_t).amax(),
        scalar_from_torsion: (curv.scalar() - r_t).abs(),
        g2_bianchi: g2_bianchi_residual(&nabla_t, &curv, &t, g2),
        einstein_defect: einstein,
        laplacian_lemma: lap_parts.max_diff(&lemma),
        lie_derivative: lie_parts.max_diff(&lie_closed),
    }
}

fn random_inputs(seed: u64, samples: usize, g2: &G2Data) -> Vec<(Mat6, Vec7)> {
    let mut r = rng(seed);
    (0..samples).map(|_| (random_sp(&mut r, g2, 1.0), random_vec7(&mut r, 1.0))).collect()
}

/// Worst-case residuals over `samples` random `(A, X)` pairs.
pub fn sweep_residuals(g2: &G2Data, seed: u64, samples: usize) -> SampleResiduals {
    random_inputs(seed, samples, g2)
        .par_iter()
        .map(|(a, x)| sample_residuals(a, x, g2))
        .reduce(SampleResiduals::default, SampleResiduals::max)
}

pub fn appendix_suite(g2: &G2Data, tol: f64) -> (IdentityReport, SuiteReport) {
    let rep = identity_suite(g2);
    let checks = rep.identities.iter().map(|r| Check::new(&r.name, r.residual, tol)).collect();
    (rep, SuiteReport { suite: "appendix".into(), samples: 1, checks })
}

/// d² = 0 and (d*)² = 0 on random forms, and dψ = 0 ⇔ A ∈ sp.
pub fn complex_suite(g2: &G2Data, seed: u64, samples: usize, tol: f64) -> SuiteReport {
    let mut r = rng(seed);
    use rand::Rng;
    let mut d2 = 0.0f64;
    let mut dstar2 = 0.0f64;
    let mut sp_dpsi = 0.0f64;
    let mut nonsp_min = f64::INFINITY;
    let mut trace = 0.0f64;
    for _ in 0..samples {
        let a = random_sp(&mut r, g2, 1.0);
        let generic = Mat6::from_fn(|_, _| r.gen_range(-1.0..1.0));
        let k = r.gen_range(0..6usize);
        let coeffs = |r: &mut crate::sampling::SampleRng, k| {
            let n = crate::exterior::binomial(DIM, k);
            KForm::from_coeffs(DIM, k, (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
        };
        let alpha = coeffs(&mut r, k);
        let beta = coeffs(&mut r, k + 1);
        for m in [a, generic] {
            let sc = BracketMatrix(m).structure_constants();
            d2 = d2.max(ce_differential(&sc, &ce_differential(&sc, &alpha)).max_abs());
            dstar2 = dstar2.max(codifferential(&sc, &codifferential(&sc, &beta)).max_abs());
        }
        sp_dpsi = sp_dpsi.max(ce_differential(&BracketMatrix(a).structure_constants(), &g2.psi).max_abs());
        let gsc = BracketMatrix(generic).structure_constants();
        nonsp_min = nonsp_min.min(ce_differential(&gsc, &g2.psi).max_abs() / (1.0 + g2.sp_residual(&generic)));
        trace = trace.max(a.trace().abs());
    }
    SuiteReport {
        suite: "complex".into(),
        samples,
        checks: vec![
            Check::new("d(d alpha) = 0", d2, tol),
            Check::new("d*(d* alpha) = 0", dstar2, tol),
            Check::new("A in sp => d psi = 0", sp_dpsi, tol),
            Check::new("A not in sp => d psi != 0 (inverse margin)", 1.0 / nonsp_min, 1e6),
            Check::new("A in sp => tr A = 0", trace, tol),
        ],
    }
}

pub fn laplacian_suite(g2: &G2Data, seed: u64, samples: usize, tol: f64) -> SuiteReport {
    let r = sweep_residuals(g2, seed, samples);
    SuiteReport {
        suite: "laplacian".into(),
        samples,
        checks: vec![
            Check::new("theta(Q_A) psi = CE Laplacian of psi", r.laplacian_symbol, tol),
            Check::new("closed-form Laplacian = decomposition of CE Laplacian", r.laplacian_lemma, tol),
            Check::new("Lie derivative closed form = decomposition of d(X.psi)", r.lie_derivative, tol),
        ],
    }
}

pub fn torsion_suite(g2: &G2Data, seed: u64, samples: usize, tol: f64) -> SuiteReport {
    let mut r = rng(seed);
    let mats: Vec<Mat6> = (0..samples).map(|_| random_sp(&mut r, g2, 1.0)).collect();
    let (routes, fit, forms) = mats
        .par_iter()
        .map(|a| {
            let conn = koszul_connection(&BracketMatrix(*a).structure_constants());
            let t = full_torsion(a, g2);
            let tn = torsion_from_connection(&conn, g2);
            let mut fit = 0.0f64;
            for i in 0..DIM {
                let mut f = KForm::zero(DIM, 3);
                for m in 0..DIM {
                    f += &g2.psi.interior(Vec7::ith(m, 1.0).as_slice()).unwrap().scale(tn[(i, m)]);
                }
                fit = fit.max(conn.covariant_form(i, &g2.phi).dist(&f));
            }
            let pkg = torsion_forms(&BracketMatrix(*a), g2).expect("sp sample");
            let forms = (pkg.t - (Mat7::identity() * (pkg.tau0 / 4.0) - pkg.tau27)).amax().max(pkg.tau27.trace().abs());
            ((tn - t).amax(), fit, forms)
        })
        .reduce(|| (0.0, 0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)));
    SuiteReport {
        suite: "torsion".into(),
        samples,
        checks: vec![
            Check::new("closed-form T = T from nabla phi", routes, tol),
            Check::new("nabla phi = T.psi fit residual", fit, tol),
            Check::new("T = tau0/4 g - tau27, tr tau27 = 0", forms, tol),
        ],
    }
}

pub fn bianchi_suite(g2: &G2Data, seed: u64, samples: usize, tol: f64) -> SuiteReport {
    let r = sweep_residuals(g2, seed, samples);
    SuiteReport {
        suite: "bianchi".into(),
        samples,
        checks: vec![
            Check::new("div T = grad tr T", r.div_t, tol),
            Check::new("grad tr T = 0", r.grad_tr_t, tol),
            Check::new("Curl T symmetric", r.curl_t_symmetry, tol),
            Check::new("Ric = -Curl T - T^2 + (tr T) T", r.ricci_from_torsion, tol),
            Check::new("R = (tr T)^2 - |T|^2", r.scalar_from_torsion, tol),
            Check::new("Koszul Ricci = block formula", r.ricci_block, tol),
            Check::new("G2 Bianchi identity", r.g2_bianchi, tol),
            Check::new("Einstein defect = -i_phi(Ric_0)", r.einstein_defect, tol),
        ],
    }
}

/// Koszul structure on random brackets: metric, torsion-free, first Bianchi.
pub fn connection_suite(g2: &G2Data, seed: u64, samples: usize, tol: f64) -> SuiteReport {
    let mut r = rng(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..samples {
        let sc = BracketMatrix(random_sp(&mut r, g2, 1.0)).structure_constants();
        let conn = koszul_connection(&sc);
        let curv = curvature(&sc, &conn);
        worst[0] = worst[0].max(conn.metric_residual());
        worst[1] = worst[1].max(conn.torsion_residual(&sc));
        worst[2] = worst[2].max(curv.bianchi_residual());
        worst[3] = worst[3].max(max_abs3(&conn.covariant_derivative_tensor(&Mat7::identity())));
    }
    SuiteReport {
        suite: "connection".into(),
        samples,
        checks: vec![
            Check::new("metric compatibility", worst[0], tol),
            Check::new("torsion-free", worst[1], tol),
            Check::new("first Bianchi identity", worst[2], tol),
            Check::new("nabla g = 0", worst[3], tol),
        ],
    }
}

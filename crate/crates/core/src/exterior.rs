//! Coordinate exterior algebra over ℝⁿ (n ≤ 7) with the Euclidean metric.
//!
//! A [`KForm`] stores one coefficient per strictly increasing multi-index,
//! ordered lexicographically, so `α = Σ_I α_I e^I`. Indices are 0-based in the
//! Rust API; [`KForm::from_labels`] and the JSON format use the 1-based labels
//! of the `e^{127}` notation.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 7;

struct Basis {
    masks: Vec<u8>,
    rank: [u16; 128],
}

fn tables() -> &'static Vec<Vec<Basis>> {
    static TABLES: OnceLock<Vec<Vec<Basis>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| {
                (0..=n)
                    .map(|k| {
                        let mut masks = Vec::new();
                        let mut cur = Vec::with_capacity(k);
                        lex_combinations(n, k, 0, &mut cur, &mut masks);
                        let mut rank = [u16::MAX; 128];
                        for (r, &m) in masks.iter().enumerate() {
                            rank[m as usize] = r as u16;
                        }
                        Basis { masks, rank }
                    })
                    .collect()
            })
            .collect()
    })
}

fn lex_combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<u8>) {
    if cur.len() == k {
        out.push(cur.iter().fold(0u8, |m, &i| m | (1 << i)));
        return;
    }
    for i in start..n {
        cur.push(i);
        lex_combinations(n, k, i + 1, cur, out);
        cur.pop();
    }
}

fn basis(n: usize, k: usize) -> &'static Basis {
    &tables()[n][k]
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn mask_indices(mask: u8) -> impl Iterator<Item = usize> {
    (0..8).filter(move |b| mask & (1 << b) != 0)
}

/// Sign of moving the elements of `b` past those of `a` when merging `a ∪ b`
/// into increasing order: (−1)^{#{(x, y) ∈ a × b : x > y}}.
fn merge_sign(a: u8, b: u8) -> f64 {
    let mut inversions = 0u32;
    for y in mask_indices(b) {
        inversions += (a & !((1u16 << (y + 1)) - 1) as u8).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sorts an index tuple, returning its bitmask and permutation sign, or `None`
/// when an index repeats.
fn sort_sign(idx: &[usize]) -> Option<(u8, f64)> {
    let mut mask = 0u8;
    let mut inversions = 0usize;
    for (p, &i) in idx.iter().enumerate() {
        if mask & (1 << i) != 0 {
            return None;
        }
        mask |= 1 << i;
        inversions += idx[..p].iter().filter(|&&j| j > i).count();
    }
    Some((mask, if inversions.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// An alternating k-form on ℝⁿ with dense coefficients over increasing
/// multi-indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormJson", into = "FormJson")]
pub struct KForm {
    n: usize,
    k: usize,
    coeffs: Vec<f64>,
}

impl KForm {
    pub fn zero(n: usize, k: usize) -> Self {
        assert!(n <= MAX_DIM && k <= n, "invalid form shape ({n}, {k})");
        KForm { n, k, coeffs: vec![0.0; binomial(n, k)] }
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        let mut f = KForm::zero(n, 0);
        f.coeffs[0] = c;
        f
    }

    pub fn from_coeffs(n: usize, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n > MAX_DIM || k > n {
            return Err(Error::InvalidForm(format!("shape ({n}, {k})")));
        }
        if coeffs.len() != binomial(n, k) {
            return Err(Error::InvalidForm(format!(
                "expected {} coefficients, got {}",
                binomial(n, k),
                coeffs.len()
            )));
        }
        Ok(KForm { n, k, coeffs })
    }

    /// Builds a form from `(coefficient, 1-based labels)` terms, e.g.
    /// `(1.0, &[1, 2, 7])` for `e^{127}`. Labels need not be sorted.
    pub fn from_labels(n: usize, k: usize, terms: &[(f64, &[usize])]) -> Self {
        let mut f = KForm::zero(n, k);
        for (c, labels) in terms {
            assert_eq!(labels.len(), k, "term degree mismatch");
            let idx: Vec<usize> = labels.iter().map(|l| l - 1).collect();
            f.add_at(&idx, *c);
        }
        f
    }

    /// The basis monomial `e^{i₁…i_k}` (0-based indices).
    pub fn monomial(n: usize, idx: &[usize]) -> Self {
        let mut f = KForm::zero(n, idx.len());
        f.add_at(idx, 1.0);
        f
    }

    /// Volume form `e^{1…n}`.
    pub fn volume(n: usize) -> Self {
        let mut f = KForm::zero(n, n);
        f.coeffs[0] = 1.0;
        f
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Increasing multi-index (0-based) of the `r`-th stored coefficient.
    pub fn multi_index(&self, r: usize) -> Vec<usize> {
        mask_indices(basis(self.n, self.k).masks[r]).collect()
    }

    /// Nonzero terms as `(0-based increasing indices, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let b = basis(self.n, self.k);
        self.coeffs
            .iter()
            .zip(&b.masks)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, &m)| (mask_indices(m).collect(), *c))
    }

    fn check_index(&self, idx: &[usize]) {
        assert_eq!(idx.len(), self.k, "index tuple length must equal degree");
        assert!(idx.iter().all(|&i| i < self.n), "index out of range");
    }

    /// Fully antisymmetric component `α_{i₁…i_k}` for an arbitrary index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.check_index(idx);
        match sort_sign(idx) {
            Some((mask, s)) => s * self.coeffs[basis(self.n, self.k).rank[mask as usize] as usize],
            None => 0.0,
        }
    }

    /// Adds `c` to the component at `idx`, respecting antisymmetry.
    pub fn add_at(&mut self, idx: &[usize], c: f64) {
        self.check_index(idx);
        if let Some((mask, s)) = sort_sign(idx) {
            let r = basis(self.n, self.k).rank[mask as usize] as usize;
            self.coeffs[r] += s * c;
        }
    }

    fn same_shape(&self, other: &KForm) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.k != other.k {
            return Err(Error::DegreeMismatch(self.k, other.k));
        }
        Ok(())
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.k + other.k > self.n {
            return Err(Error::DegreeOverflow(self.k, other.k, self.n));
        }
        let (ba, bb) = (basis(self.n, self.k), basis(other.n, other.k));
        let mut out = KForm::zero(self.n, self.k + other.k);
        let bo = basis(out.n, out.k);
        for (ca, &ma) in self.coeffs.iter().zip(&ba.masks) {
            if *ca == 0.0 {
                continue;
            }
            for (cb, &mb) in other.coeffs.iter().zip(&bb.masks) {
                if *cb == 0.0 || ma & mb != 0 {
                    continue;
                }
                out.coeffs[bo.rank[(ma | mb) as usize] as usize] += merge_sign(ma, mb) * ca * cb;
            }
        }
        Ok(out)
    }

    /// Interior product `v ⌟ α` with `(v⌟α)_{J} = v^m α_{mJ}`.
    pub fn interior(&self, v: &[f64]) -> Result<KForm> {
        if self.k == 0 {
            return Err(Error::DegreeZero);
        }
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(v.len(), self.n));
        }
        let bs = basis(self.n, self.k);
        let mut out = KForm::zero(self.n, self.k - 1);
        let bo = basis(self.n, self.k - 1);
        for (c, &m) in self.coeffs.iter().zip(&bs.masks) {
            if *c == 0.0 {
                continue;
            }
            for i in mask_indices(m) {
                // moving e^i to the front passes the indices below it
                let below = (m & ((1u8 << i) - 1)).count_ones();
                let s = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                out.coeffs[bo.rank[(m & !(1 << i)) as usize] as usize] += s * v[i] * c;
            }
        }
        Ok(out)
    }

    /// Inner product `g(α, β) = (1/k!) α_{I} β^{I}`, i.e. the sum over
    /// increasing multi-indices in an orthonormal frame.
    pub fn inner(&self, other: &KForm) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Hodge star for the standard Euclidean frame with orientation `e^{1…n}`.
    pub fn hodge_star(&self) -> KForm {
        EuclideanFrame::new(self.n).hodge_star(self)
    }

    /// Pullback `(h^*α)(x₁,…,x_k) = α(h x₁,…,h x_k)`.
    pub fn pullback(&self, h: &DMatrix<f64>) -> Result<KForm> {
        if h.nrows() != self.n || h.ncols() != self.n {
            return Err(Error::DimensionMismatch(h.nrows(), self.n));
        }
        let scale = h.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let det = h.determinant();
        if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(self.n as i32) {
            return Err(Error::Singular);
        }
        let b = basis(self.n, self.k);
        let mut out = KForm::zero(self.n, self.k);
        let mut minor = [[0.0f64; MAX_DIM]; MAX_DIM];
        for (ro, &mi) in b.masks.iter().enumerate() {
            let cols: Vec<usize> = mask_indices(mi).collect();
            let mut acc = 0.0;
            for (c, &mj) in self.coeffs.iter().zip(&b.masks) {
                if *c == 0.0 {
                    continue;
                }
                for (r, row) in mask_indices(mj).enumerate() {
                    for (q, &col) in cols.iter().enumerate() {
                        minor[r][q] = h[(row, col)];
                    }
                }
                acc += c * small_det(&mut minor, self.k);
            }
            out.coeffs[ro] = acc;
        }
        Ok(out)
    }

    /// Infinitesimal GL action `θ(B)α = d/dt|₀ (e^{−tB})^*α = −Σ_slots α(…, B·, …)`.
    pub fn theta(&self, b: &DMatrix<f64>) -> KForm {
        assert!(b.nrows() == self.n && b.ncols() == self.n, "θ: matrix shape");
        let bs = basis(self.n, self.k);
        let mut out = KForm::zero(self.n, self.k);
        let mut idx = vec![0usize; self.k];
        for (ro, &m) in bs.masks.iter().enumerate() {
            for (p, i) in mask_indices(m).enumerate() {
                idx[p] = i;
            }
            let mut acc = 0.0;
            for s in 0..self.k {
                let orig = idx[s];
                for j in 0..self.n {
                    let bji = b[(j, orig)];
                    if bji == 0.0 {
                        continue;
                    }
                    idx[s] = j;
                    acc -= bji * self.get(&idx);
                }
                idx[s] = orig;
            }
            out.coeffs[ro] = acc;
        }
        out
    }

    /// Embeds a form on ℝᵐ into ℝⁿ (n ≥ m) along the first m coordinates.
    pub fn lift(&self, n: usize) -> KForm {
        assert!(n >= self.n && n <= MAX_DIM);
        let mut out = KForm::zero(n, self.k);
        for (idx, c) in self.terms() {
            out.add_at(&idx, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> KForm {
        KForm { n: self.n, k: self.k, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Max-coefficient distance between two forms of equal shape.
    pub fn dist(&self, other: &KForm) -> f64 {
        assert!(self.n == other.n && self.k == other.k, "dist: shape mismatch");
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("form serialization")
    }

    pub fn from_json(s: &str) -> Result<KForm> {
        Ok(serde_json::from_str(s)?)
    }
}

fn small_det(m: &mut [[f64; MAX_DIM]; MAX_DIM], k: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap_or(c);
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for q in c..k {
                m[r][q] -= f * m[c][q];
            }
        }
    }
    det
}

impl Add for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        assert!(self.n == rhs.n && self.k == rhs.k, "add: shape mismatch");
        KForm {
            n: self.n,
            k: self.k,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for KForm {
    type Output = KForm;
    fn add(self, rhs: KForm) -> KForm {
        &self + &rhs
    }
}

impl AddAssign<&KForm> for KForm {
    fn add_assign(&mut self, rhs: &KForm) {
        assert!(self.n == rhs.n && self.k == rhs.k, "add: shape mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        self + &(-rhs)
    }
}

impl Sub for KForm {
    type Output = KForm;
    fn sub(self, rhs: KForm) -> KForm {
        &self - &rhs
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

impl Neg for KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

impl Mul<&KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: &KForm) -> KForm {
        rhs.scale(self)
    }
}

impl Mul<KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: KForm) -> KForm {
        rhs.scale(self)
    }
}

/// Orthonormal frame e₁…e_n of ℝⁿ, oriented by `e^{1…n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EuclideanFrame {
    n: usize,
}

impl EuclideanFrame {
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n));
        EuclideanFrame { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn volume(&self) -> KForm {
        KForm::volume(self.n)
    }

    /// `α ∧ *β = g(α, β) vol`; on monomials `*e^I = sign(I, Iᶜ) e^{Iᶜ}`.
    pub fn hodge_star(&self, alpha: &KForm) -> KForm {
        assert_eq!(alpha.n, self.n, "hodge star: frame dimension");
        let full = ((1u16 << self.n) - 1) as u8;
        let bs = basis(self.n, alpha.k);
        let bo = basis(self.n, self.n - alpha.k);
        let mut out = KForm::zero(self.n, self.n - alpha.k);
        for (c, &m) in alpha.coeffs.iter().zip(&bs.masks) {
            let mc = full & !m;
            out.coeffs[bo.rank[mc as usize] as usize] += merge_sign(m, mc) * c;
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct FormTerm {
    idx: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    n: usize,
    k: usize,
    terms: Vec<FormTerm>,
}

impl TryFrom<FormJson> for KForm {
    type Error = Error;
    fn try_from(j: FormJson) -> Result<KForm> {
        if j.n == 0 || j.n > MAX_DIM || j.k > j.n {
            return Err(Error::InvalidForm(format!("shape ({}, {})", j.n, j.k)));
        }
        let mut f = KForm::zero(j.n, j.k);
        for t in j.terms {
            if t.idx.len() != j.k {
                return Err(Error::InvalidForm("term degree mismatch".into()));
            }
            if !t.idx.windows(2).all(|w| w[0] < w[1]) || t.idx.iter().any(|&l| l == 0 || l > j.n) {
                return Err(Error::InvalidForm(format!(
                    "indices {:?} must be 1-based and strictly increasing",
                    t.idx
                )));
            }
            let idx: Vec<usize> = t.idx.iter().map(|l| l - 1).collect();
            f.add_at(&idx, t.c);
        }
        Ok(f)
    }
}

impl From<KForm> for FormJson {
    fn from(f: KForm) -> FormJson {
        let terms = f
            .terms()
            .map(|(idx, c)| FormTerm { idx: idx.iter().map(|i| i + 1).collect(), c })
            .collect();
        FormJson { n: f.n, k: f.k, terms }
    }
}

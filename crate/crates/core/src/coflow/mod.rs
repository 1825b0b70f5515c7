//! The bracket flow `A' = q_A A − [Qʰ_A, A]` equivalent to the Laplacian
//! coflow, its adaptive integration, and reconstruction of `h(t)` with
//! `ψ(t) = h(t)*ψ`.

pub mod ode;

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::almost_abelian::{
    commutator, frob, q_matrix_unchecked, require_sp, scalar_diagnostics_unchecked, sym,
};
use crate::error::{Error, Result};
use crate::g2core::{circ6, Convention, G2Data};
use crate::metric_lie::{hodge_laplacian, to_dmatrix, BracketMatrix, Mat6, Mat7};
use ode::{Dopri5Options, StepControl};

/// `−(½ tr S² + ¼ (tr JA)²) A + ½[A,[A,Aᵗ]] + ½[A, S∘₆S]`.
pub fn rhs(a: &BracketMatrix, g2: &G2Data) -> Result<Mat6> {
    require_sp(a.matrix(), g2)?;
    Ok(rhs_unchecked(a.matrix(), g2))
}

pub fn rhs_unchecked(a: &Mat6, g2: &G2Data) -> Mat6 {
    let s = sym(a);
    let tr_ja = (g2.j * a).trace();
    let q = -0.5 * (s * s).trace() - 0.25 * tr_ja * tr_ja;
    a * q + commutator(a, &commutator(a, &a.transpose())) * 0.5 + commutator(a, &circ6(&s, &s, g2)) * 0.5
}

/// `d/dt |A|² = −(|S|² + ½(tr JA)²)|A|² − |[A,Aᵗ]|² − ⟨S∘₆S, [A,Aᵗ]⟩`.
pub fn norm_derivative(a: &BracketMatrix, g2: &G2Data) -> Result<f64> {
    let m = a.matrix();
    require_sp(m, g2)?;
    let s = sym(m);
    let tr_ja = (g2.j * m).trace();
    let c = commutator(m, &m.transpose());
    Ok(-(s.norm_squared() + 0.5 * tr_ja * tr_ja) * m.norm_squared()
        - c.norm_squared()
        - frob(&circ6(&s, &s, g2), &c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            _ => Err(Error::InvalidOptions(format!("unknown direction `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Final time; negative for backward runs.
    pub t_end: f64,
    /// Abort when `|AJ + JAᵗ| > spDriftTol (1 + |A|)`.
    pub sp_drift_tol: f64,
    pub direction: Direction,
    /// Backward runs stop once `|A|` exceeds this.
    pub norm_ceiling: f64,
    /// Extra sample times filled by dense output.
    #[serde(default)]
    pub output_times: Vec<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 1.0,
            min_step: 1e-14,
            t_end: 1.0,
            sp_drift_tol: 1e-8,
            direction: Direction::Forward,
            norm_ceiling: 1e6,
            output_times: Vec::new(),
        }
    }
}

impl IntegratorOptions {
    pub fn forward(t_end: f64) -> Self {
        IntegratorOptions { t_end, ..Default::default() }
    }

    pub fn backward(t_end: f64) -> Self {
        IntegratorOptions { t_end: -t_end.abs(), direction: Direction::Backward, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.sp_drift_tol > 0.0) {
            return Err(Error::InvalidOptions("tolerances must be positive".into()));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return Err(Error::InvalidOptions("need 0 < minStep < maxStep".into()));
        }
        if self.norm_ceiling.is_nan() || self.norm_ceiling <= 0.0 {
            return Err(Error::InvalidOptions("norm ceiling must be positive".into()));
        }
        match self.direction {
            Direction::Forward if self.t_end < 0.0 => {
                Err(Error::InvalidOptions("forward run needs tEnd >= 0".into()))
            }
            Direction::Backward if self.t_end > 0.0 => {
                Err(Error::InvalidOptions("backward run needs tEnd <= 0".into()))
            }
            _ => Ok(()),
        }
    }

    fn ode(&self) -> Dopri5Options {
        Dopri5Options {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            min_step: self.min_step,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "camelCase")]
pub enum Termination {
    Completed,
    NormCeiling { t: f64, norm: f64 },
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::NormCeiling { t, norm } => write!(f, "norm ceiling reached at t = {t} (|A| = {norm:.3e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    #[serde(rename = "A")]
    pub a: BracketMatrix,
    #[serde(rename = "normSq")]
    pub norm_sq: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "torsionNormSq")]
    pub torsion_norm_sq: f64,
    /// Size of the accepted step that produced (or contains) this sample.
    pub step: f64,
}

impl FlowSample {
    fn new(t: f64, a: Mat6, step: f64, g2: &G2Data) -> Self {
        let d = scalar_diagnostics_unchecked(&a, g2);
        FlowSample { t, a: BracketMatrix(a), norm_sq: d.norm_sq, r: d.r, torsion_norm_sq: d.torsion_norm_sq, step }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceMeta {
    pub convention: Convention,
    pub options: IntegratorOptions,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
    /// Largest `|AJ + JAᵗ|` seen at any accepted step.
    pub max_sp_drift: f64,
}

/// Samples are stored in increasing `t`, whatever the direction of integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    pub meta: TraceMeta,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &FlowSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trace has samples")
    }

    /// Sample at the starting time of the run.
    pub fn initial(&self) -> &FlowSample {
        match self.meta.options.direction {
            Direction::Forward => self.first(),
            Direction::Backward => self.last(),
        }
    }

    /// Largest increase of `|A|²` between consecutive samples (≤ 0 when monotone).
    pub fn max_norm_increase(&self) -> f64 {
        self.samples.windows(2).map(|w| w[1].norm_sq - w[0].norm_sq).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for i in 1..=6 {
            for j in 1..=6 {
                header.push(format!("A{i}{j}"));
            }
        }
        header.extend(["normSq", "R", "torsionNormSq", "step"].map(String::from));
        wr.write_record(&header).map_err(csv_err)?;
        for s in &self.samples {
            let mut row = vec![s.t];
            for i in 0..6 {
                for j in 0..6 {
                    row.push(s.a.0[(i, j)]);
                }
            }
            row.extend([s.norm_sq, s.r, s.torsion_norm_sq, s.step]);
            wr.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes `<path>` (CSV) and `<path>.meta.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)?;
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta.json");
        std::fs::write(meta, serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn pack(a: &Mat6, h: Option<&Mat7>) -> Vec<f64> {
    let mut y: Vec<f64> = (0..36).map(|k| a[(k / 6, k % 6)]).collect();
    if let Some(h) = h {
        y.extend((0..49).map(|k| h[(k / 7, k % 7)]));
    }
    y
}

fn unpack_a(y: &[f64]) -> Mat6 {
    Mat6::from_fn(|i, j| y[6 * i + j])
}

fn unpack_h(y: &[f64]) -> Mat7 {
    Mat7::from_fn(|i, j| y[36 + 7 * i + j])
}

fn field(g2: &G2Data, with_h: bool) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |_, y, dy| {
        let a = unpack_a(y);
        let da = rhs_unchecked(&a, g2);
        for k in 0..36 {
            dy[k] = da[(k / 6, k % 6)];
        }
        if with_h {
            let dh = -(q_matrix_unchecked(&a, g2).assembled() * unpack_h(y));
            for k in 0..49 {
                dy[36 + k] = dh[(k / 7, k % 7)];
            }
        }
    }
}

struct Run {
    samples: Vec<FlowSample>,
    hs: Vec<Mat7>,
    meta: TraceMeta,
}

/// Shared driver; `include_steps = false` samples only at `opts.output_times`.
fn drive(a0: &Mat6, opts: &IntegratorOptions, g2: &G2Data, with_h: bool, include_steps: bool) -> Result<Run> {
    opts.validate()?;
    require_sp(a0, g2)?;
    let sign = if opts.t_end >= 0.0 { 1.0 } else { -1.0 };
    let mut outs: Vec<f64> =
        opts.output_times.iter().copied().filter(|&t| t * sign > 0.0 && t * sign <= opts.t_end * sign).collect();
    outs.sort_by(|x, y| (sign * x).total_cmp(&(sign * y)));
    outs.dedup();

    let y0 = pack(a0, with_h.then(Mat7::identity).as_ref());
    let mut samples = Vec::new();
    let mut hs = Vec::new();
    let mut record = |t: f64, y: &[f64], step: f64, samples: &mut Vec<FlowSample>| {
        samples.push(FlowSample::new(t, unpack_a(y), step, g2));
        if with_h {
            hs.push(unpack_h(y));
        }
    };
    if include_steps || opts.output_times.contains(&0.0) {
        record(0.0, &y0, 0.0, &mut samples);
    }

    let mut next_out = 0usize;
    let mut max_drift = g2.sp_residual(a0);
    let mut ceiling_hit = None;
    let mut buf = vec![0.0; y0.len()];
    let outcome = ode::integrate(field(g2, with_h), 0.0, &y0, opts.t_end, &opts.ode(), |s| {
        let a = unpack_a(s.y);
        let drift = g2.sp_residual(&a);
        max_drift = max_drift.max(drift);
        if drift > opts.sp_drift_tol * (1.0 + a.norm()) {
            return Err(Error::SpDrift { t: s.t, drift });
        }
        while next_out < outs.len() && outs[next_out] * sign < s.t * sign {
            s.dense.eval(outs[next_out], &mut buf);
            record(outs[next_out], &buf, s.h.abs(), &mut samples);
            next_out += 1;
        }
        let at_out = next_out < outs.len() && outs[next_out] == s.t;
        if at_out {
            next_out += 1;
        }
        if include_steps || at_out {
            record(s.t, s.y, s.h.abs(), &mut samples);
        }
        let norm = a.norm();
        if norm > opts.norm_ceiling || !norm.is_finite() {
            ceiling_hit = Some(Termination::NormCeiling { t: s.t, norm });
            return Ok(StepControl::Stop("norm ceiling".into()));
        }
        Ok(StepControl::Continue)
    })?;

    if sign < 0.0 {
        samples.reverse();
        hs.reverse();
    }
    Ok(Run {
        samples,
        hs,
        meta: TraceMeta {
            convention: g2.convention,
            options: opts.clone(),
            termination: ceiling_hit.unwrap_or(Termination::Completed),
            accepted_steps: outcome.accepted,
            rejected_steps: outcome.rejected,
            evaluations: outcome.evaluations,
            max_sp_drift: max_drift,
        },
    })
}

/// Integrate the bracket flow from `A0`, sampling every accepted step plus
/// any requested output times.
pub fn integrate(a0: &BracketMatrix, opts: &IntegratorOptions, g2: &G2Data) -> Result<FlowTrace> {
    let run = drive(a0.matrix(), opts, g2, false, true)?;
    Ok(FlowTrace { samples: run.samples, meta: run.meta })
}

/// Integrate the bracket flow together with `h' = −Q_{A(t)} h`, `h(0) = I`.
pub fn integrate_with_h(a0: &BracketMatrix, opts: &IntegratorOptions, g2: &G2Data) -> Result<(FlowTrace, Vec<Mat7>)> {
    let run = drive(a0.matrix(), opts, g2, true, true)?;
    Ok((FlowTrace { samples: run.samples, meta: run.meta }, run.hs))
}

/// `h(t)` at the sample times of `trace`, from a co-integration of the
/// bracket flow and `h' = −Q_{A(t)} h` with the trace's options.
pub fn reconstruct_h(trace: &FlowTrace, g2: &G2Data) -> Result<Vec<(f64, Mat7)>> {
    let mut opts = trace.meta.options.clone();
    opts.output_times = trace.times();
    let a0 = trace.initial().a;
    let run = drive(a0.matrix(), &opts, g2, true, false)?;
    Ok(run.samples.iter().map(|s| s.t).zip(run.hs).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalarBoundReport {
    pub skipped: bool,
    pub r0: f64,
    /// max over forward samples of `lower(t) − R(t)`
    pub lower_violation: f64,
    /// max over backward samples of `1/R(0) + |t|/2 − 1/R(t)`
    pub backward_violation: f64,
    /// max over samples of `R(t)`
    pub upper_violation: f64,
    /// max decrease of `R` between consecutive samples
    pub monotone_violation: f64,
    /// consecutive samples with `R` not strictly increasing
    pub non_strict_steps: usize,
    /// max increase of `|T|²` between consecutive samples
    pub torsion_violation: f64,
    pub pass: bool,
}

const BOUND_SLACK: f64 = 1e-9;

/// `1/(−t/2 + 1/R(0)) ≤ R(t) ≤ 0` for `t ≥ 0`, with `R` increasing in `t`.
/// Before the initial time the same inequality `(1/R)' ≤ −1/2` gives
/// `1/R(t) ≥ 1/R(0) + |t|/2` instead.
pub fn scalar_bound_check(trace: &FlowTrace) -> ScalarBoundReport {
    let r0 = trace.initial().r;
    let t0 = trace.initial().t;
    let mut rep = ScalarBoundReport {
        skipped: r0 >= -BOUND_SLACK,
        r0,
        lower_violation: f64::NEG_INFINITY,
        backward_violation: f64::NEG_INFINITY,
        upper_violation: f64::NEG_INFINITY,
        monotone_violation: 0.0,
        non_strict_steps: 0,
        torsion_violation: 0.0,
        pass: true,
    };
    if rep.skipped {
        return rep;
    }
    for s in &trace.samples {
        let dt = s.t - t0;
        if dt >= 0.0 {
            let lower = 1.0 / (-dt / 2.0 + 1.0 / r0);
            rep.lower_violation = rep.lower_violation.max(lower - s.r);
        } else if s.r < 0.0 {
            let v = (1.0 / r0 - dt / 2.0 - 1.0 / s.r) * s.r * s.r;
            rep.backward_violation = rep.backward_violation.max(v);
        }
        rep.upper_violation = rep.upper_violation.max(s.r);
    }
    for w in trace.samples.windows(2) {
        let dr = w[1].r - w[0].r;
        rep.monotone_violation = rep.monotone_violation.max(-dr);
        if dr <= 0.0 {
            rep.non_strict_steps += 1;
        }
        rep.torsion_violation = rep.torsion_violation.max(w[1].torsion_norm_sq - w[0].torsion_norm_sq);
    }
    let slack = BOUND_SLACK * (1.0 + r0.abs());
    rep.pass = rep.lower_violation <= slack
        && rep.backward_violation <= slack
        && rep.upper_violation <= slack
        && rep.monotone_violation <= slack
        && rep.torsion_violation <= slack;
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FdPoint {
    pub t: f64,
    pub dt: f64,
    pub finite_difference: f64,
    pub exact: f64,
    pub residual: f64,
}

fn tight(opts: &IntegratorOptions) -> IntegratorOptions {
    IntegratorOptions { rel_tol: 1e-12, abs_tol: 1e-14, max_step: 0.1, ..opts.clone() }
}

/// Central differences of `|A(t)|²` along the flow against `norm_derivative`;
/// `residual` is relative to `max(|exact|, 1e−12)`.
pub fn norm_derivative_fd(a0: &BracketMatrix, times: &[f64], dt: f64, g2: &G2Data) -> Result<Vec<FdPoint>> {
    let t_end = times.iter().fold(0.0f64, |m, &t| m.max(t)) + dt;
    let mut opts = tight(&IntegratorOptions::forward(t_end));
    opts.output_times = times.iter().flat_map(|&t| [t - dt, t, t + dt]).collect();
    let run = drive(a0.matrix(), &opts, g2, false, false)?;
    let at = |t: f64| run.samples.iter().find(|s| s.t == t).expect("output time sampled");
    times
        .iter()
        .map(|&t| {
            let fd = (at(t + dt).norm_sq - at(t - dt).norm_sq) / (2.0 * dt);
            let exact = norm_derivative(&at(t).a, g2)?;
            Ok(FdPoint { t, dt, finite_difference: fd, exact, residual: (fd - exact).abs() / exact.abs().max(1e-12) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PdePoint {
    pub dt: f64,
    /// max coefficient of `(ψ(t+Δ) − ψ(t−Δ))/2Δ − Δ_{A₀,ψ(t)} ψ(t)`
    pub residual: f64,
    /// `|h·A₀ − A(t)|`: transported bracket against the flowed bracket
    pub bracket_mismatch: f64,
}

/// Checks that `ψ(t) = h(t)*ψ` solves `∂ψ/∂t = Δψ` on the fixed algebra
/// `(ℝ⁷, A₀)`. The Laplacian for the metric of `ψ(t)` is evaluated through
/// the isometry `h(t)`: `Δ_{A₀,ψ(t)}ψ(t) = h*(Δ_{h·A₀,ψ}ψ)`.
pub fn pde_reconstruction_check(a0: &BracketMatrix, t: f64, dts: &[f64], g2: &G2Data) -> Result<Vec<PdePoint>> {
    if t.is_nan() || t <= dts.iter().fold(0.0f64, |m, &d| m.max(d)) {
        return Err(Error::InvalidOptions("need t > every Δt".into()));
    }
    let t_end = t + dts.iter().fold(0.0f64, |m, &d| m.max(d));
    let mut opts = tight(&IntegratorOptions::forward(t_end));
    opts.output_times = std::iter::once(t).chain(dts.iter().flat_map(|&d| [t - d, t + d])).collect();
    let run = drive(a0.matrix(), &opts, g2, true, false)?;
    let h_at = |s: f64| {
        let k = run.samples.iter().position(|x| x.t == s).expect("output time sampled");
        (run.hs[k], run.samples[k].a)
    };
    let sc0 = a0.structure_constants();
    let psi_at = |s: f64| g2.psi.pullback(&to_dmatrix(&h_at(s).0));
    let (h, a_t) = h_at(t);
    let sc_t = sc0.transport(&h)?;
    let lap = hodge_laplacian(&sc_t, &g2.psi).pullback(&to_dmatrix(&h))?;
    let transported = Mat6::from_fn(|i, j| sc_t.c[6][j][i]);
    let bracket_mismatch = (transported - a_t.0).amax();
    dts.iter()
        .map(|&d| {
            let fd = (psi_at(t + d)? - psi_at(t - d)?).scale(0.5 / d);
            Ok(PdePoint { dt: d, residual: (fd - lap.clone()).max_abs(), bracket_mismatch })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::almost_abelian::q_matrix;
    use crate::g2core::canonical_g2;
    use crate::sampling::{random_sp, random_su3, rng};

    #[test]
    fn two_routes_and_tangency() {
        for c in Convention::ALL {
            let g2 = canonical_g2(c);
            let mut r = rng(3);
            for _ in 0..20 {
                let a = BracketMatrix(random_sp(&mut r, &g2, 1.0));
                let v = rhs(&a, &g2).unwrap();
                let q = q_matrix(&a, &g2).unwrap();
                let alt = a.0 * q.q - commutator(&q.qh, &a.0);
                assert!((v - alt).amax() < 1e-12);
                assert!(g2.sp_residual(&v) < 1e-12);
                let nd = norm_derivative(&a, &g2).unwrap();
                assert!((nd - 2.0 * frob(&v, &a.0)).abs() < 1e-12 * (1.0 + nd.abs()));
                assert!(nd <= 0.0);
            }
            let k = BracketMatrix(random_su3(&mut r, &g2, 1.0));
            assert!(rhs(&k, &g2).unwrap().amax() < 1e-14);
            assert!(norm_derivative(&k, &g2).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g2 = canonical_g2(Convention::Example);
        let mut a = Mat6::zeros();
        a[(0, 0)] = 1.0;
        assert!(matches!(rhs(&BracketMatrix(a), &g2), Err(Error::NotSymplectic(_))));
        let bad = IntegratorOptions { min_step: 2.0, ..Default::default() };
        assert!(integrate(&BracketMatrix::zero(), &bad, &g2).is_err());
        let bad = IntegratorOptions { direction: Direction::Backward, t_end: 1.0, ..Default::default() };
        assert!(integrate(&BracketMatrix::zero(), &bad, &g2).is_err());
    }

    #[test]
    fn trace_shape_and_dense_output() {
        let g2 = canonical_g2(Convention::Section4);
        let a = BracketMatrix(random_sp(&mut rng(5), &g2, 1.0));
        let mut opts = IntegratorOptions::forward(3.0);
        opts.output_times = vec![0.5, 1.0, 2.25, 7.0];
        let tr = integrate(&a, &opts, &g2).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(tr.last().t, 3.0);
        for t in [0.5, 1.0, 2.25] {
            assert!(tr.samples.iter().any(|s| s.t == t));
        }
        assert!(tr.max_norm_increase() <= 1e-9);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,A11,A12"));
        assert_eq!(text.lines().count(), tr.samples.len() + 1);
    }

    #[test]
    fn backward_run_is_sorted() {
        let g2 = canonical_g2(Convention::Section4);
        let a = BracketMatrix(random_sp(&mut rng(8), &g2, 1.0));
        let opts = IntegratorOptions { norm_ceiling: 50.0, ..IntegratorOptions::backward(5.0) };
        let tr = integrate(&a, &opts, &g2).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(tr.initial().t, 0.0);
        assert!(matches!(tr.meta.termination, Termination::NormCeiling { .. }), "{:?}", tr.meta.termination);
        assert!(tr.max_norm_increase() <= 1e-9);
    }
}

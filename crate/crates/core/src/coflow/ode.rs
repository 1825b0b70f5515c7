//! Dormand–Prince 5(4) with PI step-size control and the 4th-order
//! continuous extension (Hairer, Nørsett & Wanner, DOPRI5).

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step magnitude; `f64::INFINITY` for none.
    pub max_step: f64,
    /// Smallest step magnitude before reporting underflow.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options { rel_tol: 1e-9, abs_tol: 1e-12, max_step: f64::INFINITY, min_step: 1e-14, max_steps: 10_000_000 }
    }
}

impl Dopri5Options {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidOptions("tolerances must be positive".into()));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return Err(Error::InvalidOptions("need 0 < minStep < maxStep".into()));
        }
        Ok(())
    }
}

/// Continuous extension over the last accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t_old: f64,
    pub h: f64,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
    r4: Vec<f64>,
    r5: Vec<f64>,
}

impl DenseStep {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t_old) / self.h;
        let th1 = 1.0 - th;
        for i in 0..out.len() {
            out[i] = self.r1[i] + th * (self.r2[i] + th1 * (self.r3[i] + th * (self.r4[i] + th1 * self.r5[i])));
        }
    }

    pub fn t_new(&self) -> f64 {
        self.t_old + self.h
    }
}

pub enum StepControl {
    Continue,
    Stop(String),
}

pub struct StepInfo<'a> {
    pub t: f64,
    pub h: f64,
    pub y: &'a [f64],
    pub dense: &'a DenseStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dopri5Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Set when the step hook stopped the integration early.
    pub stopped: Option<String>,
}

fn err_norm(y0: &[f64], y1: &[f64], e: &[f64], o: &Dopri5Options) -> f64 {
    let n = y0.len() as f64;
    let s: f64 = (0..y0.len())
        .map(|i| {
            let sk = o.abs_tol + o.rel_tol * y0[i].abs().max(y1[i].abs());
            (e[i] / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<F: FnMut(f64, &[f64], &mut [f64])>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    o: &Dopri5Options,
) -> f64 {
    let n = y0.len();
    let sk: Vec<f64> = y0.iter().map(|y| o.abs_tol + o.rel_tol * y.abs()).collect();
    let norm = |v: &[f64]| ((0..n).map(|i| (v[i] / sk[i]).powi(2)).sum::<f64>() / n as f64).sqrt();
    let (d0, d1) = (norm(y0), norm(f0));
    let mut h0 = if d0 <= 1e-10 || d1 <= 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(o.max_step);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f(t0 + dir * h0, &y1, &mut f1);
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(o.max_step)
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end` (either direction). The hook
/// runs after every accepted step and may stop the integration.
pub fn integrate<F, H>(mut f: F, t0: f64, y0: &[f64], t_end: f64, o: &Dopri5Options, mut hook: H) -> Result<Dopri5Outcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    H: FnMut(&StepInfo) -> Result<StepControl>,
{
    o.validate()?;
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ys = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut e = vec![0.0; n];
    f(t, &y, &mut k1);
    let mut evaluations = 1;
    let mut out = Dopri5Outcome { t, y: y.clone(), accepted: 0, rejected: 0, evaluations, stopped: None };
    if t == t_end {
        return Ok(out);
    }
    let mut h = initial_step(&mut f, t, &y, &k1, dir, o);
    evaluations += 1;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if out.accepted + out.rejected >= o.max_steps {
            return Err(Error::InvalidOptions(format!("exceeded {} steps", o.max_steps)));
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < o.min_step && !last {
            return Err(Error::StepUnderflow { t, h });
        }
        let hs = dir * h;

        for i in 0..n {
            ys[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &ys, &mut k2);
        for i in 0..n {
            ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &ys, &mut k3);
        for i in 0..n {
            ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &ys, &mut k4);
        for i in 0..n {
            ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &ys, &mut k5);
        for i in 0..n {
            ys[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + hs };
        f(t_new, &ys, &mut k6);
        for i in 0..n {
            y1[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t_new, &y1, &mut k7);
        evaluations += 6;
        for i in 0..n {
            e[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&y, &y1, &e, o);
        if !err.is_finite() {
            out.rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }
        let expo = 0.2 - BETA * 0.75;
        let fac11 = err.powf(expo);

        if err <= 1.0 {
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = (h / fac).min(o.max_step);
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(1e-4);

            let dense = DenseStep {
                t_old: t,
                h: t_new - t,
                r1: y.clone(),
                r2: (0..n).map(|i| y1[i] - y[i]).collect(),
                r3: (0..n).map(|i| hs * k1[i] - (y1[i] - y[i])).collect(),
                r4: (0..n).map(|i| (y1[i] - y[i]) - hs * k7[i] - (hs * k1[i] - (y1[i] - y[i]))).collect(),
                r5: (0..n)
                    .map(|i| {
                        hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    })
                    .collect(),
            };
            y.copy_from_slice(&y1);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            out.accepted += 1;
            last_rejected = false;
            let ctl = hook(&StepInfo { t, h: hs, y: &y, dense: &dense })?;
            if let StepControl::Stop(reason) = ctl {
                out.stopped = Some(reason);
                break;
            }
            if last {
                break;
            }
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            out.rejected += 1;
            last_rejected = true;
        }
    }
    out.t = t;
    out.y = y;
    out.evaluations = evaluations;
    Ok(out)
}

//! The two-parameter family `A = diag(B, −Bᵗ)`, `B = [[0,x,0],[y,0,0],[0,0,0]]`
//! and its reduced planar system
//! `ẋ = −2x(3x−y)(x+y)`, `ẏ = 2y(x−3y)(x+y)`.
//!
//! `diag(B, −Bᵗ)` lies in sp(ℝ⁶) for the example convention
//! (`ω = e¹⁴ + e²⁵ + e³⁶`), not for the section-4 one.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coflow::ode::{self, Dopri5Options, StepControl};
use crate::coflow::rhs;
use crate::error::{Error, Result};
use crate::g2core::G2Data;
use crate::metric_lie::{BracketMatrix, Mat6};
use crate::sampling;

/// Absolute tolerance on the nullcline polynomials.
pub const NULLCLINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub x: f64,
    pub y: f64,
}

pub fn embed(x: f64, y: f64) -> BracketMatrix {
    let mut a = Mat6::zeros();
    a[(0, 1)] = x;
    a[(1, 0)] = y;
    a[(3, 4)] = -y;
    a[(4, 3)] = -x;
    BracketMatrix(a)
}

pub fn planar_rhs(x: f64, y: f64) -> (f64, f64) {
    (-2.0 * x * (3.0 * x - y) * (x + y), 2.0 * y * (x - 3.0 * y) * (x + y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EmbeddingPoint {
    pub x: f64,
    pub y: f64,
    /// `(ẋ, ẏ)` read off the bracket flow at `embed(x, y)`
    pub restricted: (f64, f64),
    pub planar: (f64, f64),
    /// `|rhs(embed(x,y)) − embed(restricted)|`: zero iff the family is invariant
    pub off_family: f64,
}

pub fn embedding_consistency(x: f64, y: f64, g2: &G2Data) -> Result<EmbeddingPoint> {
    let v = rhs(&embed(x, y), g2)?;
    let restricted = (v[(0, 1)], v[(1, 0)]);
    let off_family = (v - embed(restricted.0, restricted.1).0).amax();
    Ok(EmbeddingPoint { x, y, restricted, planar: planar_rhs(x, y), off_family })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EmbeddingReport {
    pub points: usize,
    pub max_off_family: f64,
    /// Least-squares `k` in `planar ≈ k · restricted`
    pub factor: f64,
    /// `max |planar − k · restricted|`
    pub proportionality_residual: f64,
    /// `max |planar − restricted|`
    pub direct_residual: f64,
}

/// Consistency over an `n × n` grid on `[lo, hi]²`.
pub fn embedding_consistency_grid(lo: f64, hi: f64, n: usize, g2: &G2Data) -> Result<EmbeddingReport> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let pts = (0..n * n)
        .map(|k| embedding_consistency(lo + step * (k / n) as f64, lo + step * (k % n) as f64, g2))
        .collect::<Result<Vec<_>>>()?;
    let (mut pr, mut rr) = (0.0, 0.0);
    for p in &pts {
        pr += p.planar.0 * p.restricted.0 + p.planar.1 * p.restricted.1;
        rr += p.restricted.0 * p.restricted.0 + p.restricted.1 * p.restricted.1;
    }
    let factor = if rr > 0.0 { pr / rr } else { 1.0 };
    let mut rep = EmbeddingReport {
        points: pts.len(),
        max_off_family: 0.0,
        factor,
        proportionality_residual: 0.0,
        direct_residual: 0.0,
    };
    for p in &pts {
        rep.max_off_family = rep.max_off_family.max(p.off_family);
        rep.proportionality_residual = rep
            .proportionality_residual
            .max((p.planar.0 - factor * p.restricted.0).abs())
            .max((p.planar.1 - factor * p.restricted.1).abs());
        rep.direct_residual =
            rep.direct_residual.max((p.planar.0 - p.restricted.0).abs()).max((p.planar.1 - p.restricted.1).abs());
    }
    Ok(rep)
}

/// `V = (x+y)²`, `V̇ = −2(x+y)²(6x² − 4xy + 6y²)`.
pub fn lyapunov(x: f64, y: f64) -> (f64, f64) {
    let s = (x + y) * (x + y);
    (s, -2.0 * s * (6.0 * x * x - 4.0 * x * y + 6.0 * y * y))
}

/// `H = (y − x)² / (x³y³)`, conserved away from the axes.
pub fn invariant_h(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 || y == 0.0 {
        return Err(Error::OnAxis);
    }
    Ok((y - x).powi(2) / (x.powi(3) * y.powi(3)))
}

/// `log|H| = 2 log|y−x| − 3 log|x| − 3 log|y|` (`−∞` on `x = y`).
pub fn log_abs_h(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 || y == 0.0 {
        return Err(Error::OnAxis);
    }
    Ok(2.0 * (y - x).abs().ln() - 3.0 * x.abs().ln() - 3.0 * y.abs().ln())
}

pub fn is_equilibrium(x: f64, y: f64) -> bool {
    let (f, g) = planar_rhs(x, y);
    f == 0.0 && g == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub struct NullclineFlags {
    /// ẋ-nullclines
    pub x_zero: bool,
    pub y_three_x: bool,
    /// on both families
    pub anti_diagonal: bool,
    /// ẏ-nullclines
    pub y_zero: bool,
    pub y_third_x: bool,
}

impl NullclineFlags {
    pub fn x_nullcline(&self) -> bool {
        self.x_zero || self.y_three_x || self.anti_diagonal
    }

    pub fn y_nullcline(&self) -> bool {
        self.y_zero || self.y_third_x || self.anti_diagonal
    }

    fn label(&self) -> String {
        let names = [
            (self.x_zero, "x=0"),
            (self.y_three_x, "y=3x"),
            (self.anti_diagonal, "x=-y"),
            (self.y_zero, "y=0"),
            (self.y_third_x, "y=x/3"),
        ];
        names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect::<Vec<_>>().join(";")
    }
}

pub fn nullcline_flags(x: f64, y: f64) -> NullclineFlags {
    NullclineFlags {
        x_zero: x.abs() < NULLCLINE_TOL,
        y_three_x: (y - 3.0 * x).abs() < NULLCLINE_TOL,
        anti_diagonal: (x + y).abs() < NULLCLINE_TOL,
        y_zero: y.abs() < NULLCLINE_TOL,
        y_third_x: (3.0 * y - x).abs() < NULLCLINE_TOL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarTrajectory {
    pub start: PlanarState,
    /// `(t, x, y)` at every accepted step
    pub samples: Vec<(f64, f64, f64)>,
}

impl PlanarTrajectory {
    pub fn last(&self) -> (f64, f64, f64) {
        *self.samples.last().expect("trajectory has samples")
    }

    /// `max |H(t) − H(0)| / |H(0)|` via `log|H|`; `None` on the axes or `x = y`.
    pub fn h_drift(&self) -> Option<f64> {
        let h0 = log_abs_h(self.start.x, self.start.y).ok().filter(|v| v.is_finite())?;
        let mut worst = 0.0f64;
        for &(_, x, y) in &self.samples {
            let h = log_abs_h(x, y).ok()?;
            worst = worst.max((h - h0).exp_m1().abs());
        }
        Some(worst)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "x", "y", "logAbsH"]).map_err(csv_err)?;
        for &(t, x, y) in &self.samples {
            let h = log_abs_h(x, y).map(|v| format!("{v:e}")).unwrap_or_default();
            wr.write_record([format!("{t:e}"), format!("{x:e}"), format!("{y:e}"), h]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Integrates the planar system with the default tolerances, plus `output_times`
/// by dense output.
pub fn integrate_planar(x0: f64, y0: f64, t_end: f64, output_times: &[f64]) -> Result<PlanarTrajectory> {
    let mut samples = vec![(0.0, x0, y0)];
    let mut outs: Vec<f64> = output_times.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
    outs.sort_by(f64::total_cmp);
    let mut next = 0;
    let mut buf = [0.0; 2];
    ode::integrate(
        |_, s, ds| {
            let (f, g) = planar_rhs(s[0], s[1]);
            ds[0] = f;
            ds[1] = g;
        },
        0.0,
        &[x0, y0],
        t_end,
        &Dopri5Options::default(),
        |st| {
            while next < outs.len() && outs[next] < st.t {
                st.dense.eval(outs[next], &mut buf);
                samples.push((outs[next], buf[0], buf[1]));
                next += 1;
            }
            samples.push((st.t, st.y[0], st.y[1]));
            Ok(StepControl::Continue)
        },
    )?;
    Ok(PlanarTrajectory { start: PlanarState { x: x0, y: y0 }, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PhaseGrid {
    pub fn square(half: f64, n: usize) -> Self {
        PhaseGrid { x_min: -half, x_max: half, y_min: -half, y_max: half, nx: n, ny: n }
    }

    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidOptions("grid resolution must be positive".into()));
        }
        // (lo (n−1−k) + hi k)/(n−1) keeps symmetric grids exactly symmetric
        let at = |lo: f64, hi: f64, n: usize, k: usize| {
            if n == 1 {
                lo
            } else {
                (lo * (n - 1 - k) as f64 + hi * k as f64) / (n - 1) as f64
            }
        };
        Ok((0..self.nx)
            .flat_map(|i| (0..self.ny).map(move |j| (i, j)))
            .map(|(i, j)| (at(self.x_min, self.x_max, self.nx, i), at(self.y_min, self.y_max, self.ny, j)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
    pub v: f64,
    pub v_dot: f64,
    pub log_abs_h: Option<f64>,
    pub flags: NullclineFlags,
    pub equilibrium: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDataset {
    pub points: Vec<PhasePoint>,
    pub trajectories: Vec<PlanarTrajectory>,
}

impl PhaseDataset {
    pub fn write_points_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "dx", "dy", "V", "Vdot", "H_defined", "logAbsH", "flags"]).map_err(csv_err)?;
        for p in &self.points {
            let h = p.log_abs_h.filter(|v| v.is_finite());
            wr.write_record([
                format!("{:e}", p.x),
                format!("{:e}", p.y),
                format!("{:e}", p.dx),
                format!("{:e}", p.dy),
                format!("{:e}", p.v),
                format!("{:e}", p.v_dot),
                h.is_some().to_string(),
                h.map(|v| format!("{v:e}")).unwrap_or_default(),
                p.flags.label(),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn phase_point(x: f64, y: f64) -> PhasePoint {
    let (dx, dy) = planar_rhs(x, y);
    let (v, v_dot) = lyapunov(x, y);
    PhasePoint {
        x,
        y,
        dx,
        dy,
        v,
        v_dot,
        log_abs_h: log_abs_h(x, y).ok(),
        flags: nullcline_flags(x, y),
        equilibrium: is_equilibrium(x, y),
    }
}

/// Grid evaluation plus trajectories from `starts` integrated to `t_end`.
pub fn phase_portrait(grid: &PhaseGrid, t_end: f64, starts: &[(f64, f64)]) -> Result<PhaseDataset> {
    let points = grid.points()?.par_iter().map(|&(x, y)| phase_point(x, y)).collect();
    let trajectories =
        starts.par_iter().map(|&(x, y)| integrate_planar(x, y, t_end, &[])).collect::<Result<Vec<_>>>()?;
    Ok(PhaseDataset { points, trajectories })
}

/// Seeded starting points, uniform in the grid rectangle.
pub fn random_starts(grid: &PhaseGrid, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut r = sampling::rng(seed);
    (0..count)
        .map(|_| (r.gen_range(grid.x_min..=grid.x_max), r.gen_range(grid.y_min..=grid.y_max)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{canonical_g2, Convention};

    #[test]
    fn hand_values() {
        assert_eq!(planar_rhs(1.0, -1.0), (0.0, 0.0));
        assert_eq!(planar_rhs(1.0, 0.0), (-6.0, 0.0));
        assert_eq!(planar_rhs(1.0, 1.0), (-8.0, -8.0));
        assert_eq!(lyapunov(1.0, 0.0), (1.0, -12.0));
        assert_eq!(lyapunov(1.0, -1.0), (0.0, 0.0));
        assert_eq!(invariant_h(1.0, 2.0).unwrap(), 0.125);
        assert_eq!(invariant_h(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(invariant_h(0.0, 2.0), Err(Error::OnAxis));
        assert!((log_abs_h(1.0, 2.0).unwrap() - 0.125f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn embedding() {
        let g2 = canonical_g2(Convention::Example);
        assert_eq!(embed(0.0, 0.0), BracketMatrix::zero());
        let a = embed(1.0, -1.0).0;
        assert_eq!(a, -a.transpose());
        assert!(g2.sp_residual(&embed(1.0, 0.0).0) == 0.0);
        assert!(g2.sp_residual(&embed(0.3, -2.0).0) == 0.0);
        let p = embedding_consistency(1.0, -1.0, &g2).unwrap();
        assert_eq!(p.restricted, (0.0, 0.0));
        assert_eq!(p.planar, (0.0, 0.0));
        let s4 = canonical_g2(Convention::Section4);
        assert!(embedding_consistency(1.0, 0.0, &s4).is_err());
    }

    #[test]
    fn symmetric_grid_hits_equilibria() {
        let pts = PhaseGrid::square(2.0, 11).points().unwrap();
        assert_eq!(pts.iter().filter(|p| is_equilibrium(p.0, p.1)).count(), 11);
    }

    #[test]
    fn flags() {
        assert!(nullcline_flags(1.0, 3.0).y_three_x);
        assert!(nullcline_flags(1.0, 3.0).x_nullcline());
        assert!(!nullcline_flags(1.0, 3.0).y_nullcline());
        assert!(nullcline_flags(3.0, 1.0).y_third_x);
        assert_eq!(nullcline_flags(2.0, -2.0).label(), "x=-y");
        assert!(PhaseGrid::square(1.0, 0).points().is_err());
    }
}

//! `g2coflow` command-line driver.
//!
//! Exit codes: 0 success, 1 failed check, 2 runtime/integrator/IO failure,
//! 3 non-symplectic input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use g2coflow::almost_abelian::sp_check;
use g2coflow::coflow::{self, Direction, IntegratorOptions};
use g2coflow::g2core::{canonical_g2, Convention, G2Data};
use g2coflow::metric_lie::{BracketMatrix, Mat6};
use g2coflow::planar::{self, PhaseGrid};
use g2coflow::sampling::{random_su3, random_u3, rng};
use g2coflow::soliton::{self, expanding_only_audit, SolitonKind};
use g2coflow::verify::{self, SuiteReport};
use g2coflow::Error;

#[derive(Parser)]
#[command(name = "g2coflow", version, about = "Laplacian coflow on almost Abelian Lie algebras")]
struct Cli {
    /// section4 or example; defaults depend on the command
    #[arg(long, global = true)]
    convention: Option<Convention>,
    /// Residual tolerance override (falls back to G2COFLOW_TOL)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identity and oracle suites
    Verify(VerifyArgs),
    /// Integrate the bracket flow and write a trace
    Flow(FlowArgs),
    /// Soliton certification
    Soliton {
        #[command(subcommand)]
        command: SolitonCommand,
    },
    /// Phase-portrait data for the planar family
    Phase(PhaseArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// all, appendix, complex, laplacian, torsion, bianchi, connection
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    /// Bracket JSON `{"A": [[...6x6...]]}`
    #[arg(long)]
    bracket: PathBuf,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long)]
    backward: bool,
    #[arg(long, default_value_t = 1e6)]
    norm_ceiling: f64,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    max_step: f64,
    #[arg(long, default_value_t = 1e-14)]
    min_step: f64,
    #[arg(long, default_value_t = 1e-8)]
    sp_drift_tol: f64,
    /// Extra dense-output times, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    output_times: Vec<f64>,
    /// Trace CSV path; the meta sidecar is `<out>.meta.json`
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SolitonCommand {
    Check(SolitonArgs),
}

#[derive(Args)]
struct SolitonArgs {
    /// Shipped example, e.g. nilpotent3
    #[arg(long, conflicts_with_all = ["bracket", "skew_sweep"])]
    example: Option<String>,
    #[arg(long, conflicts_with = "skew_sweep")]
    bracket: Option<PathBuf>,
    /// Optional `{"D1": [[...]]}` candidate derivation for --bracket
    #[arg(long, requires = "bracket")]
    d1: Option<PathBuf>,
    /// Certify this many random skew brackets in sp(6)
    #[arg(long)]
    skew_sweep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    xmin: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    xmax: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    ymin: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    ymax: f64,
    #[arg(long, default_value_t = 101)]
    res: usize,
    #[arg(long, default_value_t = 5.0)]
    t_end: f64,
    /// Trajectory start `x,y`; repeatable
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    trajectory: Vec<(f64, f64)>,
    /// Additional random trajectory starts
    #[arg(long, default_value_t = 0)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write nullcline line segments
    #[arg(long)]
    nullclines: bool,
    #[arg(long, default_value = "phase")]
    out_dir: PathBuf,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

enum Failure {
    Check(String),
    Runtime(String),
    NotSymplectic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotSymplectic(_) => Failure::NotSymplectic(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let tol = match resolve_tol(cli.tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let res = match &cli.command {
        Command::Verify(a) => cmd_verify(a, cli.convention, tol),
        Command::Flow(a) => cmd_flow(a, cli.convention.unwrap_or(Convention::Section4)),
        Command::Soliton { command: SolitonCommand::Check(a) } => cmd_soliton(a, cli.convention, tol),
        Command::Phase(a) => cmd_phase(a, cli.convention.unwrap_or(Convention::Example)),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NotSymplectic(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> Result<Option<f64>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("G2COFLOW_TOL") {
        Ok(s) => s.parse().map(Some).map_err(|_| format!("G2COFLOW_TOL is not a number: `{s}`")),
        Err(_) => Ok(None),
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("json");
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn read_bracket(path: &Path) -> Result<BracketMatrix, Failure> {
    serde_json::from_value(read_json(path)?).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn read_d1(path: &Path) -> Result<Mat6, Failure> {
    let v = read_json(path)?;
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.get("D1").cloned().unwrap_or(Value::Null))
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    g2coflow::io::from_rows(&rows).ok_or_else(|| Failure::Runtime("D1 must be 6x6".into()))
}

fn cmd_verify(a: &VerifyArgs, convention: Option<Convention>, tol: Option<f64>) -> Outcome {
    let tol = tol.unwrap_or(1e-10);
    let conventions: Vec<Convention> = convention.map(|c| vec![c]).unwrap_or_else(|| Convention::ALL.to_vec());
    let names: Vec<&str> = match a.suite.as_str() {
        "all" => vec!["appendix", "complex", "laplacian", "torsion", "bianchi", "connection"],
        s @ ("appendix" | "complex" | "laplacian" | "torsion" | "bianchi" | "connection") => vec![s],
        other => return Err(Failure::Runtime(format!("unknown suite `{other}`"))),
    };
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for c in conventions {
        let g2 = canonical_g2(c);
        for name in &names {
            let rep: SuiteReport = match *name {
                "appendix" => verify::appendix_suite(&g2, tol.max(1e-12)).1,
                "complex" => verify::complex_suite(&g2, a.seed, a.samples, tol),
                "laplacian" => verify::laplacian_suite(&g2, a.seed, a.samples, tol),
                "torsion" => verify::torsion_suite(&g2, a.seed, a.samples, tol),
                "bianchi" => verify::bianchi_suite(&g2, a.seed, a.samples, tol),
                _ => verify::connection_suite(&g2, a.seed, a.samples, tol),
            };
            for ch in rep.checks.iter().filter(|ch| !ch.pass) {
                failed.push(format!("[{c}/{}] {} = {:.3e}", rep.suite, ch.name, ch.residual));
            }
            eprintln!("{:<6} {c}/{} ({} checks)", if rep.pass() { "PASS" } else { "FAIL" }, rep.suite, rep.checks.len());
            reports.push(json!({ "convention": c.name(), "report": rep }));
        }
    }
    emit(&json!({ "pass": failed.is_empty(), "tol": tol, "suites": reports }), a.out.as_deref())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

fn cmd_flow(a: &FlowArgs, convention: Convention) -> Outcome {
    let g2 = canonical_g2(convention);
    let bracket = read_bracket(&a.bracket)?;
    let sp = sp_check(&bracket, &g2);
    if !sp.is_sp {
        return Err(Failure::NotSymplectic(format!("|AJ + JA^t| = {:.3e} ({convention} convention)", sp.residual)));
    }
    let t_end = if a.backward { -a.t_end.abs() } else { a.t_end };
    let opts = IntegratorOptions {
        rel_tol: a.rel_tol,
        abs_tol: a.abs_tol,
        max_step: a.max_step,
        min_step: a.min_step,
        t_end,
        sp_drift_tol: a.sp_drift_tol,
        direction: if a.backward { Direction::Backward } else { Direction::Forward },
        norm_ceiling: a.norm_ceiling,
        output_times: a.output_times.clone(),
    };
    let trace = coflow::integrate(&bracket, &opts, &g2)?;
    trace.save(&a.out)?;
    let increase = trace.max_norm_increase();
    let bound = coflow::scalar_bound_check(&trace);
    let mut report = json!({
        "samples": trace.samples.len(),
        "termination": trace.meta.termination,
        "initial": { "normSq": trace.initial().norm_sq, "R": trace.initial().r },
        "final": { "t": trace.last().t, "normSq": trace.last().norm_sq, "R": trace.last().r },
        "maxNormIncrease": increase,
        "scalarBound": bound,
        "trace": a.out.display().to_string(),
    });
    if let Some(cmp) = planar_comparison(&bracket, &trace, convention) {
        report["planarClosedForm"] = cmp;
    }
    emit(&report, None)?;
    let mut failed = Vec::new();
    if increase > 1e-9 {
        failed.push(format!("|A|^2 increased by {increase:.3e}"));
    }
    if !bound.skipped && !bound.pass {
        failed.push("scalar-curvature bound violated".to_string());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

/// For `embed(x₀, 0)` the B-entry follows `x₀ (1 + 3x₀² t)^{−1/2}` under the
/// bracket flow (the planar system runs 4× faster).
fn planar_comparison(a: &BracketMatrix, trace: &coflow::FlowTrace, convention: Convention) -> Option<Value> {
    let (x0, y0) = (a.0[(0, 1)], a.0[(1, 0)]);
    if convention != Convention::Example || y0 != 0.0 || x0 == 0.0 || planar::embed(x0, y0) != *a {
        return None;
    }
    let worst = trace
        .samples
        .iter()
        .map(|s| {
            let exact = x0 / (1.0 + 3.0 * x0 * x0 * s.t).sqrt();
            ((s.a.0[(0, 1)] - exact) / exact).abs()
        })
        .fold(0.0f64, f64::max);
    Some(json!({
        "x0": x0,
        "formula": "x(t) = x0 (1 + 3 x0^2 t)^(-1/2); planar time tau = t/4 gives (1 + 12 x0^2 tau)^(-1/2)",
        "maxRelativeError": worst,
    }))
}

fn cmd_soliton(a: &SolitonArgs, convention: Option<Convention>, tol: Option<f64>) -> Outcome {
    let tol = tol.unwrap_or(soliton::CERT_TOL);
    if let Some(name) = &a.example {
        let ex = soliton::example(name)?;
        let g2 = canonical_g2(convention.unwrap_or(ex.convention));
        let bracket = BracketMatrix(ex.a);
        let report = soliton::certify(&bracket, Some(&ex.d1), &g2)?;
        let alg = soliton::algebraic_check(&bracket, &g2)?;
        let semi = soliton::semi_algebraic_check(&bracket, &ex.d1, &g2)?;
        emit(&json!({ "example": name, "report": report, "algebraic": alg.pass, "semiAlgebraic": semi.pass }), a.out.as_deref())?;
        let mut failed = Vec::new();
        if (report.c - ex.c).abs() > tol {
            failed.push(format!("c = {} (expected {})", report.c, ex.c));
        }
        if (report.d - ex.d_const).abs() > tol {
            failed.push(format!("d = {} (expected {})", report.d, ex.d_const));
        }
        if !semi.pass {
            failed.push("semi-algebraic check failed".into());
        }
        if alg.pass {
            failed.push("algebraic check unexpectedly passed".into());
        }
        if report.residuals["pde"] > tol {
            failed.push(format!("PDE residual {:.3e}", report.residuals["pde"]));
        }
        return if failed.is_empty() { Ok(()) } else { Err(Failure::Check(failed.join("; "))) };
    }
    let g2 = canonical_g2(convention.unwrap_or(Convention::Section4));
    if let Some(n) = a.skew_sweep {
        return skew_sweep(n, a.seed, &g2, a.out.as_deref());
    }
    let Some(path) = &a.bracket else {
        return Err(Failure::Runtime("one of --example, --bracket, --skew-sweep is required".into()));
    };
    let bracket = read_bracket(path)?;
    let sp = sp_check(&bracket, &g2);
    if !sp.is_sp {
        return Err(Failure::NotSymplectic(format!("|AJ + JA^t| = {:.3e}", sp.residual)));
    }
    let d1 = a.d1.as_deref().map(read_d1).transpose()?;
    let report = soliton::certify(&bracket, d1.as_ref(), &g2)?;
    let audit = expanding_only_audit(&report);
    emit(&json!({ "report": report, "expandingOnlyAudit": audit }), a.out.as_deref())?;
    if audit {
        Ok(())
    } else {
        Err(Failure::Check("certified soliton is shrinking or a torsion-carrying steady soliton".into()))
    }
}

/// Random skew brackets in sp(6) (i.e. u(3)); every tenth is projected to
/// su(3) so the steady case is exercised.
fn skew_sweep(n: usize, seed: u64, g2: &G2Data, out: Option<&Path>) -> Outcome {
    use rayon::prelude::*;
    let mut r = rng(seed);
    let brackets: Vec<Mat6> =
        (0..n).map(|k| if k % 10 == 9 { random_su3(&mut r, g2, 1.0) } else { random_u3(&mut r, g2, 1.0) }).collect();
    let reports = brackets
        .par_iter()
        .filter(|a| a.norm_squared() > 0.0)
        .map(|a| soliton::certify(&BracketMatrix(*a), None, g2))
        .collect::<Result<Vec<_>, Error>>()?;
    let algebraic = reports.iter().filter(|r| r.kind == SolitonKind::Algebraic).count();
    let max_c = reports.iter().map(|r| r.c).fold(f64::NEG_INFINITY, f64::max);
    let audit = reports.iter().all(expanding_only_audit);
    let max_eq = reports.iter().map(|r| r.residuals["soliton_eq"]).fold(0.0, f64::max);
    emit(
        &json!({
            "samples": reports.len(),
            "algebraic": algebraic,
            "maxC": max_c,
            "maxSolitonEqResidual": max_eq,
            "expandingOnlyAudit": audit,
        }),
        out,
    )?;
    if algebraic == reports.len() && max_c <= 1e-10 && audit {
        Ok(())
    } else {
        Err(Failure::Check(format!("{algebraic}/{} algebraic, max c = {max_c:.3e}", reports.len())))
    }
}

fn cmd_phase(a: &PhaseArgs, convention: Convention) -> Outcome {
    let grid = PhaseGrid { x_min: a.xmin, x_max: a.xmax, y_min: a.ymin, y_max: a.ymax, nx: a.res, ny: a.res };
    let mut starts = a.trajectory.clone();
    starts.extend(planar::random_starts(&grid, a.seeds, a.seed));
    let data = planar::phase_portrait(&grid, a.t_end, &starts)?;
    fs::create_dir_all(&a.out_dir)?;
    data.write_points_csv(fs::File::create(a.out_dir.join("points.csv"))?)?;
    for (k, tr) in data.trajectories.iter().enumerate() {
        tr.write_csv(fs::File::create(a.out_dir.join(format!("trajectory_{k}.csv")))?)?;
        match tr.h_drift() {
            Some(d) => eprintln!("trajectory {k} from ({}, {}): H relative drift {d:.3e}", tr.start.x, tr.start.y),
            None => eprintln!("trajectory {k} from ({}, {}): H undefined (axis or x = y)", tr.start.x, tr.start.y),
        }
    }
    if a.nullclines {
        write_nullclines(&grid, &a.out_dir.join("nullclines.csv"))?;
    }
    let embedding = match convention {
        Convention::Example => serde_json::to_value(planar::embedding_consistency_grid(-2.0, 2.0, 21, &canonical_g2(convention))?)
            .expect("json"),
        Convention::Section4 => json!("not available: diag(B, -B^t) is not in sp(6) for this convention"),
    };
    let equilibria = data.points.iter().filter(|p| p.equilibrium).count();
    emit(
        &json!({
            "points": data.points.len(),
            "equilibria": equilibria,
            "trajectories": data.trajectories.len(),
            "maxVdot": data.points.iter().map(|p| p.v_dot).fold(f64::NEG_INFINITY, f64::max),
            "embedding": embedding,
            "outDir": a.out_dir.display().to_string(),
        }),
        None,
    )
}

/// Segments of the lines `x=0, y=3x, x=−y` (ẋ = 0) and `y=0, y=x/3, x=−y`
/// (ẏ = 0) clipped to the grid rectangle.
fn write_nullclines(g: &PhaseGrid, path: &Path) -> Outcome {
    let lines: [(&str, &str, f64, f64, f64); 6] = [
        ("x", "x=0", 1.0, 0.0, 0.0),
        ("x", "y=3x", -3.0, 1.0, 0.0),
        ("x", "x=-y", 1.0, 1.0, 0.0),
        ("y", "y=0", 0.0, 1.0, 0.0),
        ("y", "y=x/3", -1.0, 3.0, 0.0),
        ("y", "x=-y", 1.0, 1.0, 0.0),
    ];
    let mut text = String::from("family,line,x0,y0,x1,y1\n");
    for (family, name, p, q, r) in lines {
        if let Some(((x0, y0), (x1, y1))) = clip_line(g, p, q, r) {
            text.push_str(&format!("{family},{name},{x0:e},{y0:e},{x1:e},{y1:e}\n"));
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// Intersection of `p x + q y = r` with the rectangle.
fn clip_line(g: &PhaseGrid, p: f64, q: f64, r: f64) -> Option<((f64, f64), (f64, f64))> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for x in [g.x_min, g.x_max] {
        if q != 0.0 {
            let y = (r - p * x) / q;
            if y >= g.y_min && y <= g.y_max {
                pts.push((x, y));
            }
        }
    }
    for y in [g.y_min, g.y_max] {
        if p != 0.0 {
            let x = (r - q * y) / p;
            if x >= g.x_min && x <= g.x_max {
                pts.push((x, y));
            }
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    match (pts.first(), pts.last()) {
        (Some(&a), Some(&b)) if a != b => Some((a, b)),
        _ => None,
    }
}

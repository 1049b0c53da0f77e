//! The `lambdaflow` command line: simulation, verification, extraction, order queries, the
//! Cantor demonstration, the axiom suites and plot data.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 a mathematical check failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dissipation::{gronwall_bound, is_solution, phi_continuity_check, sug_check, EdiReport};
use crate::error::{Error, Result};
use crate::harness::{run_scenario_suite, DEFAULT_TRIALS};
use crate::io::{csv_f64, read_json, series_csv, to_json, write_json};
use crate::metric::{metric_speed, Point, SampledCurve, TimeReparam};
use crate::mm::{mm_curve, MmConfig};
use crate::order::{
    extract_minimal, extract_unchecked, is_minimal, match_reparam_detailed, singular_dilate, Extraction,
};
use crate::problems::{Scenario, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MATH: i32 = 3;

/// Seed override read after argument parsing.
pub const SEED_ENV: &str = "LAMBDAFLOW_SEED";

#[derive(Parser, Debug)]
#[command(name = "lambdaflow", version, about = "Minimal solutions of metric gradient flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimizing-movement curve from an initial point.
    Simulate(SimulateArgs),
    /// Dissipation, upper-gradient, continuity and Gronwall checks on a curve file.
    Verify(VerifyArgs),
    /// Minimality verdict and plateau-deleted minimal curve.
    Minimal(MinimalArgs),
    /// Whether curve `u` is a slowed-down copy of curve `v`.
    Order(OrderArgs),
    /// Minimal Cantor crossing curve versus its singular time dilation.
    CantorDemo(CantorArgs),
    /// Seeded axiom and theorem suites on a scenario family.
    Axioms(AxiomsArgs),
    /// Energy, slope, speed and reparametrization series for plotting.
    Plotdata(PlotArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// quadratic, degenerate-power or cantor.
    #[arg(long, required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario config file `{"name": ..., "params": {...}}`.
    #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Scenario parameter `key=value`; values are read as JSON when they parse.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

impl ScenarioArgs {
    fn build(&self) -> Result<Scenario> {
        let mut cfg = match (&self.scenario, &self.config) {
            (Some(name), _) => ScenarioConfig::named(name),
            (None, Some(path)) => read_json::<ScenarioConfig>(path)
                .map_err(|e| Error::Config(format!("cannot read scenario config {}: {e}", path.display())))?,
            (None, None) => unreachable!("clap requires --scenario or --config"),
        };
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("parameter {kv:?} is not of the form key=value")))?;
            let value = serde_json::from_str::<Value>(v).unwrap_or_else(|_| Value::String(v.to_string()));
            cfg = cfg.with_param(k, value);
        }
        cfg.build()
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Initial point, comma-separated coordinates; defaults to the scenario's.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-3)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Curve output file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Residual tolerance; defaults to the grid-refinement estimate.
    #[arg(long)]
    tol: Option<f64>,
    /// Full residual report (JSON, or per-interval CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct MinimalArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Critical-measure tolerance; defaults to twice the longest non-critical step.
    #[arg(long)]
    tol: Option<f64>,
    /// Bundle `{curve, reparam, report}`; printed when absent. With `--format csv` this is the
    /// minimal curve, and `z` goes to a sibling `<stem>.z.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    v: PathBuf,
    /// Distance resolution; defaults to the scenario's.
    #[arg(long)]
    eps_d: Option<f64>,
    /// With `--format csv`, the witness as `t,z` rows (header only when there is none).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct CantorArgs {
    #[arg(long, default_value_t = 6)]
    depth: u32,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct AxiomsArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Reparametrization to plot; the extraction map of the input is used otherwise.
    #[arg(long)]
    reparam: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

/// What a subcommand reports: a JSON summary and its exit code.
struct Outcome {
    summary: Value,
    code: i32,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome { summary, code: EXIT_OK }
    }

    fn checked(summary: Value, passed: bool) -> Self {
        Outcome { summary, code: if passed { EXIT_OK } else { EXIT_MATH } }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code. The
/// summary goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(o) => {
            let _ = writeln!(out, "{}", to_json(&o.summary).unwrap_or_default());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::NotASolution(report) = &e {
                let _ = writeln!(out, "{}", to_json(&edi_summary(report)).unwrap_or_default());
            }
            if e.is_mathematical() {
                EXIT_MATH
            } else {
                EXIT_USAGE
            }
        }
    }
}

/// Entry point of the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Minimal(a) => minimal(a),
        Command::Order(a) => order(a),
        Command::CantorDemo(a) => cantor_demo(a),
        Command::Axioms(a) => axioms(a),
        Command::Plotdata(a) => plotdata(a),
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("--{name} must be positive, got {x}")))
    }
}

fn distinct(input: &Path, output: Option<&Path>) -> Result<()> {
    if output.is_some_and(|o| o == input) {
        return Err(Error::Config(format!("output path {} equals the input path", input.display())));
    }
    Ok(())
}

fn read_curve(path: &Path) -> Result<SampledCurve> {
    read_json(path).map_err(|e| Error::Config(format!("cannot read curve {}: {e}", path.display())))
}

fn reparam_csv(z: &TimeReparam) -> String {
    series_csv(("t", "z"), z.grid().iter().copied().zip(z.values().iter().copied()))
}

fn curve_csv(c: &SampledCurve) -> String {
    let mut s = String::from("t");
    for k in 0..c.dim() {
        s.push_str(&format!(",x{k}"));
    }
    s.push('\n');
    for (t, p) in c.times().iter().zip(c.points()) {
        s.push_str(&csv_f64(*t));
        for x in p.coords() {
            s.push(',');
            s.push_str(&csv_f64(*x));
        }
        s.push('\n');
    }
    s
}

fn edi_summary(r: &EdiReport) -> Value {
    json!({
        "passed": r.passed,
        "max_residual": r.max_residual,
        "worst_pair": r.worst_pair,
        "min_residual": r.min_residual,
        "tolerance": r.tolerance,
        "maximal_slope_tight": r.maximal_slope_tight,
    })
}

fn simulate(a: SimulateArgs) -> Result<Outcome> {
    let s = a.scenario.build()?;
    let tau = positive("tau", a.tau)?;
    let horizon = positive("horizon", a.horizon)?;
    let x0 = match a.x0 {
        Some(v) => Point::new(v)?,
        None => s.default_x0.clone(),
    };
    if x0.dim() != s.problem.space.dim() {
        return Err(Error::Config(format!("x0 has {} coordinates, scenario needs {}", x0.dim(), s.problem.space.dim())));
    }
    let curve = mm_curve(&s.problem, &MmConfig::new(tau, horizon, x0.clone()))?;
    let (_, edi) = is_solution(&s.problem, &curve, None)?;
    if let Some(path) = &a.out {
        match a.format {
            Format::Json => write_json(path, &curve)?,
            Format::Csv => fs::write(path, curve_csv(&curve))?,
        }
    }
    let exact_error = s.exact_at(&x0, horizon).map(|e| s.problem.space.distance(&e, curve.last()));
    Ok(Outcome::ok(json!({
        "scenario": s.name,
        "x0": x0.coords(),
        "tau": tau,
        "horizon": horizon,
        "nodes": curve.len(),
        "final": curve.last().coords(),
        "exact_final_error": exact_error,
        "edi": edi_summary(&edi),
    })))
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    distinct(&a.input, a.out.as_deref())?;
    let s = a.scenario.build()?;
    let c = read_curve(&a.input)?;
    let tol = a.tol.map(|t| positive("tol", t)).transpose()?;
    let p = &s.problem;
    let (passed, edi) = is_solution(p, &c, tol)?;
    let sug = sug_check(p, &c, edi.tolerance.max(1e-9))?;
    let cont = phi_continuity_check(p, &c, edi.tolerance.max(1e-12))?;
    let gron = gronwall_bound(p, &c, c.horizon())?;
    if let Some(path) = &a.out {
        match a.format {
            Format::Json => write_json(path, &edi)?,
            Format::Csv => fs::write(path, edi.to_csv())?,
        }
    }
    Ok(Outcome::checked(
        json!({
            "solution": passed,
            "edi": edi_summary(&edi),
            "upper_gradient": sug,
            "phi_continuity": cont,
            "gronwall": gron,
        }),
        passed,
    ))
}

#[derive(Serialize)]
struct MinimalBundle<'a> {
    curve: &'a SampledCurve,
    reparam: &'a TimeReparam,
    report: &'a crate::order::MinimalityReport,
}

fn minimal(a: MinimalArgs) -> Result<Outcome> {
    distinct(&a.input, a.out.as_deref())?;
    let s = a.scenario.build()?;
    let c = read_curve(&a.input)?;
    let tol = a.tol.map(|t| positive("tol", t)).transpose()?;
    let report = is_minimal(&s.problem, &c, tol)?;
    let Extraction { curve, reparam, .. } = extract_minimal(&s.problem, &c)?;
    let bundle = MinimalBundle { curve: &curve, reparam: &reparam, report: &report };
    match &a.out {
        Some(path) => {
            match a.format {
                Format::Json => write_json(path, &bundle)?,
                Format::Csv => {
                    fs::write(path, curve_csv(&curve))?;
                    fs::write(path.with_extension("z.csv"), reparam_csv(&reparam))?;
                }
            }
            Ok(Outcome::ok(json!({
                "verdict": report.verdict,
                "critical_measure": report.critical_measure,
                "t_star": report.t_star,
                "minimal_horizon": curve.horizon(),
                "out": path,
            })))
        }
        None => Ok(Outcome::ok(serde_json::to_value(&bundle)?)),
    }
}

fn order(a: OrderArgs) -> Result<Outcome> {
    distinct(&a.u, a.out.as_deref())?;
    distinct(&a.v, a.out.as_deref())?;
    let s = a.scenario.build()?;
    let (u, v) = (read_curve(&a.u)?, read_curve(&a.v)?);
    let eps_d = match a.eps_d {
        Some(e) => positive("eps-d", e)?,
        None => s.problem.eps_d,
    };
    let matched = match_reparam_detailed(&u, &v, &s.problem.space, eps_d);
    let result = match &matched {
        Ok(z) => json!({ "precedes": true, "witness": z, "eps_d": eps_d }),
        Err(f) => json!({ "precedes": false, "failure": f, "eps_d": eps_d }),
    };
    if let Some(path) = &a.out {
        match (a.format, &matched) {
            (Format::Json, _) => write_json(path, &result)?,
            (Format::Csv, Ok(z)) => fs::write(path, reparam_csv(z))?,
            (Format::Csv, Err(_)) => fs::write(path, "t,z\n")?,
        }
    }
    Ok(Outcome::ok(result))
}

fn cantor_demo(a: CantorArgs) -> Result<Outcome> {
    let s = ScenarioConfig::named("cantor").with_param("depth", a.depth).build()?;
    let setup = s.cantor.as_ref().expect("cantor scenario carries its setup");
    let p = &s.problem;
    let w = &setup.w;
    let u = singular_dilate(w, &setup.dilation())?;
    fs::create_dir_all(&a.out_dir)?;
    let dir = |name: &str| a.out_dir.join(name);

    let (w_ok, w_edi) = is_solution(p, w, None)?;
    // the dilated curve is judged against the residual scale of the curve it was built from
    let u_tol = 10.0 * w_edi.max_residual.max(w_edi.tolerance);
    let (u_ok, u_edi) = is_solution(p, &u, Some(u_tol))?;
    let w_min = is_minimal(p, w, None)?;
    let u_min = is_minimal(p, &u, None)?;
    let recovered = extract_unchecked(p, &u);
    let distance = recovered.curve.sup_distance(w, &p.space);

    let mut strict = Vec::new();
    for (name, c) in [("w", w), ("u", &u)] {
        let phi = p.phi_along(c)?;
        strict.push(phi.windows(2).all(|f| f[1] < f[0]));
        fs::write(dir(&format!("phi_{name}.csv")), series_csv(("t", "phi"), c.times().iter().copied().zip(phi)))?;
        write_json(&dir(&format!("{name}.json")), c)?;
    }
    write_json(&dir("edi_w.json"), &w_edi)?;
    write_json(&dir("edi_u.json"), &u_edi)?;
    write_json(&dir("minimal_w.json"), &w_min)?;
    write_json(&dir("minimal_u.json"), &u_min)?;
    write_json(&dir("recovered.json"), &recovered.curve)?;
    write_json(&dir("dilation.json"), &setup.dilation())?;

    let summary = json!({
        "depth": a.depth,
        "singular_mass": setup.singular_mass(),
        "grid_step": w.max_step(),
        "w": {
            "solution": w_ok, "max_residual": w_edi.max_residual, "phi_strictly_decreasing": strict[0],
            "verdict": w_min.verdict, "critical_measure": w_min.critical_measure,
        },
        "u": {
            "solution": u_ok, "max_residual": u_edi.max_residual, "phi_strictly_decreasing": strict[1],
            "verdict": u_min.verdict, "critical_measure": u_min.critical_measure,
        },
        "recovered_distance_to_w": distance,
        "out_dir": a.out_dir,
    });
    write_json(&dir("summary.json"), &summary)?;
    Ok(Outcome::ok(summary))
}

fn axioms(a: AxiomsArgs) -> Result<Outcome> {
    let seed = match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not a seed")))?,
        Err(_) => a.seed,
    };
    if a.trials == 0 {
        return Err(Error::Config("--trials must be positive".into()));
    }
    let s = a.scenario.build()?;
    let result = run_scenario_suite(&s, a.trials, seed)?;
    if let Some(path) = &a.out {
        write_json(path, &result)?;
    }
    let ok = result.all_ok();
    Ok(Outcome::checked(serde_json::to_value(&result)?, ok))
}

fn plotdata(a: PlotArgs) -> Result<Outcome> {
    let s = a.scenario.build()?;
    let c = read_curve(&a.input)?;
    let p = &s.problem;
    let z = match &a.reparam {
        Some(path) => read_json::<TimeReparam>(path)
            .map_err(|e| Error::Config(format!("cannot read reparametrization {}: {e}", path.display())))?,
        None => extract_unchecked(p, &c).reparam,
    };
    fs::create_dir_all(&a.out_dir)?;
    let t = c.times();
    let speed = metric_speed(&c, &p.space);
    let files = [
        ("phi.csv", series_csv(("t", "phi"), t.iter().copied().zip(p.phi_along(&c)?))),
        ("g.csv", series_csv(("t", "g"), t.iter().copied().zip(p.g_along(&c)))),
        ("speed.csv", series_csv(("t", "speed"), t.iter().copied().zip(speed))),
        ("z.csv", reparam_csv(&z)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = a.out_dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(Outcome::ok(json!({ "files": written })))
}

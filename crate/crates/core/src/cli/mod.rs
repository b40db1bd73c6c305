//! Command-line front end. Every subcommand reads a scenario file and writes
//! a CSV or JSON table.
//!
//! Exit codes: 0 on success, 2 for usage and validation errors, 3 for domain
//! errors such as an unstable queue. Failures print the error name first on
//! standard error.

mod scenario;
mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytics::ResetPolicy;
use crate::dist::DistributionSpec;
use crate::error::Error;
use crate::sim::{self, Quantity};

pub use scenario::{Scenario, SimSection, DEFAULT_JOBS, DEFAULT_REPLICATIONS, DEFAULT_SEED};
pub use table::{fmt_num, Table};

#[derive(Debug, Parser)]
#[command(name = "resetq", version, about = "S&X queues with service resetting")]
pub struct Cli {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulation seed; overrides the scenario file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Print the parsed scenario as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean service time over a grid of resetting rates or periods.
    MeanCurve(MeanCurveArgs),
    /// Whether a small Poissonian resetting rate lowers the mean service time.
    Condition(ConditionArgs),
    /// Optimal Poissonian rate and sharp period.
    Optimize(OptimizeArgs),
    /// Stationary queue-length distribution.
    QueuePmf(QueuePmfArgs),
    /// Discrete-event simulation of the queue.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Rate,
    Period,
}

#[derive(Debug, Args)]
struct Grid {
    /// Comma-separated ascending values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Vec<f64>,
    /// Geometric grid `start,stop,count`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    log_grid: Vec<f64>,
}

#[derive(Debug, Args)]
struct MeanCurveArgs {
    #[arg(long, value_enum)]
    param: SweepParam,
    #[command(flatten)]
    grid: Grid,
    /// Add simulated means with confidence half-widths.
    #[arg(long)]
    sim: bool,
    /// Jobs per replication for `--sim`.
    #[arg(long, default_value_t = 10_000)]
    jobs: u64,
}

#[derive(Debug, Args)]
struct ConditionArgs {
    /// Evaluate over a two-parameter grid instead of a single report.
    #[arg(long)]
    sweep: bool,
    /// Parameter path such as `slowdown.shape` or `jobsize.variance`.
    #[arg(long, requires = "sweep")]
    x_param: Option<String>,
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    x_grid: Vec<f64>,
    #[arg(long, requires = "sweep")]
    y_param: Option<String>,
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    y_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizeKind {
    Poisson,
    Sharp,
    Both,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = OptimizeKind::Both)]
    kind: OptimizeKind,
}

#[derive(Debug, Args)]
struct QueuePmfArgs {
    /// Truncation; chosen automatically when omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Add the simulated time-averaged histogram.
    #[arg(long)]
    sim: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Compare against the analytic values that are available.
    #[arg(long)]
    compare: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Model(e) if e.is_domain() => 3,
            _ => 2,
        }
    }

    fn report(&self) -> String {
        match self {
            Failure::Usage(m) => format!("UsageError: {m}"),
            Failure::Io(m) => format!("IoError: {m}"),
            Failure::Model(e) => format!("{}: {e}", e.name()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "UsageError: {text}");
            }
            return code;
        }
    };
    match crate::parallel::install(|| execute(&cli)) {
        Ok(text) => match emit(&cli, &text, stdout) {
            Ok(()) => 0,
            Err(f) => {
                let _ = writeln!(stderr, "{}", f.report());
                f.exit_code()
            }
        },
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.report());
            f.exit_code()
        }
    }
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Outcome<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn load(cli: &Cli) -> Outcome<Scenario> {
    let path = cli.scenario.as_ref().ok_or_else(|| Failure::Usage("--scenario <path> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Scenario::from_json(&text)?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Outcome<String> {
    let scenario = load(cli)?;
    if cli.print_config {
        let mut s = scenario.to_json();
        s.push('\n');
        return Ok(s);
    }
    let Some(command) = &cli.command else {
        return Err(Failure::Usage("a subcommand is required".into()));
    };
    match command {
        Command::MeanCurve(a) => mean_curve(cli, &scenario, a),
        Command::Condition(a) => condition(cli, &scenario, a),
        Command::Optimize(a) => optimize(cli, &scenario, a),
        Command::QueuePmf(a) => queue_pmf(cli, &scenario, a),
        Command::Simulate(a) => simulate(cli, &scenario, a),
    }
}

fn grid_values(g: &Grid, allow_zero: bool) -> Outcome<Vec<f64>> {
    let values = match (g.grid.is_empty(), g.log_grid.as_slice()) {
        (false, []) => g.grid.clone(),
        (true, &[start, stop, count]) => {
            if !(start > 0.0 && stop > start && count >= 2.0 && count.fract() == 0.0) {
                return Err(Failure::Usage("--log-grid needs 0 < start < stop and an integer count >= 2".into()));
            }
            let n = count as usize;
            (0..n).map(|i| start * (stop / start).powf(i as f64 / (n - 1) as f64)).collect()
        }
        (true, []) => return Err(Failure::Usage("empty grid: pass --grid or --log-grid".into())),
        _ => return Err(Failure::Usage("pass exactly one of --grid and --log-grid with start,stop,count".into())),
    };
    let lowest_ok = |v: f64| if allow_zero { v >= 0.0 } else { v > 0.0 };
    if values.iter().any(|v| !v.is_finite() || !lowest_ok(*v)) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::Usage("grid values must be positive and strictly ascending".into()));
    }
    Ok(values)
}

fn mean_curve(cli: &Cli, sc: &Scenario, a: &MeanCurveArgs) -> Outcome<String> {
    let values = grid_values(&a.grid, a.param == SweepParam::Rate)?;
    let policy_at = |v: f64| match a.param {
        SweepParam::Rate if v == 0.0 => ResetPolicy::None,
        SweepParam::Rate => ResetPolicy::Poisson { rate: v },
        SweepParam::Period => ResetPolicy::Sharp { period: v },
    };
    let sec = sc.sim.unwrap_or_default();
    let reps = sec.replications.unwrap_or(DEFAULT_REPLICATIONS);
    let seed = cli.seed.or(sec.seed).unwrap_or(DEFAULT_SEED);
    let rows: Vec<(f64, Result<f64, Error>, Option<Result<sim::Estimate, Error>>)> = values
        .par_iter()
        .map(|&v| {
            let p = policy_at(v);
            let analytic = sc.model.mean(&p);
            let simulated = a.sim.then(|| sim::estimate_mean_service(&sc.model, &p, a.jobs, reps, seed));
            (v, analytic, simulated)
        })
        .collect();
    let param_name = match a.param {
        SweepParam::Rate => "rate",
        SweepParam::Period => "period",
    };
    match cli.format {
        Format::Csv => {
            let mut t = Table::new(&["param_value", "mean_analytic", "mean_sim", "sim_ci"]);
            for (v, an, si) in &rows {
                let cell = |r: &Result<f64, Error>| match r {
                    Ok(x) => fmt_num(*x),
                    Err(e) => format!("error:{}", e.name()),
                };
                let (ms, ci) = match si {
                    None => (String::new(), String::new()),
                    Some(Ok(e)) => (fmt_num(e.mean), e.half_width.map(fmt_num).unwrap_or_default()),
                    Some(Err(e)) => (format!("error:{}", e.name()), String::new()),
                };
                t.push(vec![fmt_num(*v), cell(an), ms, ci]);
            }
            Ok(t.to_csv())
        }
        Format::Json => {
            let out: Vec<Value> = rows
                .iter()
                .map(|(v, an, si)| {
                    let mut o = json!({ "param": param_name, "param_value": v });
                    match an {
                        Ok(x) => o["mean_analytic"] = json!(x),
                        Err(e) => o["error"] = json!(e.name()),
                    }
                    match si {
                        Some(Ok(e)) => {
                            o["mean_sim"] = json!(e.mean);
                            o["sim_ci"] = json!(e.half_width);
                        }
                        Some(Err(e)) => o["sim_error"] = json!(e.name()),
                        None => {}
                    }
                    o
                })
                .collect();
            Ok(to_json(&out))
        }
    }
}

/// Applies a parameter path such as `slowdown.shape` to the model.
fn set_model_param(sc: &Scenario, path: &str, v: f64) -> Outcome<crate::analytics::ServiceModel> {
    let (side, name) = path
        .split_once('.')
        .ok_or_else(|| Failure::Usage(format!("parameter path `{path}` must look like slowdown.<name>")))?;
    let mut m = sc.model;
    let target: &mut DistributionSpec = match side {
        "slowdown" => &mut m.slowdown,
        "jobsize" => &mut m.jobsize,
        _ => return Err(Failure::Usage(format!("unknown parameter group `{side}`"))),
    };
    *target = target.with_param(name, v)?;
    Ok(m)
}

fn condition(cli: &Cli, sc: &Scenario, a: &ConditionArgs) -> Outcome<String> {
    if !a.sweep {
        let r = sc.model.benefit_diagnosis()?;
        return Ok(match cli.format {
            Format::Json => to_json(&r),
            Format::Csv => {
                let mut t =
                    Table::new(&["mean_no_reset", "slope_at_zero", "beneficial", "condition_lhs", "condition_rhs"]);
                t.push(vec![
                    fmt_num(r.mean_no_reset),
                    fmt_num(r.slope_at_zero),
                    r.beneficial.to_string(),
                    fmt_num(r.condition_lhs),
                    fmt_num(r.condition_rhs),
                ]);
                t.to_csv()
            }
        });
    }
    let (Some(xp), Some(yp)) = (&a.x_param, &a.y_param) else {
        return Err(Failure::Usage("--sweep needs --x-param and --y-param".into()));
    };
    if a.x_grid.is_empty() || a.y_grid.is_empty() {
        return Err(Failure::Usage("empty grid: pass --x-grid and --y-grid".into()));
    }
    let mut cells = Vec::new();
    for &y in &a.y_grid {
        for &x in &a.x_grid {
            let m = set_model_param(sc, xp, x)?;
            let m = set_model_param(&Scenario { model: m, ..*sc }, yp, y)?;
            cells.push((x, y, m.benefit_diagnosis()?));
        }
    }
    Ok(match cli.format {
        Format::Json => {
            let out: Vec<Value> = cells
                .iter()
                .map(|(x, y, r)| json!({ xp.as_str(): x, yp.as_str(): y, "report": r }))
                .collect();
            to_json(&out)
        }
        Format::Csv => {
            let mut t = Table::new(&[xp, yp, "beneficial", "slope_at_zero", "condition_lhs", "condition_rhs"]);
            for (x, y, r) in &cells {
                t.push(vec![
                    fmt_num(*x),
                    fmt_num(*y),
                    r.beneficial.to_string(),
                    fmt_num(r.slope_at_zero),
                    fmt_num(r.condition_lhs),
                    fmt_num(r.condition_rhs),
                ]);
            }
            t.to_csv()
        }
    })
}

fn optimize(cli: &Cli, sc: &Scenario, a: &OptimizeArgs) -> Outcome<String> {
    let m = &sc.model;
    let poisson = match a.kind {
        OptimizeKind::Poisson | OptimizeKind::Both => Some(m.optimal_poisson_rate(None)?),
        OptimizeKind::Sharp => None,
    };
    let sharp = match a.kind {
        OptimizeKind::Sharp | OptimizeKind::Both => Some(m.optimal_sharp_period(None)?),
        OptimizeKind::Poisson => None,
    };
    Ok(match cli.format {
        Format::Json => {
            let mut o = json!({ "mean_no_reset": m.mean_no_reset() });
            if let Some(p) = &poisson {
                o["poisson"] = json!(p);
            }
            if let Some(s) = &sharp {
                o["sharp"] = json!(s);
            }
            to_json(&o)
        }
        Format::Csv => {
            let mut t = Table::new(&["policy", "parameter", "optimal_mean", "mean_no_reset", "note"]);
            let note = |n: &Option<String>| n.clone().unwrap_or_default().replace(',', ";");
            if let Some(p) = &poisson {
                t.push(vec!["poisson".into(), fmt_num(p.rate), fmt_num(p.mean), fmt_num(p.mean_no_reset), note(&p.note)]);
            }
            if let Some(s) = &sharp {
                let period = s.period.map(fmt_num).unwrap_or_else(|| "inf".into());
                t.push(vec!["sharp".into(), period, fmt_num(s.mean), fmt_num(s.mean_no_reset), note(&s.note)]);
            }
            t.to_csv()
        }
    })
}

fn queue_pmf(cli: &Cli, sc: &Scenario, a: &QueuePmfArgs) -> Outcome<String> {
    let q = sc.queue()?;
    let pmf = match a.n {
        Some(n) => q.queue_length_pmf(n)?,
        None => q.queue_length_pmf_auto()?,
    };
    let hist = if a.sim { Some(sim::simulate(&sc.sim_config(cli.seed)?)?.queue_length_histogram) } else { None };
    Ok(match cli.format {
        Format::Json => {
            let mut o = json!({
                "probs": pmf.probs,
                "tail_mass": pmf.tail_mass,
                "truncation": pmf.truncation,
                "mean_queue_length": q.mean_queue_length().ok(),
            });
            if let Some(h) = &hist {
                o["sim_histogram"] = json!(h);
            }
            to_json(&o)
        }
        Format::Csv => {
            let header: &[&str] = if hist.is_some() { &["n", "p_analytic", "p_sim"] } else { &["n", "p_analytic"] };
            let mut t = Table::new(header);
            for (n, p) in pmf.probs.iter().enumerate() {
                let mut row = vec![n.to_string(), fmt_num(*p)];
                if let Some(h) = &hist {
                    row.push(fmt_num(h.get(n).copied().unwrap_or(0.0)));
                }
                t.push(row);
            }
            t.to_csv()
        }
    })
}

fn simulate(cli: &Cli, sc: &Scenario, a: &SimulateArgs) -> Outcome<String> {
    let cfg = sc.sim_config(cli.seed)?;
    let stats = sim::simulate(&cfg)?;
    let comparison = if a.compare {
        let mut analytic = vec![(Quantity::MeanService, sc.model.mean(&sc.policy)?)];
        if let Ok(q) = sc.queue() {
            if let Ok(l) = q.mean_queue_length() {
                analytic.push((Quantity::MeanQueueLength, l));
                analytic.push((Quantity::MeanSojourn, l / q.arrival_rate));
            }
        }
        Some(stats.compare(&analytic))
    } else {
        None
    };
    Ok(match cli.format {
        Format::Json => match &comparison {
            Some(c) => to_json(&json!({ "stats": stats, "comparison": c })),
            None => to_json(&stats),
        },
        Format::Csv => {
            let mut t = Table::new(&["quantity", "mean", "half_width", "analytic", "z_score", "pass"]);
            let rows = [
                (Quantity::MeanService, stats.mean_service),
                (Quantity::MeanQueueLength, stats.mean_queue_length),
                (Quantity::MeanSojourn, stats.mean_sojourn),
                (Quantity::AttemptsPerJob, stats.attempts_per_job),
            ];
            for (q, e) in rows {
                let name = serde_json::to_value(q).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                let cmp = comparison.as_ref().and_then(|c| c.rows.iter().find(|r| r.quantity == q));
                t.push(vec![
                    name,
                    fmt_num(e.mean),
                    e.half_width.map(fmt_num).unwrap_or_default(),
                    cmp.map(|r| fmt_num(r.analytic)).unwrap_or_default(),
                    cmp.and_then(|r| r.z_score).map(fmt_num).unwrap_or_default(),
                    cmp.map(|r| r.pass.to_string()).unwrap_or_default(),
                ]);
            }
            t.to_csv()
        }
    })
}

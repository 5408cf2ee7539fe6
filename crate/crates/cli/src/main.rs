//! `rabi`: solve, sweep, cross-check, fit and render quantum Rabi ground states.
//!
//! Exit codes: 0 success, 2 invalid arguments or input, 3 solver failure,
//! 4 validation mismatch.

mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rabi_core::io::config::{OutputFormat, RunConfig};
use rabi_core::io::csv::{read_records, write_records};
use rabi_core::io::svg::render_heatmap;
use rabi_core::oracle::{oracle_statistics, OracleConfig};
use rabi_core::ridge::{extract_ridge, fit_quadratic, grid_axes, refine_ridge};
use rabi_core::{run_sweep, solve_point, Execution, RabiError, RabiParams};
use serde_json::json;

/// Tolerance on statistics fields for `solve --validate`.
const VALIDATE_STATS_TOL: f64 = 1e-6;
/// Tolerance on the energy for `solve --validate`.
const VALIDATE_ENERGY_TOL: f64 = 1e-7;

#[derive(Parser, Debug)]
#[command(name = "rabi", version, about = "Quantum Rabi ground state: spectral solver, photon statistics and sweeps")]
struct Cli {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` assignments applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one parameter point.
    Solve(PointArgs),
    /// Sweep a rectangular (delta, g) grid.
    Sweep(SweepArgs),
    /// Brute-force diagonalization at one point.
    Oracle(PointArgs),
    /// Extract and fit the ridge of a swept field.
    FitRidge(FitArgs),
    /// Render a swept field as an SVG heatmap.
    Render(RenderArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, allow_hyphen_values = true)]
    g: f64,
    /// Also run the oracle and report per-field differences.
    #[arg(long)]
    validate: bool,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    delta_lo: Option<f64>,
    #[arg(long)]
    delta_hi: Option<f64>,
    #[arg(long)]
    delta_steps: Option<usize>,
    #[arg(long)]
    g_lo: Option<f64>,
    #[arg(long)]
    g_hi: Option<f64>,
    #[arg(long)]
    g_steps: Option<usize>,
    /// Steps on both axes.
    #[arg(long)]
    steps: Option<usize>,
    /// `spectral` or `oracle`.
    #[arg(long)]
    method: Option<String>,
    /// Worker threads (0 = one per core); overrides RABI_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    /// `csv`, `json` or `svg`.
    #[arg(long)]
    format: Option<String>,
    /// Field rendered by the svg format.
    #[arg(long)]
    field: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Sweep CSV.
    input: PathBuf,
    #[arg(long, default_value = "r")]
    field: String,
    /// Re-solve each ridge point by a local search instead of interpolation.
    #[arg(long)]
    refine: bool,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Sweep CSV.
    input: PathBuf,
    #[arg(long)]
    field: String,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(RabiError),
    Mismatch(String),
}

impl From<RabiError> for Failure {
    fn from(e: RabiError) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                RabiError::InvalidParams(_)
                | RabiError::Config(_)
                | RabiError::UnknownField(_)
                | RabiError::Format(_)
                | RabiError::Io(_)
                | RabiError::NonRectangularGrid(_)
                | RabiError::GridIncomplete { .. } => 2,
                _ => 3,
            },
            Failure::Mismatch(_) => 4,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Core(e) => e.code(),
            Failure::Mismatch(_) => "validation_mismatch",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Mismatch(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Ok(w) = std::env::var("RABI_WORKERS") {
        cfg.set("workers", &w).map_err(|e| Failure::Usage(format!("RABI_WORKERS: {e}")))?;
    }
    for kv in &cli.set {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    Ok(cfg)
}

fn params(delta: f64, g: f64) -> Result<RabiParams, Failure> {
    Ok(RabiParams::normalized(delta, g)?)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Core(RabiError::Io(format!("{}: {e}", p.display())))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Core(RabiError::Io(e.to_string()))),
    }
}

fn cmd_solve(cfg: &RunConfig, args: &PointArgs) -> Outcome {
    cfg.validate()?;
    let p = params(args.delta, args.g)?;
    let solver = cfg.solver();
    let sol = solve_point(&p, &solver)?;
    let validation = if args.validate {
        let o = oracle_statistics(&p, &solver.oracle)?;
        let d = report::deltas(&sol, &o);
        Some((o, d))
    } else {
        None
    };
    let worst = validation.as_ref().and_then(|(_, d)| {
        d.iter()
            .find(|(name, v)| {
                let tol = if name == "energy" { VALIDATE_ENERGY_TOL } else { VALIDATE_STATS_TOL };
                v.is_nan() || *v >= tol
            })
            .cloned()
    });

    match args.format {
        TextFormat::Json => {
            let mut doc = report::solution_json(&sol);
            doc["version"] = json!(report::VERSION);
            doc["config"] = serde_json::to_value(cfg).expect("config serializes");
            if let Some((o, d)) = &validation {
                doc["validation"] = json!({
                    "oracle": report::oracle_json(o),
                    "deltas": d.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
                    "passed": worst.is_none(),
                });
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        TextFormat::Text => {
            report::print_lines(&report::solution_lines(&sol));
            if let Some((o, d)) = &validation {
                println!();
                println!("oracle e0 {} (n_max {})", rabi_core::io::fmt_float(o.e0), o.n_max_used);
                let lines: Vec<(String, String)> =
                    d.iter().map(|(k, v)| (format!("delta_{k}"), format!("{v:.3e}"))).collect();
                report::print_lines(&lines);
            }
        }
    }
    match worst {
        Some((name, v)) => Err(Failure::Mismatch(format!("`{name}` differs from the oracle by {v:e}"))),
        None => Ok(()),
    }
}

fn cmd_oracle(cfg: &RunConfig, args: &PointArgs) -> Outcome {
    cfg.validate()?;
    let p = params(args.delta, args.g)?;
    let oc = OracleConfig { e0_tolerance: cfg.convergence_target, n_cap: cfg.oracle_n_cap, ..OracleConfig::default() };
    let o = oracle_statistics(&p, &oc)?;
    match args.format {
        TextFormat::Json => {
            let mut doc = report::oracle_json(&o);
            doc["version"] = json!(report::VERSION);
            doc["config"] = serde_json::to_value(cfg).expect("config serializes");
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        TextFormat::Text => report::print_lines(&report::oracle_lines(&o)),
    }
    Ok(())
}

fn cmd_sweep(mut cfg: RunConfig, args: &SweepArgs) -> Outcome {
    let pairs: [(&str, Option<String>); 12] = [
        ("delta_lo", args.delta_lo.map(|v| v.to_string())),
        ("delta_hi", args.delta_hi.map(|v| v.to_string())),
        ("steps", args.steps.map(|v| v.to_string())),
        ("delta_steps", args.delta_steps.map(|v| v.to_string())),
        ("g_lo", args.g_lo.map(|v| v.to_string())),
        ("g_hi", args.g_hi.map(|v| v.to_string())),
        ("g_steps", args.g_steps.map(|v| v.to_string())),
        ("method", args.method.clone()),
        ("workers", args.workers.map(|v| v.to_string())),
        ("format", args.format.clone()),
        ("field", args.field.clone()),
        ("output", args.output.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    cfg.validate()?;
    let records = run_sweep(&cfg.sweep_spec(), Execution::Parallel { workers: cfg.workers })?;
    let bytes = match cfg.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_records(&mut buf, &records)?;
            buf
        }
        OutputFormat::Json => {
            let doc = json!({
                "version": report::VERSION,
                "config": serde_json::to_value(&cfg).expect("config serializes"),
                "records": records,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s.into_bytes()
        }
        OutputFormat::Svg => render_heatmap(&records, &cfg.field)?.into_bytes(),
    };
    write_output(cfg.output.as_deref(), &bytes)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} grid points failed; see the error column", records.len());
    }
    Ok(())
}

fn read_csv(path: &Path) -> Result<Vec<rabi_core::SweepRecord>, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::Core(RabiError::Io(format!("{}: {e}", path.display()))))?;
    Ok(read_records(file)?)
}

fn cmd_fit_ridge(cfg: &RunConfig, args: &FitArgs) -> Outcome {
    let records = read_csv(&args.input)?;
    let ridge = extract_ridge(&records, &args.field)?;
    let points = if args.refine {
        let (deltas, _) = grid_axes(&records)?;
        let width = deltas.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        refine_ridge(&ridge.points, width, &args.field, cfg.method, &cfg.solver())?
    } else {
        ridge.points.clone()
    };
    let fit = fit_quadratic(&points)?;
    match args.format {
        TextFormat::Json => {
            let mut doc = report::ridge_json(&ridge, &fit, &args.field, args.refine);
            doc["version"] = json!(report::VERSION);
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        TextFormat::Text => report::print_ridge(&ridge, &fit, &args.field, args.refine),
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Outcome {
    let records = read_csv(&args.input)?;
    let svg = render_heatmap(&records, &args.field)?;
    write_output(Some(&args.output), svg.as_bytes())
}

fn run(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Solve(a) => cmd_solve(&cfg, a),
        Command::Oracle(a) => cmd_oracle(&cfg, a),
        Command::Sweep(a) => cmd_sweep(cfg, a),
        Command::FitRidge(a) => cmd_fit_ridge(&cfg, a),
        Command::Render(a) => cmd_render(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code(), f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

//! gchlab: simulate the generalized peakon family, verify its exact laws,
//! sweep parameter grids, and emit closed-form reference solutions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gchlab_core::config::load_config;
use gchlab_core::dynamics::EvolveStatus;
use gchlab_core::exact::{emit, ExactKind};
use gchlab_core::run::{simulate, sweep, SweepAxis};
use gchlab_core::verify::{run_suite, SUITE_NAMES};
use gchlab_core::Grid;

#[derive(Parser)]
#[command(name = "gchlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured trajectory and write timeseries.csv,
    /// snapshots/, and summary.json.
    Simulate(SimulateArgs),
    /// Run a named verification suite and print one line per property.
    Verify {
        /// One of the named suites, or "all".
        suite: String,
    },
    /// Run a grid of simulations over scalar config axes and write
    /// classification.csv.
    Sweep(SweepArgs),
    /// Emit closed-form reference solutions at the requested times.
    Exact(ExactArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Axis spec "dotted.path=v1,v2,...", repeatable.
    #[arg(long = "axis")]
    axes: Vec<String>,
    #[arg(long, default_value = "sweep_out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    /// ch_peakon | novikov_peakon | uniform_decay
    #[arg(long)]
    kind: String,
    /// JSON object with the kind's parameters, e.g. '{"c": 1.0}'.
    #[arg(long)]
    params: String,
    /// Grid as "L,nx".
    #[arg(long)]
    grid: String,
    /// Comma-separated sample times.
    #[arg(long)]
    times: String,
    #[arg(long, default_value = "exact_out")]
    out: PathBuf,
}

fn parse_axis(spec: &str) -> Result<SweepAxis, String> {
    let (path, values) = spec
        .split_once('=')
        .ok_or_else(|| format!("axis '{spec}' must look like path=v1,v2"))?;
    let values: Result<Vec<f64>, _> = values.split(',').map(str::parse::<f64>).collect();
    Ok(SweepAxis {
        path: path.trim().to_string(),
        values: values.map_err(|e| format!("axis '{spec}': {e}"))?,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, String> {
    let cfg = load_config(&args.config).map_err(|e| e.to_string())?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let art = simulate(&cfg, &out_dir).map_err(|e| e.to_string())?;
    let s = &art.summary;
    println!(
        "status {:?} after {} steps (t = {:.6}, wall {} ms)",
        s.status, s.steps, s.final_time, s.wall_ms
    );
    if let Some(b) = &s.blowup {
        println!(
            "blow-up diagnostics: t = {:.6}, sup|u| = {:.6e}, sup|u_x| = {:.6e}, trigger {:?}",
            b.t, b.sup_u, b.sup_ux, b.trigger
        );
    }
    println!("artifacts in {}", art.out_dir.display());
    Ok(match s.status {
        EvolveStatus::ReachedFinalTime => ExitCode::SUCCESS,
        EvolveStatus::BlowupDetected => ExitCode::from(2),
        EvolveStatus::StepUnderflow => ExitCode::from(3),
    })
}

fn cmd_verify(suite: &str) -> Result<ExitCode, String> {
    let names: Vec<&str> = if suite == "all" {
        SUITE_NAMES.to_vec()
    } else {
        vec![suite]
    };
    let mut all_pass = true;
    for name in names {
        let report = run_suite(name).map_err(|e| e.to_string())?;
        print!("{}", report.render());
        all_pass &= report.passed();
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, String> {
    let cfg = load_config(&args.config).map_err(|e| e.to_string())?;
    let axes: Result<Vec<SweepAxis>, String> = args.axes.iter().map(|s| parse_axis(s)).collect();
    let axes = axes?;
    if axes.is_empty() {
        return Err("sweep needs at least one --axis".into());
    }
    let cells = sweep(&cfg, &axes, &args.out).map_err(|e| e.to_string())?;
    for cell in &cells {
        println!(
            "{:?} -> {} (threshold {:?}, below {:?})",
            cell.axis_values, cell.outcome, cell.threshold, cell.below_threshold
        );
    }
    println!(
        "classification in {}",
        args.out.join("classification.csv").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_exact(args: &ExactArgs) -> Result<ExitCode, String> {
    let params: serde_json::Value =
        serde_json::from_str(&args.params).map_err(|e| format!("--params: {e}"))?;
    let kind = ExactKind::parse(&args.kind, &params).map_err(|e| e.to_string())?;
    let (l, nx) = args
        .grid
        .split_once(',')
        .ok_or_else(|| "grid must be L,nx".to_string())?;
    let l: f64 = l.trim().parse().map_err(|e| format!("--grid L: {e}"))?;
    let nx: usize = nx.trim().parse().map_err(|e| format!("--grid nx: {e}"))?;
    let grid = Grid::new(l, nx).map_err(|e| e.to_string())?;
    let times: Result<Vec<f64>, _> = args.times.split(',').map(str::parse::<f64>).collect();
    let times = times.map_err(|e| format!("--times: {e}"))?;
    emit(&kind, &grid, &times, &args.out).map_err(|e| e.to_string())?;
    println!("wrote {} snapshots to {}", times.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify { suite } => cmd_verify(suite),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Exact(args) => cmd_exact(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

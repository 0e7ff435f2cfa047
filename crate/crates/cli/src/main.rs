use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subdiff::experiment::{execute, verify_report, ExperimentConfig, ExperimentSummary};

#[derive(Parser)]
#[command(name = "subdiff", version, about = "Adaptive time stepping for subdiffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for independent runs.
    #[arg(long, global = true, default_value_t = default_threads())]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one α and method for every TOL (or mesh size) in the config.
    Run { config: PathBuf },
    /// Run the full α × method × TOL grid of the config.
    Sweep { config: PathBuf },
    /// Evaluate the direct error bound for a stored report.
    VerifyBounds { report: PathBuf },
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn print_summary(summary: &ExperimentSummary) {
    println!("{:<48} {:>8} {:>12} {:>8}  status", "run", "M", "error", "time[s]");
    for r in &summary.runs {
        let m = r.intervals.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
        let e = r.max_error.map(|e| format!("{e:.4e}")).unwrap_or_else(|| "-".into());
        let w = r.wall_time_s.map(|w| format!("{w:.2}")).unwrap_or_else(|| "-".into());
        let status = match (&r.failure, r.bounds_ok) {
            (Some(f), _) => format!("failed: {f}"),
            (None, Some(false)) => "bound violated".into(),
            (None, Some(true)) => "bound ok".into(),
            (None, None) => "ok".into(),
        };
        println!("{:<48} {m:>8} {e:>12} {w:>8}  {status}", r.label);
    }
    for c in &summary.convergence {
        if let Some(s) = c.slope {
            println!("alpha={} {}: slope {s:.3}", c.alpha, c.method);
        }
    }
}

fn run_config(path: &Path, sweep: bool, cli: &Cli) -> Result<bool, subdiff::Error> {
    let config = ExperimentConfig::load(path)?;
    let out = cli.out.clone().or_else(|| config.out_dir.clone());
    let summary = execute(&config, sweep, out.as_deref(), cli.threads)?;
    print_summary(&summary);
    Ok(summary.success())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run_config(config, false, &cli),
        Command::Sweep { config } => run_config(config, true, &cli),
        Command::VerifyBounds { report } => verify_report(report, cli.out.as_deref()).map(|v| {
            println!(
                "{} samples, {} above the direct bound, {} above the guaranteed bound, recheck ratio {:.3}",
                v.trace.times.len(),
                v.check.direct_violations.unwrap_or(0),
                v.check.guaranteed_violations,
                v.check.recheck_ratio
            );
            v.passed()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use gbb_core::harness::{
    budget_trajectory, fit_scaling_exponent, read_regret_points, run_experiment_in,
    ExperimentConfig, OUTPUT_ROOT_ENV,
};
use gbb_core::runlog::{Phase, RunLog};

#[derive(Parser)]
#[command(
    name = "gbb",
    version,
    about = "Bilateral trade experiments with one-bit feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (horizon, seed) cell of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit the log-log slope of regret against horizon.
    Fit {
        /// A summary.csv (its mean rows are used) or a CSV whose first two
        /// columns are horizon and regret.
        #[arg(long)]
        input: PathBuf,
    },
    /// Summarize a run log.
    Inspect {
        #[arg(long)]
        runlog: PathBuf,
    },
}

fn run(config: &Path) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::load(config)
        .with_context(|| format!("loading config {}", config.display()))?;
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from);
    let out_dir = cfg.resolve_output_dir(root.as_deref());
    let report = run_experiment_in(&cfg, &out_dir)?;
    println!(
        "instance {} algorithm {} opt {}",
        report.instance, report.algorithm, report.opt
    );
    for a in &report.aggregates {
        println!(
            "T {:>8}  runs {:>3}  mean regret {:>12.3}  mean profit {:>10.3}  negative budget {:.3}",
            a.horizon, a.runs, a.mean_regret, a.mean_profit, a.negative_budget_fraction
        );
    }
    if let Some(fit) = &report.fit {
        println!(
            "slope {:.4} +- {:.4} over {} horizons",
            fit.slope, fit.stderr, fit.points
        );
    }
    if let Some(p) = report.failure_probability {
        println!("confidence statements fail with probability at most {p}");
    }
    println!("outputs in {}", out_dir.display());
    Ok(())
}

fn fit(input: &Path) -> anyhow::Result<()> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let points = read_regret_points(&text)?;
    let fit = fit_scaling_exponent(&points)?;
    println!(
        "slope {} stderr {} intercept {} points {}",
        fit.slope, fit.stderr, fit.intercept, fit.points
    );
    Ok(())
}

fn inspect(path: &Path) -> anyhow::Result<()> {
    let log = RunLog::load(path).with_context(|| format!("reading {}", path.display()))?;
    let traj = budget_trajectory(&log);
    println!("rounds {}", log.len());
    for (phase, n) in Phase::ALL.iter().zip(log.phase_counts()) {
        println!("{:<12} {n}", phase.name());
    }
    println!("cumulative profit {}", traj.final_value());
    println!("lowest cumulative profit {}", traj.min_value());
    println!("expected gft {}", log.total_expected_gft());
    println!("realized gft {}", log.total_realized_gft());
    println!("trades {}", log.records.iter().filter(|r| r.bit).count());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Fit { input } => fit(input),
        Command::Inspect { runlog } => inspect(runlog),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Experiment orchestration: configs, builtin instances, seeded multi-run
//! execution, regret reports and plot data.
//!
//! A config is a TOML document:
//!
//! ```toml
//! instance = "product-uniform"        # or instance_file = "path/to/instance.toml"
//! algorithm = "gbb-3phase"            # or "fixed-price" (with price = 0.5), "diagonal-etc"
//! horizons = [4096, 8192, 16384]
//! seeds = [0, 1, 2]
//! delta = 0.1
//! output_dir = "out/product-uniform"
//!
//! [multipliers]
//! c_k = 0.75
//! c_n = 0.25
//! c_beta = 0.005
//! ```
//!
//! Output files: `summary.csv`, `regret_vs_t.csv` and `report.json` (see
//! [`report`]), `budget.csv` with columns `horizon,seed,round,cumulative_profit`
//! (at most [`BUDGET_POINTS`] rows per run), and `runlogs/T{T}_seed{seed}.csv`
//! when `write_runlogs` is set.

pub mod analysis;
pub mod report;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{diagonal_etc_policy, evaluate_policy, fixed_price_policy};
use crate::env::io::toml_error;
use crate::env::parse_instance;
use crate::env::{make_needle_instance, CellDensity, JointValuationModel, PointMassMixture};
use crate::error::{invalid, Result};
use crate::learner::{configure, run_episode, ScheduleMultipliers, DEFAULT_CONFIDENCE_CONSTANT};
use crate::oracle::{benchmark_opt, DEFAULT_K_REF};
use crate::runlog::RunLog;

pub use analysis::{
    budget_trajectory, fit_scaling_exponent, quantile, BudgetTrajectory, ScalingFit,
};
pub use report::{
    emit_outputs, read_regret_points, CellReport, HorizonAggregate, OutputFormat, RegretReport,
    REPORT_SCHEMA, SUMMARY_HEADER,
};

/// Environment variable that, when set, is the base of relative output
/// directories.
pub const OUTPUT_ROOT_ENV: &str = "GBB_OUTPUT_ROOT";

/// Points per run kept in `budget.csv`.
pub const BUDGET_POINTS: usize = 512;

/// Tolerance of the regret recomputation check.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-8;

/// Schedule multipliers used by the benchmark experiments. The defaults of
/// one spend the whole horizon collecting profit at the horizons a desktop
/// run can afford.
pub const BENCHMARK_MULTIPLIERS: ScheduleMultipliers = ScheduleMultipliers {
    c_k: 0.75,
    c_n: 0.25,
    c_beta: 0.005,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "gbb-3phase")]
    Gbb3Phase,
    #[serde(rename = "fixed-price")]
    FixedPrice,
    #[serde(rename = "diagonal-etc")]
    DiagonalEtc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gbb3Phase => "gbb-3phase",
            Algorithm::FixedPrice => "fixed-price",
            Algorithm::DiagonalEtc => "diagonal-etc",
        }
    }
}

fn default_delta() -> f64 {
    0.1
}
fn default_k_ref() -> usize {
    DEFAULT_K_REF
}
fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE_CONSTANT
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of a builtin instance, see [`builtin_instance`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    /// Instance file, relative to the config file when loaded with
    /// [`ExperimentConfig::load`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_file: Option<PathBuf>,
    pub algorithm: Algorithm,
    /// Diagonal price of `fixed-price`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<f64>,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub multipliers: ScheduleMultipliers,
    #[serde(default = "default_confidence")]
    pub confidence_constant: f64,
    #[serde(default = "default_k_ref")]
    pub k_ref: usize,
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    #[serde(default = "default_true")]
    pub write_runlogs: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| toml_error(text, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves `instance_file` against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.instance_file, path.parent()) {
            if file.is_relative() {
                cfg.instance_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instance.is_some() == self.instance_file.is_some() {
            return Err(invalid("set exactly one of instance and instance_file"));
        }
        if self.horizons.contains(&0) {
            return Err(invalid("horizons must be positive"));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("horizons must be strictly increasing"));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("seeds must be distinct"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if self.k_ref < 2 {
            return Err(invalid("k_ref must be at least 2"));
        }
        match (self.algorithm, self.price) {
            (Algorithm::FixedPrice, None) => return Err(invalid("fixed-price needs a price")),
            (Algorithm::FixedPrice, Some(p)) => {
                fixed_price_policy(p)?;
            }
            (_, Some(_)) => return Err(invalid("price only applies to fixed-price")),
            _ => {}
        }
        for &t in &self.horizons {
            configure(t, self.delta, self.multipliers)?;
        }
        Ok(())
    }

    /// The instance name used in reports.
    pub fn instance_label(&self) -> String {
        match (&self.instance, &self.instance_file) {
            (Some(name), _) => name.clone(),
            (None, Some(path)) => path.display().to_string(),
            (None, None) => String::new(),
        }
    }

    pub fn load_model(&self) -> Result<JointValuationModel<f64>> {
        match (&self.instance, &self.instance_file) {
            (Some(name), None) => builtin_instance(name),
            (None, Some(path)) => parse_instance(&std::fs::read_to_string(path)?),
            _ => Err(invalid("set exactly one of instance and instance_file")),
        }
    }

    /// `output_dir`, placed under `root` when it is relative and a root is
    /// given.
    pub fn resolve_output_dir(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(root) if self.output_dir.is_relative() => root.join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

/// Names accepted by [`builtin_instance`].
pub const BUILTIN_INSTANCES: [&str; 5] =
    ["product-uniform", "band", "skewed", "separation", "needle"];

/// Builtin valuation models:
///
/// * `product-uniform`: independent uniform values.
/// * `band`: 4x4 cell density, 1 on the diagonal cells and 2 where the buyer
///   cell is above the seller cell, 0 below.
/// * `skewed`: 5x5 cell density `(1 + i + 2 j) / 7` for seller cell `i` and
///   buyer cell `j`.
/// * `separation`: atoms `(0, 0.35)` and `(0.65, 1)` of mass 1/2 each; no
///   diagonal price trades both, while mixing `(0, 0.35)` with `(0.65, 0.35)`
///   does and stays profitable on average.
/// * `needle`: the four-atom lower-bound family at `eps = 2^-10`, `u = 0`.
pub fn builtin_instance(name: &str) -> Result<JointValuationModel<f64>> {
    match name {
        "product-uniform" => Ok(JointValuationModel::ProductUniform),
        "band" => {
            let d = (0..16)
                .map(|c| match (c / 4, c % 4) {
                    (i, j) if i == j => 1.0,
                    (i, j) if j > i => 2.0,
                    _ => 0.0,
                })
                .collect();
            Ok(JointValuationModel::CellDensity(CellDensity::new(4, d)?))
        }
        "skewed" => {
            let d = (0..25)
                .map(|c| (1 + c / 5 + 2 * (c % 5)) as f64 / 7.0)
                .collect();
            Ok(JointValuationModel::CellDensity(CellDensity::new(5, d)?))
        }
        "separation" => Ok(JointValuationModel::PointMasses(PointMassMixture::new(
            vec![(0.0, 0.35, 0.5), (0.65, 1.0, 0.5)],
        )?)),
        "needle" => make_needle_instance(1.0 / 1024.0, 0.0),
        other => Err(invalid(format!(
            "unknown builtin instance {other:?}; known: {}",
            BUILTIN_INSTANCES.join(", ")
        ))),
    }
}

/// The bounded-density instances used for budget and grid checks.
pub fn bounded_density_suite() -> Vec<(&'static str, JointValuationModel<f64>)> {
    ["product-uniform", "band", "skewed"]
        .into_iter()
        .map(|n| (n, builtin_instance(n).expect("builtin instance")))
        .collect()
}

/// One run of the configured algorithm.
pub fn run_cell(
    cfg: &ExperimentConfig,
    model: &JointValuationModel<f64>,
    horizon: usize,
    seed: u64,
) -> Result<RunLog> {
    let params = configure(horizon, cfg.delta, cfg.multipliers)?
        .with_confidence_constant(cfg.confidence_constant);
    match cfg.algorithm {
        Algorithm::Gbb3Phase => run_episode(model, params, seed),
        Algorithm::FixedPrice => {
            let policy = fixed_price_policy(
                cfg.price
                    .ok_or_else(|| invalid("fixed-price needs a price"))?,
            )?;
            evaluate_policy(model, &policy, horizon, seed)
        }
        Algorithm::DiagonalEtc => {
            let policy = diagonal_etc_policy(horizon, params.k, params.n)?;
            evaluate_policy(model, &policy, horizon, seed)
        }
    }
}

/// `T * opt` minus the exact expected gain from trade of every logged pair,
/// recomputed from the model rather than read from the log.
pub fn recompute_pseudo_regret(model: &JointValuationModel<f64>, log: &RunLog, opt: f64) -> f64 {
    let gft: f64 = log
        .records
        .iter()
        .map(|r| model.exact_gft(crate::grid::PricePair { p: r.p, q: r.q }))
        .sum();
    log.len() as f64 * opt - gft
}

/// Builds the report row of a run and checks it against the log.
pub fn cell_report(
    model: &JointValuationModel<f64>,
    log: &RunLog,
    opt: f64,
    horizon: usize,
    seed: u64,
) -> Result<CellReport> {
    let phase_counts = log.phase_counts();
    if phase_counts.iter().sum::<usize>() != horizon || log.len() != horizon {
        return Err(invalid(format!(
            "run (T = {horizon}, seed = {seed}) logged {} rounds",
            log.len()
        )));
    }
    let pseudo_regret = log.pseudo_regret(opt);
    let recomputed = recompute_pseudo_regret(model, log, opt);
    if (pseudo_regret - recomputed).abs() > RECOMPUTE_TOLERANCE * horizon.max(1) as f64 {
        return Err(invalid(format!(
            "run (T = {horizon}, seed = {seed}): logged regret {pseudo_regret} but oracle gives {recomputed}"
        )));
    }
    let traj = budget_trajectory(log);
    Ok(CellReport {
        horizon,
        seed,
        pseudo_regret,
        realized_gft_regret: horizon as f64 * opt - log.total_realized_gft(),
        cumulative_profit: traj.final_value(),
        min_cumulative_profit: traj.min_value(),
        phase_counts,
    })
}

struct CellOutput {
    report: CellReport,
    budget: Vec<(usize, f64)>,
}

/// Runs every `(T, seed)` cell of `cfg` in parallel, writes the output
/// files into `out_dir` and returns the report. Results are ordered by
/// `(T, seed)`, so the files do not depend on scheduling.
pub fn run_experiment_in(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RegretReport> {
    cfg.validate()?;
    let model = cfg.load_model()?;
    let opt = benchmark_opt(&model, cfg.k_ref)?;
    std::fs::create_dir_all(out_dir)?;
    let runlog_dir = out_dir.join("runlogs");
    if cfg.write_runlogs {
        std::fs::create_dir_all(&runlog_dir)?;
    }
    let keys: Vec<(usize, u64)> = cfg
        .horizons
        .iter()
        .flat_map(|&t| cfg.seeds.iter().map(move |&s| (t, s)))
        .collect();
    let outputs = keys
        .par_iter()
        .map(|&(t, seed)| -> Result<CellOutput> {
            let log = run_cell(cfg, &model, t, seed)?;
            let report = cell_report(&model, &log, opt, t, seed)?;
            if cfg.write_runlogs {
                log.save(&runlog_dir.join(format!("T{t}_seed{seed}.csv")))?;
            }
            let budget = budget_trajectory(&log).downsample(BUDGET_POINTS);
            log::info!(
                "T = {t}, seed = {seed}: regret {:.3}, profit {:.3}",
                report.pseudo_regret,
                report.cumulative_profit
            );
            Ok(CellOutput { report, budget })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["horizon", "seed", "round", "cumulative_profit"])?;
    for out in &outputs {
        for &(round, value) in &out.budget {
            wr.write_record([
                out.report.horizon.to_string(),
                out.report.seed.to_string(),
                round.to_string(),
                value.to_string(),
            ])?;
        }
    }
    std::fs::write(
        out_dir.join("budget.csv"),
        wr.into_inner().map_err(|e| e.into_error())?,
    )?;

    let cells = outputs.into_iter().map(|o| o.report).collect();
    let report = RegretReport::assemble(cfg.instance_label(), cfg.algorithm.name(), opt, cells)?;
    let report = match cfg.algorithm {
        // Profit collection, estimation and the optimistic phase each use delta.
        Algorithm::Gbb3Phase => report.with_failure_probability((3.0 * cfg.delta).min(1.0)),
        Algorithm::FixedPrice | Algorithm::DiagonalEtc => report,
    };
    emit_outputs(&report, out_dir, &cfg.formats)?;
    Ok(report)
}

/// [`run_experiment_in`] with the config's own output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RegretReport> {
    run_experiment_in(cfg, &cfg.output_dir)
}

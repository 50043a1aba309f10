//! Experiment reports and their CSV and JSON files.
//!
//! `summary.csv` has the fixed header
//!
//! ```text
//! row_kind,horizon,seed,pseudo_regret,realized_gft_regret,cumulative_profit,final_negative,profit_max_rounds,exploration_rounds,exploit_rounds,fixed_rounds
//! ```
//!
//! with one `cell` row per `(T, seed)` and, for every horizon that has
//! cells, the aggregate rows `mean`, `q10`, `median` and `q90`. Aggregate
//! rows leave `seed` and the round counts empty and put the fraction of
//! negative final budgets in `final_negative`.
//!
//! `report.json` is a single object tagged `"schema": "gbb-report/v1"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::runlog::Phase;

use super::analysis::{quantile, ScalingFit};

pub const REPORT_SCHEMA: &str = "gbb-report/v1";

pub const SUMMARY_HEADER: [&str; 11] = [
    "row_kind",
    "horizon",
    "seed",
    "pseudo_regret",
    "realized_gft_regret",
    "cumulative_profit",
    "final_negative",
    "profit_max_rounds",
    "exploration_rounds",
    "exploit_rounds",
    "fixed_rounds",
];

/// Outcome of one `(T, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub horizon: usize,
    pub seed: u64,
    pub pseudo_regret: f64,
    /// `T * OPT` minus the realized gain from trade of the trades that
    /// happened.
    pub realized_gft_regret: f64,
    pub cumulative_profit: f64,
    pub min_cumulative_profit: f64,
    /// Rounds spent in each phase, in the order of [`Phase::ALL`].
    pub phase_counts: [usize; 4],
}

impl CellReport {
    pub fn final_negative(&self) -> bool {
        self.cumulative_profit < 0.0
    }
}

/// Regret statistics over the seeds of one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonAggregate {
    pub horizon: usize,
    pub runs: usize,
    pub mean_regret: f64,
    pub q10_regret: f64,
    pub median_regret: f64,
    pub q90_regret: f64,
    pub mean_realized_gft_regret: f64,
    pub mean_profit: f64,
    pub negative_budget_fraction: f64,
}

impl HorizonAggregate {
    /// Statistics of `cells`, which must share one horizon and be nonempty.
    pub fn from_cells(cells: &[&CellReport]) -> Result<Self> {
        let first = cells
            .first()
            .ok_or_else(|| invalid("no cells to aggregate"))?;
        if cells.iter().any(|c| c.horizon != first.horizon) {
            return Err(invalid("aggregated cells must share a horizon"));
        }
        let n = cells.len() as f64;
        let mut regrets: Vec<f64> = cells.iter().map(|c| c.pseudo_regret).collect();
        regrets.sort_by(f64::total_cmp);
        Ok(Self {
            horizon: first.horizon,
            runs: cells.len(),
            mean_regret: regrets.iter().sum::<f64>() / n,
            q10_regret: quantile(&regrets, 0.1),
            median_regret: quantile(&regrets, 0.5),
            q90_regret: quantile(&regrets, 0.9),
            mean_realized_gft_regret: cells.iter().map(|c| c.realized_gft_regret).sum::<f64>() / n,
            mean_profit: cells.iter().map(|c| c.cumulative_profit).sum::<f64>() / n,
            negative_budget_fraction: cells.iter().filter(|c| c.final_negative()).count() as f64
                / n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub schema: String,
    pub instance: String,
    pub algorithm: String,
    /// Benchmark value the pseudo-regret is measured against.
    pub opt: f64,
    /// Sorted by `(horizon, seed)`.
    pub cells: Vec<CellReport>,
    /// One per horizon that has cells, by increasing horizon.
    pub aggregates: Vec<HorizonAggregate>,
    /// Log-log fit of mean regret on horizon, when at least three horizons
    /// have positive mean regret.
    pub fit: Option<ScalingFit>,
    /// Union bound on the probability that some confidence statement of the
    /// learner fails: each phase is run at the configured `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_probability: Option<f64>,
}

impl RegretReport {
    /// Sorts the cells, computes the per-horizon aggregates and the fit.
    pub fn assemble(
        instance: impl Into<String>,
        algorithm: impl Into<String>,
        opt: f64,
        mut cells: Vec<CellReport>,
    ) -> Result<Self> {
        cells.sort_by_key(|c| (c.horizon, c.seed));
        let mut aggregates = Vec::new();
        for chunk in cells.chunk_by(|a, b| a.horizon == b.horizon) {
            aggregates.push(HorizonAggregate::from_cells(
                &chunk.iter().collect::<Vec<_>>(),
            )?);
        }
        let fit = if aggregates.len() >= 3 {
            let pts: Vec<(f64, f64)> = aggregates
                .iter()
                .map(|a| (a.horizon as f64, a.mean_regret))
                .collect();
            super::analysis::fit_scaling_exponent(&pts).ok()
        } else {
            None
        };
        Ok(Self {
            schema: REPORT_SCHEMA.to_string(),
            instance: instance.into(),
            algorithm: algorithm.into(),
            opt,
            cells,
            aggregates,
            fit,
            failure_probability: None,
        })
    }

    pub fn with_failure_probability(mut self, p: f64) -> Self {
        self.failure_probability = Some(p);
        self
    }

    /// `(T, mean pseudo-regret)` per horizon.
    pub fn mean_regret_points(&self) -> Vec<(f64, f64)> {
        self.aggregates
            .iter()
            .map(|a| (a.horizon as f64, a.mean_regret))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema != REPORT_SCHEMA {
            return Err(invalid(format!(
                "unknown report schema {:?}, expected {REPORT_SCHEMA:?}",
                report.schema
            )));
        }
        Ok(report)
    }

    /// The summary table; see the module docs for the layout.
    pub fn summary_csv(&self) -> Result<String> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(SUMMARY_HEADER)?;
        for agg in &self.aggregates {
            for c in self.cells.iter().filter(|c| c.horizon == agg.horizon) {
                let mut row = vec![
                    "cell".to_string(),
                    c.horizon.to_string(),
                    c.seed.to_string(),
                    c.pseudo_regret.to_string(),
                    c.realized_gft_regret.to_string(),
                    c.cumulative_profit.to_string(),
                    u8::from(c.final_negative()).to_string(),
                ];
                row.extend(c.phase_counts.iter().map(|n| n.to_string()));
                wr.write_record(&row)?;
            }
            let stats = [
                ("mean", agg.mean_regret),
                ("q10", agg.q10_regret),
                ("median", agg.median_regret),
                ("q90", agg.q90_regret),
            ];
            for (kind, regret) in stats {
                let mean_row = kind == "mean";
                let opt_field = |v: f64| {
                    if mean_row {
                        v.to_string()
                    } else {
                        String::new()
                    }
                };
                let mut row = vec![
                    kind.to_string(),
                    agg.horizon.to_string(),
                    String::new(),
                    regret.to_string(),
                    opt_field(agg.mean_realized_gft_regret),
                    opt_field(agg.mean_profit),
                    opt_field(agg.negative_budget_fraction),
                ];
                row.extend(std::iter::repeat_n(String::new(), Phase::ALL.len()));
                wr.write_record(&row)?;
            }
        }
        let bytes = wr.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Plot series of regret against horizon.
    pub fn regret_series_csv(&self) -> Result<String> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record([
            "horizon",
            "mean_regret",
            "q10_regret",
            "q90_regret",
            "mean_profit",
        ])?;
        for a in &self.aggregates {
            wr.write_record([
                a.horizon.to_string(),
                a.mean_regret.to_string(),
                a.q10_regret.to_string(),
                a.q90_regret.to_string(),
                a.mean_profit.to_string(),
            ])?;
        }
        let bytes = wr.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Writes the report files into `dir`, creating it if needed, and returns
/// their paths. CSV writes `summary.csv` and `regret_vs_t.csv`; JSON writes
/// `report.json`.
pub fn emit_outputs(
    report: &RegretReport,
    dir: &Path,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        let files = match format {
            OutputFormat::Csv => vec![
                ("summary.csv", report.summary_csv()?),
                ("regret_vs_t.csv", report.regret_series_csv()?),
            ],
            OutputFormat::Json => vec![("report.json", report.to_json()?)],
        };
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Reads `(T, mean regret)` points from a summary table, or from the first
/// two columns of any headed CSV without a `row_kind` column.
pub fn read_regret_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers = rd.headers()?.clone();
    let kind_col = headers.iter().position(|h| h == "row_kind");
    let (t_col, r_col) = match kind_col {
        Some(_) => (
            headers.iter().position(|h| h == "horizon"),
            headers.iter().position(|h| h == "pseudo_regret"),
        ),
        None => (Some(0), Some(1)),
    };
    let (t_col, r_col) = match (t_col, r_col) {
        (Some(t), Some(r)) if headers.len() > t.max(r) => (t, r),
        _ => return Err(invalid("input needs horizon and regret columns")),
    };
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if let Some(k) = kind_col {
            if rec.get(k) != Some("mean") {
                continue;
            }
        }
        let field = |c: usize| -> Result<f64> {
            let raw = rec.get(c).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|_| crate::error::Error::Parse {
                line: i + 2,
                column: c + 1,
                message: format!("not a number: {raw:?}"),
            })
        };
        out.push((field(t_col)?, field(r_col)?));
    }
    Ok(out)
}

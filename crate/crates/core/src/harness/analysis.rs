//! Scaling-exponent fits and budget trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::runlog::RunLog;

/// Least-squares fit of `ln(regret) = intercept + slope * ln(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Number of points that entered the fit.
    pub points: usize,
}

/// Fits the log-log slope of `(T, regret)` points. Points with a
/// nonpositive coordinate are dropped with a warning; at least three must
/// remain. The standard error is the usual OLS one and is zero for exactly
/// three collinear points.
pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut xy = Vec::with_capacity(points.len());
    for &(t, r) in points {
        if t > 0.0 && r > 0.0 && t.is_finite() && r.is_finite() {
            xy.push((t.ln(), r.ln()));
        } else {
            log::warn!("dropping point (T = {t}, regret = {r}) from the log-log fit");
        }
    }
    if xy.len() < 3 {
        return Err(invalid(format!(
            "a scaling fit needs at least 3 positive points, got {}",
            xy.len()
        )));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(invalid(
            "a scaling fit needs at least two distinct horizons",
        ));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ScalingFit {
        slope,
        stderr,
        intercept,
        points: xy.len(),
    })
}

/// Cumulative realized profit after each round.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetTrajectory {
    pub cumulative: Vec<f64>,
}

impl BudgetTrajectory {
    pub fn final_value(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn final_negative(&self) -> bool {
        self.final_value() < 0.0
    }

    pub fn min_value(&self) -> f64 {
        self.cumulative.iter().copied().fold(0.0, f64::min)
    }

    /// At most `max_points` `(round, value)` pairs at evenly spaced rounds,
    /// always including the last one.
    pub fn downsample(&self, max_points: usize) -> Vec<(usize, f64)> {
        let len = self.cumulative.len();
        if len == 0 || max_points == 0 {
            return Vec::new();
        }
        let step = len.div_ceil(max_points);
        let mut out: Vec<(usize, f64)> = (step..=len)
            .step_by(step)
            .map(|t| (t, self.cumulative[t - 1]))
            .collect();
        if out.last().map(|p| p.0) != Some(len) {
            if out.len() == max_points {
                out.pop();
            }
            out.push((len, self.cumulative[len - 1]));
        }
        out
    }
}

/// Prefix sums of the realized profit column.
pub fn budget_trajectory(log: &RunLog) -> BudgetTrajectory {
    let mut acc = 0.0;
    let cumulative = log
        .records
        .iter()
        .map(|r| {
            acc += r.realized_profit;
            acc
        })
        .collect();
    BudgetTrajectory { cumulative }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], level: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = level.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

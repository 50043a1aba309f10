//! The three-phase learner: profit collection on the additive-multiplicative
//! grid, uniform-probe exploration of `L` and `R` on the uniform grid, then
//! optimistic constrained play.

mod exploit;
mod exploration;
mod profit_max;

pub use exploit::{ExploitConfig, ExploitState};
pub use exploration::ExplorationState;
pub use profit_max::ProfitMaxState;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::JointValuationModel;
use crate::error::{invalid, Result};
use crate::grid::{make_am_grid, PricePair};
use crate::runlog::{simulate, Mechanism, Phase, RunLog};

/// Multipliers on the asymptotic schedule `K ~ T^(1/4)`, `N ~ T^(1/2)` and
/// the profit target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleMultipliers {
    pub c_k: f64,
    pub c_n: f64,
    pub c_beta: f64,
}

impl Default for ScheduleMultipliers {
    fn default() -> Self {
        Self {
            c_k: 1.0,
            c_n: 1.0,
            c_beta: 1.0,
        }
    }
}

/// Default `C` in the profit confidence term `ln(C T K^2 / delta)`.
pub const DEFAULT_CONFIDENCE_CONSTANT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub horizon: usize,
    pub delta: f64,
    pub k: usize,
    pub n: usize,
    pub beta: f64,
    pub multipliers: ScheduleMultipliers,
    pub confidence_constant: f64,
}

/// `ceil(x)`, forgiving rounding just above an integer.
fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// Builds the schedule
/// `K = max(2, ceil(c_K T^(1/4)))`, `N = ceil(c_N T^(1/2))`,
/// `beta = c_beta (N K + K sqrt(T ln(1/delta)) + T / K)`.
pub fn configure(
    horizon: usize,
    delta: f64,
    multipliers: ScheduleMultipliers,
) -> Result<LearnerParams> {
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1)")));
    }
    let ScheduleMultipliers { c_k, c_n, c_beta } = multipliers;
    if !(c_k > 0.0 && c_n > 0.0 && c_beta >= 0.0)
        || ![c_k, c_n, c_beta].iter().all(|c| c.is_finite())
    {
        return Err(invalid(format!(
            "schedule multipliers must be finite with c_K, c_N > 0 and c_beta >= 0, got {multipliers:?}"
        )));
    }
    let t = horizon as f64;
    let k = (ceil_tol(c_k * t.powf(0.25)) as usize).max(2);
    let n = (ceil_tol(c_n * t.sqrt()) as usize).max(1);
    let kf = k as f64;
    let beta = c_beta * (n as f64 * kf + kf * (t * (1.0 / delta).ln()).sqrt() + t / kf);
    Ok(LearnerParams {
        horizon,
        delta,
        k,
        n,
        beta,
        multipliers,
        confidence_constant: DEFAULT_CONFIDENCE_CONSTANT,
    })
}

impl LearnerParams {
    pub fn with_confidence_constant(mut self, c: f64) -> Self {
        self.confidence_constant = c;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.k < 2 || self.n == 0 {
            return Err(invalid(format!(
                "need T >= 1, K >= 2, N >= 1; got T = {}, K = {}, N = {}",
                self.horizon, self.k, self.n
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if !self.beta.is_finite()
            || self.confidence_constant.is_nan()
            || self.confidence_constant <= 0.0
        {
            return Err(invalid("profit target must be finite and C positive"));
        }
        Ok(())
    }

    pub fn exploit_config(&self) -> ExploitConfig {
        ExploitConfig {
            k: self.k,
            n: self.n,
            horizon: self.horizon,
            delta: self.delta,
            confidence_constant: self.confidence_constant,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Stage {
    ProfitMax(ProfitMaxState),
    Exploration(ExplorationState),
    Exploit(ExploitState),
}

/// Counters gathered over one episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub profit_collected: f64,
    pub profit_max_rounds: usize,
    pub exploration_rounds: usize,
    pub exploit_rounds: usize,
    pub lp_fallbacks: usize,
}

/// The three phases run in order as a [`Mechanism`].
#[derive(Debug, Clone)]
pub struct GbbLearner {
    params: LearnerParams,
    stage: Stage,
    last_pair: Option<PricePair<f64>>,
    last_bit: Option<bool>,
    diagnostics: Diagnostics,
}

impl GbbLearner {
    pub fn new(params: LearnerParams) -> Result<Self> {
        params.validate()?;
        let am = make_am_grid::<f64>(params.k, params.horizon.max(2))?;
        let pm = ProfitMaxState::from_grid(&am, params.beta, params.horizon)?;
        Ok(Self {
            params,
            stage: Stage::ProfitMax(pm),
            last_pair: None,
            last_bit: None,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn stage(&self) -> &Stage {
        &self.stage
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let mut d = self.diagnostics;
        match &self.stage {
            Stage::ProfitMax(s) => {
                d.profit_collected = s.collected();
                d.profit_max_rounds = s.rounds();
            }
            Stage::Exploration(s) => d.exploration_rounds = s.rounds(),
            Stage::Exploit(s) => {
                d.exploit_rounds = s.rounds();
                d.lp_fallbacks = s.violations();
            }
        }
        d
    }
}

impl Mechanism for GbbLearner {
    fn post(&mut self, rng: &mut ChaCha8Rng) -> (Phase, PricePair<f64>) {
        let mut bit = self.last_bit.take();
        let mut profit = match (self.last_pair, bit) {
            (Some(pair), Some(b)) => Some(if b { pair.q - pair.p } else { 0.0 }),
            _ => None,
        };
        loop {
            let next = match &mut self.stage {
                Stage::ProfitMax(s) => match s.step(profit, rng) {
                    Some(pair) => (Phase::ProfitMax, pair),
                    None => {
                        self.diagnostics.profit_collected = s.collected();
                        self.diagnostics.profit_max_rounds = s.rounds();
                        self.stage = Stage::Exploration(
                            ExplorationState::new(self.params.k, self.params.n)
                                .expect("validated parameters"),
                        );
                        (bit, profit) = (None, None);
                        continue;
                    }
                },
                Stage::Exploration(s) => match s.step(bit, rng) {
                    Some(pair) => (Phase::Exploration, pair),
                    None => {
                        self.diagnostics.exploration_rounds = s.rounds();
                        let st =
                            ExploitState::new(self.params.exploit_config(), &s.l_hat(), &s.r_hat())
                                .expect("validated parameters");
                        self.stage = Stage::Exploit(st);
                        (bit, profit) = (None, None);
                        continue;
                    }
                },
                Stage::Exploit(s) => (Phase::Exploit, s.step(profit, rng)),
            };
            self.last_pair = Some(next.1);
            return next;
        }
    }

    fn observe(&mut self, bit: bool) {
        self.last_bit = Some(bit);
    }
}

/// Runs the learner for `params.horizon` rounds with the random sub-streams
/// of `seed`.
pub fn run_episode(
    model: &JointValuationModel<f64>,
    params: LearnerParams,
    seed: u64,
) -> Result<RunLog> {
    Ok(run_episode_with_diagnostics(model, params, seed)?.0)
}

pub fn run_episode_with_diagnostics(
    model: &JointValuationModel<f64>,
    params: LearnerParams,
    seed: u64,
) -> Result<(RunLog, Diagnostics)> {
    let mut learner = GbbLearner::new(params)?;
    let log = simulate(model, &mut learner, params.horizon, seed);
    Ok((log, learner.diagnostics()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let p = configure(65536, 0.05, ScheduleMultipliers::default()).unwrap();
        assert_eq!((p.k, p.n), (16, 256));
        let want = 16.0 * 256.0 + 16.0 * (65536.0 * 20.0f64.ln()).sqrt() + 65536.0 / 16.0;
        assert!((p.beta - want).abs() < 1e-9);
        let p = configure(1, 0.5, ScheduleMultipliers::default()).unwrap();
        assert_eq!((p.k, p.n), (2, 1));
        assert!(configure(0, 0.5, ScheduleMultipliers::default()).is_err());
        assert!(configure(10, 1.0, ScheduleMultipliers::default()).is_err());
    }

    #[test]
    fn zero_target_truncated_exploration() {
        let mut params = configure(64, 0.1, ScheduleMultipliers::default()).unwrap();
        params.beta = 0.0;
        // K = 3, N = 8: exploration needs 48 rounds, exploit gets the rest
        let (log, d) =
            run_episode_with_diagnostics(&JointValuationModel::ProductUniform, params, 4).unwrap();
        assert_eq!(log.len(), 64);
        assert_eq!(log.phase_counts(), [0, 48, 16, 0]);
        assert_eq!(d.profit_max_rounds, 0);

        params.horizon = 20;
        let log = run_episode(&JointValuationModel::ProductUniform, params, 4).unwrap();
        assert_eq!(log.phase_counts(), [0, 20, 0, 0]);
    }

    #[test]
    fn unreachable_target_keeps_profit_collection() {
        use crate::env::PointMassMixture;
        let m =
            JointValuationModel::PointMasses(PointMassMixture::new(vec![(0.4, 0.4, 1.0)]).unwrap());
        let params = configure(500, 0.1, ScheduleMultipliers::default()).unwrap();
        let log = run_episode(&m, params, 1).unwrap();
        assert_eq!(log.phase_counts(), [500, 0, 0, 0]);
    }

    #[test]
    fn episodes_are_reproducible() {
        let params = configure(
            4096,
            0.1,
            ScheduleMultipliers {
                c_k: 1.0,
                c_n: 0.25,
                c_beta: 0.002,
            },
        )
        .unwrap();
        let a = run_episode(&JointValuationModel::ProductUniform, params, 17).unwrap();
        let b = run_episode(&JointValuationModel::ProductUniform, params, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4096);
    }
}

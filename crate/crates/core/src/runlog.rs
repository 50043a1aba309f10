//! Per-round records, the protocol loop and run-log files.
//!
//! Run logs are CSV with the header
//! `round,phase,p,q,bit,realized_profit,expected_gft,realized_gft`; `round`
//! starts at 1, `bit` is 0 or 1, `expected_gft` is the exact expected gain
//! from trade of the posted pair and `realized_gft` is `b - s` of the sampled
//! valuations when the trade happened. The learner never sees `realized_gft`.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{one_bit_feedback, JointValuationModel};
use crate::error::Result;
use crate::grid::PricePair;

/// Column names of a run-log CSV.
pub const RUNLOG_HEADER: [&str; 8] = [
    "round",
    "phase",
    "p",
    "q",
    "bit",
    "realized_profit",
    "expected_gft",
    "realized_gft",
];

/// Random sub-stream drawn by the environment.
pub const ENV_STREAM: u64 = 0;
/// Random sub-stream drawn by the learner or policy.
pub const LEARNER_STREAM: u64 = 1;

/// Generator for one sub-stream of a run. The environment and the learner use
/// disjoint streams of the same seed, so two algorithms run with one seed see
/// the same valuation sequence.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    ProfitMax,
    Exploration,
    Exploit,
    /// Committed or fixed prices of a baseline policy.
    Fixed,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::ProfitMax,
        Phase::Exploration,
        Phase::Exploit,
        Phase::Fixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::ProfitMax => "profit-max",
            Phase::Exploration => "exploration",
            Phase::Exploit => "exploit",
            Phase::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub phase: Phase,
    pub p: f64,
    pub q: f64,
    #[serde(with = "bit01")]
    pub bit: bool,
    pub realized_profit: f64,
    pub expected_gft: f64,
    pub realized_gft: f64,
}

mod bit01 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bit: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*bit))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!(
                "bit must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// Something that posts prices and learns from the trade bit.
pub trait Mechanism {
    /// Prices for the next round and the phase they belong to.
    fn post(&mut self, rng: &mut ChaCha8Rng) -> (Phase, PricePair<f64>);

    /// Trade indicator for the prices just posted.
    fn observe(&mut self, bit: bool);
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub records: Vec<RoundRecord>,
}

impl RunLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_expected_gft(&self) -> f64 {
        self.records.iter().map(|r| r.expected_gft).sum()
    }

    pub fn cumulative_profit(&self) -> f64 {
        self.records.iter().map(|r| r.realized_profit).sum()
    }

    pub fn total_realized_gft(&self) -> f64 {
        self.records.iter().map(|r| r.realized_gft).sum()
    }

    /// `T * opt - sum of expected gain from trade` over the logged rounds.
    pub fn pseudo_regret(&self, opt: f64) -> f64 {
        self.len() as f64 * opt - self.total_expected_gft()
    }

    pub fn phase_counts(&self) -> [usize; 4] {
        let mut out = [0; 4];
        for r in &self.records {
            out[Phase::ALL
                .iter()
                .position(|p| *p == r.phase)
                .expect("known phase")] += 1;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.records.is_empty() {
            wr.write_record(RUNLOG_HEADER)?;
        }
        for r in &self.records {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let records = rd.deserialize().collect::<Result<Vec<RoundRecord>, _>>()?;
        Ok(Self { records })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Runs the protocol for `horizon` rounds. Every round draws one valuation
/// pair from the environment stream whatever the mechanism does.
pub fn simulate<M: Mechanism + ?Sized>(
    model: &JointValuationModel<f64>,
    mechanism: &mut M,
    horizon: usize,
    seed: u64,
) -> RunLog {
    let mut env_rng = stream_rng(seed, ENV_STREAM);
    let mut rng = stream_rng(seed, LEARNER_STREAM);
    let mut records = Vec::with_capacity(horizon);
    for round in 1..=horizon {
        let (phase, pair) = mechanism.post(&mut rng);
        let (s, b) = model.sample(&mut env_rng);
        let bit = one_bit_feedback(s, b, pair);
        mechanism.observe(bit);
        records.push(RoundRecord {
            round,
            phase,
            p: pair.p,
            q: pair.q,
            bit,
            realized_profit: if bit { pair.q - pair.p } else { 0.0 },
            expected_gft: model.exact_gft(pair),
            realized_gft: if bit { b - s } else { 0.0 },
        });
    }
    RunLog { records }
}

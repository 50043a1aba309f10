//! Repeated bilateral trade with one-bit feedback.
//!
//! A broker posts a price `p` to a seller and `q` to a buyer each round and
//! only learns whether the trade happened. This crate provides the valuation
//! models and exact expectations, the grid benchmarks and constrained LP, a
//! three-phase globally budget balanced learner, comparator policies, and an
//! experiment harness.
//!
//! Grid, model and oracle code is generic over the scalar type (see
//! [`scalar::Real`]); the aliases below fix it to `f64`. The learner and the
//! harness are `f64` only.

pub mod baselines;
pub mod env;
pub mod error;
pub mod grid;
pub mod harness;
pub mod learner;
pub mod oracle;
pub mod runlog;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{LpScalar, Real};

pub type PricePair64 = grid::PricePair<f64>;
pub type Grid64 = grid::Grid<f64>;
pub type AmGrid64 = grid::AmGrid<f64>;
pub type GridDistribution64 = grid::GridDistribution<f64>;
pub type Model64 = env::JointValuationModel<f64>;
pub type PricePair32 = grid::PricePair<f32>;
pub type Grid32 = grid::Grid<f32>;
pub type Model32 = env::JointValuationModel<f32>;

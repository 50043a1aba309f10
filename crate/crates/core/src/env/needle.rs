//! Four-atom instances with unbounded density on which any learner suffers
//! linear regret.
//!
//! Atoms (each with mass 1/4): `(1/8, 3/8+u)`, `(5/8+u, 7/8)`,
//! `(3/8+u-eps, 3/8+u-eps)` and `(5/8+u+eps, 5/8+u+eps)`. The only price pairs
//! that realise both positive-surplus trades without a zero-surplus trade are
//! `p in [5/8+u, 5/8+u+eps)`, `q in (3/8+u-eps, 3/8+u]`.

use crate::error::{invalid, Result};
use crate::grid::PricePair;
use crate::scalar::Real;

use super::{JointValuationModel, PointMassMixture};

/// Payoff regions of the `(p, q)` square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeedleRegion {
    /// Both surplus trades, no zero-surplus trade: GFT = 1/8.
    I,
    /// No trade at all.
    II,
    /// Both surplus trades plus at least one zero-surplus trade:
    /// GFT = 1/8 and PRO <= -3/16.
    III,
    /// Everything else: GFT <= 1/16 + |u|/4 and PRO <= (1/4 + |u|)/4.
    IV,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeedleInstance<S> {
    eps: S,
    u: S,
    model: JointValuationModel<S>,
}

impl<S: Real> NeedleInstance<S> {
    pub fn new(eps: S, u: S) -> Result<Self> {
        let sixteenth = S::lit(1.0 / 16.0);
        if !(eps > S::zero() && eps < sixteenth) {
            return Err(invalid(format!("needle width {eps} outside (0, 1/16)")));
        }
        if !(u >= -sixteenth && u <= sixteenth) {
            return Err(invalid(format!("needle shift {u} outside [-1/16, 1/16]")));
        }
        let quarter = S::lit(0.25);
        let lo = S::lit(0.375) + u;
        let hi = S::lit(0.625) + u;
        let atoms = vec![
            (S::lit(0.125), lo, quarter),
            (hi, S::lit(0.875), quarter),
            (lo - eps, lo - eps, quarter),
            (hi + eps, hi + eps, quarter),
        ];
        let model = JointValuationModel::PointMasses(PointMassMixture::new(atoms)?);
        Ok(Self { eps, u, model })
    }

    pub fn eps(&self) -> S {
        self.eps
    }

    pub fn shift(&self) -> S {
        self.u
    }

    pub fn model(&self) -> &JointValuationModel<S> {
        &self.model
    }

    pub fn into_model(self) -> JointValuationModel<S> {
        self.model
    }

    pub fn region(&self, pair: PricePair<S>) -> NeedleRegion {
        let lo = S::lit(0.375) + self.u;
        let hi = S::lit(0.625) + self.u;
        let (p, q) = (pair.p, pair.q);
        if p >= hi && p < hi + self.eps && q > lo - self.eps && q <= lo {
            NeedleRegion::I
        } else if p < hi && q > lo {
            NeedleRegion::II
        } else if p >= hi && q <= lo {
            NeedleRegion::III
        } else {
            NeedleRegion::IV
        }
    }
}

pub fn make_needle_instance<S: Real>(eps: S, u: S) -> Result<JointValuationModel<S>> {
    NeedleInstance::new(eps, u).map(NeedleInstance::into_model)
}

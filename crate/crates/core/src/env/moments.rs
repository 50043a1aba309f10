use crate::grid::PricePair;
use crate::scalar::Real;

use super::{CellDensity, Quantity};

/// `P(trade)`, `E[s 1{trade}]` and `E[b 1{trade}]` at one price pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TradeMoments<S> {
    pub mass: S,
    pub s_moment: S,
    pub b_moment: S,
}

impl<S: Real> TradeMoments<S> {
    pub fn quantity(&self, quantity: Quantity, pair: PricePair<S>) -> S {
        match quantity {
            Quantity::Gft => self.b_moment - self.s_moment,
            Quantity::Pro => (pair.q - pair.p) * self.mass,
            Quantity::L => pair.p * self.mass - self.s_moment,
            Quantity::R => self.b_moment - pair.q * self.mass,
        }
    }
}

/// Length and first moment of `[lo, hi]` (zero when empty).
#[inline]
fn interval<S: Real>(lo: S, hi: S) -> (S, S) {
    if hi > lo {
        (hi - lo, (hi * hi - lo * lo) / S::lit(2.0))
    } else {
        (S::zero(), S::zero())
    }
}

fn clamp01<S: Real>(x: S) -> S {
    x.max(S::zero()).min(S::one())
}

pub(super) fn uniform_square<S: Real>(pair: PricePair<S>) -> TradeMoments<S> {
    let (len_s, mom_s) = interval(S::zero(), clamp01(pair.p));
    let (len_b, mom_b) = interval(clamp01(pair.q), S::one());
    TradeMoments {
        mass: len_s * len_b,
        s_moment: mom_s * len_b,
        b_moment: len_s * mom_b,
    }
}

pub(super) fn cell_density<S: Real>(c: &CellDensity<S>, pair: PricePair<S>) -> TradeMoments<S> {
    let m = c.m;
    let msz = S::from_usize_lossy(m);
    let edge = |i: usize| S::from_usize_lossy(i) / msz;
    let p = clamp01(pair.p);
    let q = clamp01(pair.q);

    let mut out = TradeMoments::default();
    for a in 0..m {
        let lo = edge(a);
        if lo >= p {
            break;
        }
        let (len_s, mom_s) = interval(lo, edge(a + 1).min(p));
        for col in (0..m).rev() {
            let hi = edge(col + 1);
            if hi <= q {
                break;
            }
            let d = c.density[a * m + col];
            if d == S::zero() {
                continue;
            }
            let (len_b, mom_b) = interval(edge(col).max(q), hi);
            out.mass = out.mass + d * len_s * len_b;
            out.s_moment = out.s_moment + d * mom_s * len_b;
            out.b_moment = out.b_moment + d * len_s * mom_b;
        }
    }
    out
}

pub(super) fn point_masses<S: Real>(
    atoms: &[(PricePair<S>, S)],
    pair: PricePair<S>,
) -> TradeMoments<S> {
    let mut out = TradeMoments::default();
    for &(at, w) in atoms {
        if at.p <= pair.p && at.q >= pair.q {
            out.mass = out.mass + w;
            out.s_moment = out.s_moment + w * at.p;
            out.b_moment = out.b_moment + w * at.q;
        }
    }
    out
}

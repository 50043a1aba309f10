//! Scalar abstractions.
//!
//! Grid, environment and oracle math is written against [`Real`], which is
//! implemented for `f32` and `f64`. The constrained LP only needs ordered
//! field arithmetic, so it is written against [`LpScalar`] and also runs on
//! exact rationals such as `num_rational::Ratio<i64>`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar used by the continuous parts of the crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every `Real` can represent (a rounding of)
    /// any finite `f64`, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in a float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field used by the two-point LP solver.
pub trait LpScalar: Clone + PartialOrd + Num + Debug {}

impl<T> LpScalar for T where T: Clone + PartialOrd + Num + Debug {}

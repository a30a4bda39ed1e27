//! Floating-point abstraction shared by the feature, classifier and metric code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type for feature weights, model parameters and scores.
///
/// Implemented for `f32` and `f64`. Code that only needs ordered field
/// arithmetic (the metrics) is bounded on [`Ratio`] instead, so exact
/// rationals can be used there as well.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field arithmetic over counts: enough for precision, recall and F1.
///
/// Floats and `num_rational::Ratio<i64>` both qualify.
pub trait Ratio: num_traits::Num + FromPrimitive + Copy + PartialOrd + Debug {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count is representable")
    }
}

impl<T> Ratio for T where T: num_traits::Num + FromPrimitive + Copy + PartialOrd + Debug {}

//! Scalar traits the generic code is written against.

use std::fmt::Debug;

use num_traits::{Bounded, Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating point audio sample: `f32` or `f64`.
pub trait Sample: Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static {
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to any float")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("float converts to f64")
    }
}

impl Sample for f32 {}
impl Sample for f64 {}

/// Cost value for the assignment solver.
///
/// Potentials go negative during the solve, hence `Signed`.
pub trait Cost: Num + Signed + Bounded + Copy + PartialOrd + Debug {}

impl<T> Cost for T where T: Num + Signed + Bounded + Copy + PartialOrd + Debug {}

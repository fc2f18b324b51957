use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed};

/// Numeric type the evaluation metrics are computed in.
///
/// Implemented for `f32`, `f64` and exact rationals such as
/// [`crate::Exact`]. Only field operations, `abs` and conversion from
/// counts are needed, so no metric except the embedding cosine requires a
/// floating-point type.
pub trait Scalar: Num + Signed + FromPrimitive + Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }

    /// `num / den` for small integer constants.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }
}

impl<T> Scalar for T where T: Num + Signed + FromPrimitive + Copy + PartialOrd + Debug + Send + Sync + 'static {}

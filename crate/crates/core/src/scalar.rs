use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point type used for log-likelihoods, scores and centralities: f32 or f64.
pub trait Scalar: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as float")
    }

    #[inline]
    fn from_real(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 representable")
    }

    /// `x * ln(x / total)` with the `0 * ln 0 = 0` convention.
    #[inline]
    fn xlogx_ratio(count: u64, total: u64) -> Self {
        if count == 0 {
            Self::zero()
        } else {
            let c = Self::from_count(count);
            c * (c / Self::from_count(total)).ln()
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

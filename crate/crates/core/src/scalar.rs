use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the dyadic machinery is written over.
///
/// Implemented for `f32` and `f64`. Every tolerance quoted in the tests
/// assumes `f64`; `f32` is supported for memory-bound experiments only.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar conversion")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("scalar conversion")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `2^e` for a (possibly negative) integer exponent.
    #[inline]
    fn pow2(e: i32) -> Self {
        Self::lit(2.0).powi(e)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

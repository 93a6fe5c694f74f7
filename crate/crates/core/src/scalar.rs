use std::fmt::{Debug, Display};
use std::str::FromStr;

/// Floating point scalar used by the numeric modules: f32 or f64.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite constant")
    }

    fn from_count(value: u32) -> Self {
        Self::from_u32(value).expect("integer fits in float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

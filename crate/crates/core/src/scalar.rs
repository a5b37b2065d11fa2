use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type for amplitudes and circuit parameters: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Default magnitude below which state terms are pruned.
    fn default_tolerance() -> Self;

    /// Converts an `f64` literal, panicking only for unrepresentable values
    /// (never the case for `f32`/`f64`).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn two_pi() -> Self {
        Self::PI() + Self::PI()
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        1e-6
    }
}

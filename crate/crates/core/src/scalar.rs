use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};

/// Real scalar used by the classical side of the lab (observables, maps, windows, fits).
///
/// Quantum operators are always assembled in `f64`; `to_f64` is the bridge.
pub trait Scalar:
    Float + FloatConst + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;

    fn to_f64(self) -> f64;

    fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }

    /// Representative of `self` in `[0, 1)`.
    fn wrap_unit(self) -> Self {
        let r = self - self.floor();
        // floor can round `-tiny` up to exactly 1.0
        if r >= Self::one() {
            Self::zero()
        } else {
            r
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

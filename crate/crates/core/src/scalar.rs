//! Numeric abstraction shared by the geometry and monitor layers.
//!
//! Everything upstream of the MILP works over any ordered field that can be
//! built from `f64`: plain floats for speed, exact rationals when strict sign
//! tests must not be perturbed by rounding.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An ordered field usable for timestamps, coordinates and robustness values.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Lossless (for rationals) or identity (for floats) conversion from `f64`.
    ///
    /// Non-finite inputs map to zero; callers validate finiteness first.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::zero)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl<T> Scalar for T where
    T: Clone
        + PartialOrd
        + Debug
        + Display
        + Num
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

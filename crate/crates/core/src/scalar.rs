//! Numeric abstraction shared by every value-learning component.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point type a Q-store or network can be instantiated with.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal or reward.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Writes a value with 17 significant digits so that it parses back exactly.
pub(crate) fn fmt_exact<T: Scalar>(value: T) -> String {
    format!("{:.16e}", value.as_f64())
}

pub(crate) fn parse_exact<T: Scalar>(text: &str) -> Option<T> {
    let v: f64 = text.parse().ok()?;
    if v.is_finite() {
        T::from_f64(v)
    } else {
        None
    }
}

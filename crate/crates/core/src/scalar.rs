//! Scalar abstraction for the numeric kernels.
//!
//! Utilities, the rate controllers and the virtual-queue algebra only need
//! ordered field arithmetic plus `ln`/`powf`, so they are written once over
//! [`Scalar`] and instantiated for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable by the numeric kernels.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or parameter.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Scalar")
    }

    /// Widening conversion used by reports and metrics.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest absolute tolerance the iterative solvers should aim for.
    fn solver_floor() -> Self {
        Self::epsilon() * Self::of(8.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

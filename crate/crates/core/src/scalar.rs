use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar the linear algebra kernels are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances in the kernels are written as
/// `f64` literals and converted with [`cast`], so they degrade gracefully to
/// the precision of the chosen type.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Convert an `f64` literal into the scalar type.
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Convert a scalar into `f64`.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Tolerance floor for the scalar type: `max(requested, 8 * machine epsilon)`.
#[inline]
pub(crate) fn tol_floor<T: Scalar>(requested: f64) -> T {
    let eps = T::epsilon() * cast(8.0);
    let req = cast::<T>(requested);
    if req > eps {
        req
    } else {
        eps
    }
}

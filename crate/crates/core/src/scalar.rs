//! Scalar abstractions.
//!
//! Exact integer routines are generic over [`IntScalar`] (machine integers or
//! `BigInt`), rational elimination over [`FieldScalar`], and the floating
//! point fitting code over [`Real`].

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Float, FromPrimitive, Num, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Exact signed integer ring with checked arithmetic.
///
/// Every operation in [`crate::intlin`] goes through the checked methods, so a
/// machine integer reports [`Error::Overflow`] instead of wrapping. `BigInt`
/// never overflows.
pub trait IntScalar:
    Clone + Debug + Display + Ord + Integer + Signed + CheckedAdd + CheckedSub + CheckedMul + FromPrimitive + ToPrimitive
{
}

impl<T> IntScalar for T where
    T: Clone
        + Debug
        + Display
        + Ord
        + Integer
        + Signed
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
{
}

/// A field with exact (or, for floats, best effort) division.
pub trait FieldScalar: Clone + Debug + Num + Signed {}

impl<T> FieldScalar for T where T: Clone + Debug + Num + Signed {}

/// Floating point type used for fitted values and test statistics.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Default convergence tolerance for iterative fits in this precision.
    fn default_tolerance() -> Self;
}

impl Real for f64 {
    fn default_tolerance() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn default_tolerance() -> Self {
        1e-5
    }
}

pub(crate) fn add<T: IntScalar>(a: &T, b: &T) -> Result<T> {
    a.checked_add(b).ok_or(Error::Overflow("addition"))
}

pub(crate) fn sub<T: IntScalar>(a: &T, b: &T) -> Result<T> {
    a.checked_sub(b).ok_or(Error::Overflow("subtraction"))
}

pub(crate) fn mul<T: IntScalar>(a: &T, b: &T) -> Result<T> {
    a.checked_mul(b).ok_or(Error::Overflow("multiplication"))
}

pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("finite constant representable in every Real")
}

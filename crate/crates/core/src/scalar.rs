//! Coefficient field abstraction.
//!
//! Everything on the analytic side (Laurent polynomials, log values, test
//! functions, germs) is generic over a [`Scalar`]. The exact instantiation is
//! [`Rational`](crate::Rational); `f64` is supported for quick numerical
//! experiments but is only exact for dyadic coefficients.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed};

/// A field of coefficients.
pub trait Scalar:
    Num + Signed + Clone + PartialEq + Debug + Display + FromStr + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// `x / 2`, used for half-integer valuations.
    fn half(self) -> Self {
        self / Self::from_int(2)
    }
}

impl Scalar for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn from_int(n: i64) -> Self {
        n as f32
    }
}

impl Scalar for Ratio<i64> {
    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
}

impl Scalar for Ratio<i128> {
    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num as i128, den as i128)
    }
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Lossless conversion of a scalar from a primitive, falling back to
/// [`Scalar::from_int`].
pub(crate) fn scalar_from_u128<S: Scalar>(n: u128) -> S {
    match i64::from_u128(n) {
        Some(v) => S::from_int(v),
        None => {
            // split to stay inside i64
            let hi = (n >> 62) as i64;
            let lo = (n & ((1u128 << 62) - 1)) as i64;
            S::from_int(hi) * S::from_int(1i64 << 62) + S::from_int(lo)
        }
    }
}

/// Serialize a scalar through its `Display` form (`"1/2"` for rationals).
pub fn ser_display<S: Display, Ser: serde::Serializer>(
    v: &S,
    s: Ser,
) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.collect_str(v)
}

//! Exact computations around the arithmetic fundamental lemma for `U(1,1)`
//! over a quadratic extension `E/F` of p-adic fields, and its arithmetic
//! transfer variants at parahoric levels.
//!
//! - [`field`]: valuations and η-signs of elements of `E`.
//! - [`symbolic`]: Laurent polynomials in `T = q^{-s}` and `log q` values.
//! - [`orbital`]: orbits on `S(F)`, box test functions, orbital integrals.
//! - [`germ`]: germ expansions near the diagonal torus.
//! - [`deformation`]: lifting bounds for quasi-canonical homomorphisms.
//! - [`matching`]: intersection numbers of matching orbits and the AFL / ATI
//!   checks.

pub mod deformation;
pub mod error;
pub mod field;
pub mod germ;
pub mod matching;
pub mod orbital;
pub mod scalar;
pub mod symbolic;

pub use error::{Error, Result};
pub use field::{FieldSetup, HalfInt, Sign, SignReq, ValClass};
pub use orbital::{InvariantFunction, Level, LevelInterval, OrbitData, Region, Side, ValInterval};
pub use scalar::Scalar;
pub use symbolic::{LaurentPoly, LogValue};

/// Exact rational coefficients.
pub type Rational = num_rational::Ratio<i64>;
/// Exact rational coefficients for large sweeps.
pub type BigRational = num_rational::BigRational;

pub type Poly = LaurentPoly<Rational>;
pub type Log = LogValue<Rational>;
pub type Function = InvariantFunction<Rational>;
pub type Germ = germ::GermData<Rational>;

pub type PolyF64 = LaurentPoly<f64>;
pub type LogF64 = LogValue<f64>;
pub type FunctionF64 = InvariantFunction<f64>;

//! The quadratic extension E/F at the level of valuations and η-signs.
//!
//! An element of E^× enters every formula only through its valuation `v(x)`
//! (a half-integer when E/F is ramified) and the sign `η(x)` of the fixed,
//! Galois-invariant extension of the quadratic character to E^×.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::LaurentPoly;

/// A sign in {+1, -1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn from_parity(n: i64) -> Sign {
        if n.rem_euclid(2) == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `self^n`.
    pub fn pow(self, n: i64) -> Sign {
        match self {
            Sign::Plus => Sign::Plus,
            Sign::Minus => Sign::from_parity(n),
        }
    }

    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_scalar<S: Scalar>(self) -> S {
        S::from_int(self.to_i64())
    }

    pub fn try_from_i64(v: i64) -> Result<Sign> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::Domain(format!("sign must be +1 or -1, got {other}"))),
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl Serialize for Sign {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        s.serialize_i64(self.to_i64())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Sign, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::try_from_i64(v).map_err(serde::de::Error::custom)
    }
}

/// A sign requirement in a test-function box, or a constraint on η of a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignReq {
    #[default]
    Any,
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl SignReq {
    pub fn exactly(s: Sign) -> SignReq {
        match s {
            Sign::Plus => SignReq::Plus,
            Sign::Minus => SignReq::Minus,
        }
    }

    pub fn admits(self, s: Sign) -> bool {
        match self {
            SignReq::Any => true,
            SignReq::Plus => s == Sign::Plus,
            SignReq::Minus => s == Sign::Minus,
        }
    }

    /// Multiply the required sign by `s`; `Any` is unchanged.
    pub fn twist(self, s: Sign) -> SignReq {
        match self {
            SignReq::Any => SignReq::Any,
            SignReq::Plus => SignReq::exactly(s),
            SignReq::Minus => SignReq::exactly(-s),
        }
    }

    pub fn is_any(&self) -> bool {
        *self == SignReq::Any
    }
}

/// A half-integer, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_doubled(d: i64) -> HalfInt {
        HalfInt(d)
    }

    pub const fn from_int(n: i64) -> HalfInt {
        HalfInt(2 * n)
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// 0 for integers, 1 for proper half-integers.
    pub fn parity(self) -> u8 {
        self.0.rem_euclid(2) as u8
    }

    pub fn to_int(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn floor(self) -> i64 {
        self.0.div_euclid(2)
    }

    pub fn ceil(self) -> i64 {
        -((-self.0).div_euclid(2))
    }

    pub fn to_scalar<S: Scalar>(self) -> S {
        S::from_ratio(self.0, 2)
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> HalfInt {
        HalfInt::from_int(n)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

// JSON: plain integers, or exact halves such as 1.5.
impl Serialize for HalfInt {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        if self.is_integer() {
            s.serialize_i64(self.0 / 2)
        } else {
            s.serialize_f64(self.0 as f64 / 2.0)
        }
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<HalfInt, D::Error> {
        let v = f64::deserialize(d)?;
        let doubled = v * 2.0;
        if doubled.fract() != 0.0 || doubled.abs() > (1u64 << 52) as f64 {
            return Err(serde::de::Error::custom(format!(
                "{v} is not a half-integer"
            )));
        }
        Ok(HalfInt(doubled as i64))
    }
}

/// The extension E/F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSetup")]
pub struct FieldSetup {
    /// Residue field cardinality.
    pub q: u64,
    pub ramified: bool,
    /// η(π_F). Forced to -1 when E/F is unramified.
    pub eta_pi_f: Sign,
}

#[derive(Deserialize)]
struct RawSetup {
    q: u64,
    ramified: bool,
    #[serde(default)]
    eta_pi_f: Option<Sign>,
}

impl TryFrom<RawSetup> for FieldSetup {
    type Error = Error;
    fn try_from(raw: RawSetup) -> Result<FieldSetup> {
        let eta = match (raw.ramified, raw.eta_pi_f) {
            (false, Some(Sign::Plus)) => {
                return Err(Error::InvalidSetup(
                    "unramified setups have eta(pi_F) = -1".into(),
                ))
            }
            (false, _) => Sign::Minus,
            (true, s) => s.unwrap_or(Sign::Plus),
        };
        FieldSetup::new(raw.q, raw.ramified, eta)
    }
}

impl FieldSetup {
    pub fn new(q: u64, ramified: bool, eta_pi_f: Sign) -> Result<FieldSetup> {
        if q < 2 {
            return Err(Error::InvalidSetup(format!("q must be >= 2, got {q}")));
        }
        if !ramified && eta_pi_f != Sign::Minus {
            return Err(Error::InvalidSetup(
                "unramified setups have eta(pi_F) = -1".into(),
            ));
        }
        Ok(FieldSetup {
            q,
            ramified,
            eta_pi_f,
        })
    }

    pub fn unramified(q: u64) -> Result<FieldSetup> {
        FieldSetup::new(q, false, Sign::Minus)
    }

    /// Ramified setup with the default choice η(π_F) = +1.
    pub fn ramified(q: u64) -> Result<FieldSetup> {
        FieldSetup::new(q, true, Sign::Plus)
    }

    /// The element of F^× with valuation `v` and η-sign `sign`. Unramified
    /// setups ignore `sign`.
    pub fn f_element(&self, v: i64, sign: Sign) -> ValClass {
        let sign = if self.ramified {
            sign
        } else {
            Sign::from_parity(v)
        };
        ValClass::new(HalfInt::from_int(v), sign)
    }
}

/// An element of E (possibly zero) seen through `(v(x), η(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValClass {
    /// `2 v(x)`.
    pub half_val: i64,
    pub eta_sign: Sign,
    #[serde(default)]
    pub is_zero: bool,
}

impl ValClass {
    pub fn new(v: HalfInt, eta_sign: Sign) -> ValClass {
        ValClass {
            half_val: v.doubled(),
            eta_sign,
            is_zero: false,
        }
    }

    pub fn zero() -> ValClass {
        ValClass {
            half_val: 0,
            eta_sign: Sign::Plus,
            is_zero: true,
        }
    }

    pub fn one() -> ValClass {
        ValClass::new(HalfInt::ZERO, Sign::Plus)
    }

    pub fn valuation(&self) -> Option<HalfInt> {
        (!self.is_zero).then_some(HalfInt::from_doubled(self.half_val))
    }

    /// Lies in F (as far as the valuation can tell).
    pub fn in_f(&self) -> bool {
        self.is_zero || self.half_val % 2 == 0
    }

    pub fn inverse(&self) -> Result<ValClass> {
        if self.is_zero {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        Ok(ValClass::new(
            HalfInt::from_doubled(-self.half_val),
            self.eta_sign,
        ))
    }

    pub fn check_for(&self, setup: &FieldSetup) -> Result<()> {
        if self.is_zero || setup.ramified {
            return Ok(());
        }
        if self.half_val % 2 != 0 {
            return Err(Error::Domain(
                "half-integer valuation in an unramified setup".into(),
            ));
        }
        if self.eta_sign != Sign::from_parity(self.half_val / 2) {
            return Err(Error::Domain("unramified eta must be (-1)^v(x)".into()));
        }
        Ok(())
    }
}

impl Mul for ValClass {
    type Output = ValClass;
    fn mul(self, rhs: ValClass) -> ValClass {
        if self.is_zero || rhs.is_zero {
            return ValClass::zero();
        }
        ValClass {
            half_val: self.half_val + rhs.half_val,
            eta_sign: self.eta_sign * rhs.eta_sign,
            is_zero: false,
        }
    }
}

/// `η_s(x) = η(x) T^{v(x)}` with `T = q^{-s}`.
pub fn eta_s<S: Scalar>(x: &ValClass, setup: &FieldSetup) -> Result<LaurentPoly<S>> {
    let v = x
        .valuation()
        .ok_or_else(|| Error::Domain("eta_s is undefined at 0".into()))?;
    x.check_for(setup)?;
    Ok(LaurentPoly::monomial(x.eta_sign.to_scalar(), v))
}

/// `N_{E/F}(x)`: doubles the valuation and lands in the kernel of η.
pub fn norm_valclass(x: &ValClass) -> ValClass {
    if x.is_zero {
        return ValClass::zero();
    }
    ValClass {
        half_val: 2 * x.half_val,
        eta_sign: Sign::Plus,
        is_zero: false,
    }
}

/// `∫_{u ∈ O_F^×, η(u) ∈ constraint} η(u)^w du` with `Vol(O_F^×) = 1`.
///
/// Unramified: η is trivial on units. Ramified: the two cosets of the norm
/// subgroup have measure 1/2 each.
pub fn unit_integral<S: Scalar>(setup: &FieldSetup, constraint: SignReq, weight_eta: bool) -> S {
    if !setup.ramified {
        return match constraint {
            SignReq::Any | SignReq::Plus => S::one(),
            SignReq::Minus => S::zero(),
        };
    }
    let half = S::from_ratio(1, 2);
    match (constraint, weight_eta) {
        (SignReq::Any, false) => S::one(),
        (SignReq::Any, true) => S::zero(),
        (SignReq::Plus, _) => half,
        (SignReq::Minus, false) => half,
        (SignReq::Minus, true) => -half,
    }
}

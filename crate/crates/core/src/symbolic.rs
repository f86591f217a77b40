//! Laurent polynomials in `T = q^{-s}` with half-integer exponents, and the
//! value/derivative functionals at `s = 0`.
//!
//! `d/ds T^m = -m log(q) T^m`, so the derivative at `s = 0` of
//! `Σ c_m T^m` is `-(Σ m c_m) log q`. `log q` is kept as a formal unit.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::HalfInt;
use crate::scalar::Scalar;

/// `Σ c_m T^m`, `m ∈ ½ℤ`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly<S> {
    terms: BTreeMap<HalfInt, S>,
}

impl<S: Scalar> Default for LaurentPoly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> LaurentPoly<S> {
    pub fn zero() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(c, HalfInt::ZERO)
    }

    pub fn monomial(c: S, exp: HalfInt) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (HalfInt, S)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: HalfInt, c: S) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(S::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: HalfInt) -> S {
        self.terms.get(&exp).cloned().unwrap_or_else(S::zero)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (HalfInt, &S)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn has_integer_exponents(&self) -> bool {
        self.terms.keys().all(|e| e.is_integer())
    }

    pub fn scale(&self, k: &S) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.clone() * k.clone()))
                .collect(),
        }
    }

    /// Multiply by `T^k`.
    pub fn shift(&self, k: HalfInt) -> Self {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e + k, c.clone()))
                .collect(),
        }
    }

    /// Substitute `T = 1`.
    pub fn eval_at_s0(&self) -> S {
        self.terms
            .values()
            .fold(S::zero(), |acc, c| acc + c.clone())
    }

    /// `d/ds` at `s = 0`, as a multiple of `log q`.
    pub fn d_ds_at_s0(&self) -> LogValue<S> {
        let slope = self.terms.iter().fold(S::zero(), |acc, (e, c)| {
            acc + e.to_scalar::<S>() * c.clone()
        });
        LogValue::log_q(-slope)
    }

    /// The formal `s`-derivative divided by `log q`: `T^m ↦ -m T^m`.
    pub fn derivative_in_s(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(e, c)| (*e, -(e.to_scalar::<S>() * c.clone()))),
        )
    }
}

/// Free-function form of [`LaurentPoly::eval_at_s0`].
pub fn eval_at_s0<S: Scalar>(p: &LaurentPoly<S>) -> S {
    p.eval_at_s0()
}

/// Free-function form of [`LaurentPoly::d_ds_at_s0`].
pub fn d_ds_at_s0<S: Scalar>(p: &LaurentPoly<S>) -> LogValue<S> {
    p.d_ds_at_s0()
}

/// Free-function form of [`LaurentPoly::derivative_in_s`]; the result
/// carries an implicit factor `log q`.
pub fn poly_derivative_in_s<S: Scalar>(p: &LaurentPoly<S>) -> LaurentPoly<S> {
    p.derivative_in_s()
}

impl<S: Scalar> Add for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn add(self, rhs: &LaurentPoly<S>) -> LaurentPoly<S> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<S: Scalar> Add for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn add(self, rhs: LaurentPoly<S>) -> LaurentPoly<S> {
        &self + &rhs
    }
}

impl<S: Scalar> AddAssign<&LaurentPoly<S>> for LaurentPoly<S> {
    fn add_assign(&mut self, rhs: &LaurentPoly<S>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl<S: Scalar> Neg for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn neg(self) -> LaurentPoly<S> {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl<S: Scalar> Neg for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn neg(self) -> LaurentPoly<S> {
        -&self
    }
}

impl<S: Scalar> Sub for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn sub(self, rhs: &LaurentPoly<S>) -> LaurentPoly<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Sub for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn sub(self, rhs: LaurentPoly<S>) -> LaurentPoly<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn mul(self, rhs: &LaurentPoly<S>) -> LaurentPoly<S> {
        let mut out = LaurentPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(*ea + *eb, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Mul for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn mul(self, rhs: LaurentPoly<S>) -> LaurentPoly<S> {
        &self * &rhs
    }
}

fn fmt_exponent(e: HalfInt) -> String {
    if e == HalfInt::from_int(1) {
        "T".to_string()
    } else {
        format!("T^{e}")
    }
}

impl<S: Scalar> fmt::Display for LaurentPoly<S> {
    /// Canonical rendering, exponents ascending: `-T^-1 + 1 - T + 1/2*T^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            if *e == HalfInt::ZERO {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&fmt_exponent(*e))?;
            } else {
                write!(f, "{mag}*{}", fmt_exponent(*e))?;
            }
        }
        Ok(())
    }
}

fn parse_halfint(s: &str) -> Option<HalfInt> {
    match s.split_once('/') {
        Some((num, "2")) => num.parse::<i64>().ok().map(HalfInt::from_doubled),
        Some(_) => None,
        None => s.parse::<i64>().ok().map(HalfInt::from_int),
    }
}

fn parse_term<S: Scalar>(term: &str, negative: bool) -> Result<(HalfInt, S)> {
    let bad = || Error::Domain(format!("cannot parse Laurent term {term:?}"));
    let (coeff, exp) = match term.split_once('T') {
        None => (term.parse::<S>().map_err(|_| bad())?, HalfInt::ZERO),
        Some((pre, post)) => {
            let coeff = match pre {
                "" => S::one(),
                _ => pre
                    .strip_suffix('*')
                    .ok_or_else(bad)?
                    .parse::<S>()
                    .map_err(|_| bad())?,
            };
            let exp = match post {
                "" => HalfInt::from_int(1),
                _ => parse_halfint(post.strip_prefix('^').ok_or_else(bad)?).ok_or_else(bad)?,
            };
            (coeff, exp)
        }
    };
    Ok((exp, if negative { -coeff } else { coeff }))
}

impl<S: Scalar> FromStr for LaurentPoly<S> {
    type Err = Error;

    /// Parses the canonical rendering produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let (mut negative, mut rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let mut poly = Self::zero();
        loop {
            let plus = rest.find(" + ");
            let minus = rest.find(" - ");
            let next = match (plus, minus) {
                (Some(p), Some(m)) => Some(p.min(m)),
                (p, m) => p.or(m),
            };
            let (term, tail) = match next {
                Some(idx) => (
                    &rest[..idx],
                    Some((&rest[idx + 1..idx + 2], &rest[idx + 3..])),
                ),
                None => (rest, None),
            };
            let (e, c) = parse_term::<S>(term, negative)?;
            poly.add_term(e, c);
            match tail {
                Some((op, t)) => {
                    negative = op == "-";
                    rest = t;
                }
                None => break,
            }
        }
        Ok(poly)
    }
}

impl<S: Scalar> Serialize for LaurentPoly<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de, S: Scalar> Deserialize<'de> for LaurentPoly<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `rational_part + log_q_part · log q`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogValue<S> {
    pub rational_part: S,
    pub log_q_part: S,
}

impl<S: Scalar> LogValue<S> {
    pub fn zero() -> Self {
        LogValue {
            rational_part: S::zero(),
            log_q_part: S::zero(),
        }
    }

    pub fn new(rational_part: S, log_q_part: S) -> Self {
        LogValue {
            rational_part,
            log_q_part,
        }
    }

    /// `c · log q`.
    pub fn log_q(c: S) -> Self {
        LogValue::new(S::zero(), c)
    }

    pub fn is_zero(&self) -> bool {
        self.rational_part.is_zero() && self.log_q_part.is_zero()
    }

    pub fn scale(&self, k: &S) -> Self {
        LogValue::new(
            self.rational_part.clone() * k.clone(),
            self.log_q_part.clone() * k.clone(),
        )
    }
}

impl<S: Scalar> Add for LogValue<S> {
    type Output = LogValue<S>;
    fn add(self, rhs: LogValue<S>) -> LogValue<S> {
        LogValue::new(
            self.rational_part + rhs.rational_part,
            self.log_q_part + rhs.log_q_part,
        )
    }
}

impl<S: Scalar> Sub for LogValue<S> {
    type Output = LogValue<S>;
    fn sub(self, rhs: LogValue<S>) -> LogValue<S> {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for LogValue<S> {
    type Output = LogValue<S>;
    fn neg(self) -> LogValue<S> {
        LogValue::new(-self.rational_part, -self.log_q_part)
    }
}

impl<S: Scalar> fmt::Display for LogValue<S> {
    /// `3/2*log q`, `1 - 2*log q`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lq = &self.log_q_part;
        match (self.rational_part.is_zero(), lq.is_zero()) {
            (true, true) => f.write_str("0"),
            (false, true) => write!(f, "{}", self.rational_part),
            (r_zero, false) => {
                if !r_zero {
                    write!(f, "{}", self.rational_part)?;
                    f.write_str(if lq.is_negative() { " - " } else { " + " })?;
                } else if lq.is_negative() {
                    f.write_str("-")?;
                }
                let mag = lq.abs();
                if mag.is_one() {
                    f.write_str("log q")
                } else {
                    write!(f, "{mag}*log q")
                }
            }
        }
    }
}

impl<S: Scalar> Serialize for LogValue<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type P = LaurentPoly<Rational>;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn p(s: &str) -> P {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("1 - T^-1").eval_at_s0(), r(0));
        assert_eq!(P::zero().eval_at_s0(), r(0));
        assert_eq!(p("3*T^2 + 2").eval_at_s0(), r(5));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("1 - T^-1").d_ds_at_s0(), LogValue::log_q(r(-1)));
        assert_eq!(p("7").d_ds_at_s0(), LogValue::zero());
        assert_eq!(
            p("-T^-1 + 1 - T + T^2").d_ds_at_s0(),
            LogValue::log_q(r(-2))
        );
    }

    #[test]
    fn formal_derivative_examples() {
        assert_eq!(p("T^5").derivative_in_s(), p("-5*T^5"));
        assert_eq!(p("1").derivative_in_s(), P::zero());
        assert_eq!(p("T + T^-1").derivative_in_s(), p("T^-1 - T"));
    }

    #[test]
    fn canonical_rendering() {
        let poly = P::from_terms([
            (HalfInt::from_int(2), r(1)),
            (HalfInt::from_int(-1), r(-1)),
            (HalfInt::from_int(1), r(-1)),
            (HalfInt::ZERO, r(1)),
        ]);
        assert_eq!(poly.to_string(), "-T^-1 + 1 - T + T^2");
        let half = P::from_terms([
            (HalfInt::from_doubled(-3), Rational::from_ratio(-1, 2)),
            (HalfInt::from_doubled(1), r(3)),
        ]);
        assert_eq!(half.to_string(), "-1/2*T^-3/2 + 3*T^1/2");
        assert_eq!(half.to_string().parse::<P>().unwrap(), half);
        assert_eq!(
            LogValue::log_q(Rational::from_ratio(3, 2)).to_string(),
            "3/2*log q"
        );
        assert_eq!(LogValue::new(r(1), r(-1)).to_string(), "1 - log q");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("T^x".parse::<P>().is_err());
        assert!("2T".parse::<P>().is_err());
        assert!("T^1/3".parse::<P>().is_err());
    }

    fn arb_poly() -> impl Strategy<Value = P> {
        prop::collection::vec((-20i64..=20, -6i64..=6, 1i64..=4), 0..8).prop_map(|ts| {
            P::from_terms(
                ts.into_iter()
                    .map(|(e, n, d)| (HalfInt::from_doubled(e), Rational::new(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn functionals_are_linear(a in arb_poly(), b in arb_poly(), k in -5i64..=5) {
            let k = r(k);
            prop_assert_eq!((&a + &b).eval_at_s0(), a.eval_at_s0() + b.eval_at_s0());
            prop_assert_eq!((&a + &b).d_ds_at_s0(), a.d_ds_at_s0() + b.d_ds_at_s0());
            prop_assert_eq!(a.scale(&k).eval_at_s0(), a.eval_at_s0() * k);
            prop_assert_eq!(a.scale(&k).d_ds_at_s0(), a.d_ds_at_s0().scale(&k));
        }

        #[test]
        fn product_rule_at_zero(a in arb_poly(), b in arb_poly()) {
            let ab = &a * &b;
            prop_assert_eq!(ab.eval_at_s0(), a.eval_at_s0() * b.eval_at_s0());
            let expected = a.d_ds_at_s0().scale(&b.eval_at_s0()) + b.d_ds_at_s0().scale(&a.eval_at_s0());
            prop_assert_eq!(ab.d_ds_at_s0(), expected);
        }

        #[test]
        fn text_round_trip(a in arb_poly()) {
            prop_assert_eq!(a.to_string().parse::<P>().unwrap(), a);
        }
    }
}

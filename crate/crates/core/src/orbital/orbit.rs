//! Regular semisimple orbits on S(F), recorded by their invariants.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldSetup, HalfInt, Sign, ValClass};

/// Conductor level of a diagonal entry: the largest `s` with the entry in
/// `O_s = O_F + π_F^s O_E`, or `Infinite` when it lies in `O_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Finite(u32),
    Infinite,
}

impl Level {
    pub fn is_finite(self) -> bool {
        matches!(self, Level::Finite(_))
    }

    /// `self >= n`.
    pub fn at_least(self, n: u32) -> bool {
        self >= Level::Finite(n)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Level::Finite(n) => s.serialize_u32(*n),
            Level::Infinite => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Level, D::Error> {
        Ok(match Option::<u32>::deserialize(d)? {
            Some(n) => Level::Finite(n),
            None => Level::Infinite,
        })
    }
}

/// Which unitary group an orbit matches into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    U0,
    U1,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::U0 => "U0",
            Side::U1 => "U1",
        })
    }
}

/// The F^×-orbit of
/// `γ = [[a, b], [(1 - N(a))/b̄, -ā b / b̄]]`
/// through the data its orbital integrals consume.
///
/// Derived entries: `v(c) = t - v(b)`, `η(c) = η(1 - N(a)) η(b)`,
/// `v(d) = v(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOrbit")]
pub struct OrbitData {
    pub setup: FieldSetup,
    pub v_a: HalfInt,
    pub lvl_a: Level,
    pub lvl_d: Level,
    /// `v(1 - N(a))`.
    pub t: u32,
    /// `η(1 - N(a))`.
    pub sgn_1mna: Sign,
    pub v_b: HalfInt,
    pub sgn_b: Sign,
}

#[derive(Deserialize)]
struct RawOrbit {
    setup: FieldSetup,
    #[serde(default)]
    v_a: HalfInt,
    #[serde(default = "infinite")]
    lvl_a: Level,
    #[serde(default = "infinite")]
    lvl_d: Level,
    t: u32,
    sgn_1mna: Option<Sign>,
    v_b: HalfInt,
    sgn_b: Option<Sign>,
}

fn infinite() -> Level {
    Level::Infinite
}

impl TryFrom<RawOrbit> for OrbitData {
    type Error = Error;
    fn try_from(raw: RawOrbit) -> Result<OrbitData> {
        // unramified signs may be omitted; they are forced by valuations
        let forced = |given: Option<Sign>, v: Option<i64>| match (given, v) {
            (Some(s), _) => Ok(s),
            (None, Some(v)) if !raw.setup.ramified => Ok(Sign::from_parity(v)),
            (None, _) => Err(Error::InvalidOrbit(
                "ramified orbits must state sgn_1mna and sgn_b".into(),
            )),
        };
        let sgn_1mna = forced(raw.sgn_1mna, Some(raw.t as i64))?;
        let sgn_b = forced(raw.sgn_b, raw.v_b.to_int())?;
        OrbitData::new(
            raw.setup, raw.v_a, raw.lvl_a, raw.lvl_d, raw.t, sgn_1mna, raw.v_b, sgn_b,
        )
    }
}

impl OrbitData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        setup: FieldSetup,
        v_a: HalfInt,
        lvl_a: Level,
        lvl_d: Level,
        t: u32,
        sgn_1mna: Sign,
        v_b: HalfInt,
        sgn_b: Sign,
    ) -> Result<OrbitData> {
        let gamma = OrbitData {
            setup,
            v_a,
            lvl_a,
            lvl_d,
            t,
            sgn_1mna,
            v_b,
            sgn_b,
        };
        gamma.validate()?;
        Ok(gamma)
    }

    /// Unramified orbit with unit diagonal entries in `O_F`.
    pub fn unramified(q: u64, t: u32, v_b: i64) -> Result<OrbitData> {
        OrbitData::new(
            FieldSetup::unramified(q)?,
            HalfInt::ZERO,
            Level::Infinite,
            Level::Infinite,
            t,
            Sign::from_parity(t as i64),
            HalfInt::from_int(v_b),
            Sign::from_parity(v_b),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOrbit(m.to_string()));
        match self.v_a.cmp(&HalfInt::ZERO) {
            Ordering::Less => return bad("v(a) < 0 forces v(1 - N(a)) < 0"),
            Ordering::Greater => {
                if self.t != 0 || self.sgn_1mna != Sign::Plus {
                    return bad("v(a) > 0 forces 1 - N(a) to be a norm unit (t = 0, sign +1)");
                }
            }
            Ordering::Equal => {}
        }
        if !self.setup.ramified {
            if !self.v_b.is_integer() || !self.v_a.is_integer() {
                return bad("half-integer valuation in an unramified setup");
            }
            if self.sgn_b != Sign::from_parity(self.v_b.floor()) {
                return bad("unramified: eta(b) must be (-1)^v(b)");
            }
            if self.sgn_1mna != Sign::from_parity(self.t as i64) {
                return bad("unramified: eta(1 - N(a)) must be (-1)^t");
            }
        }
        Ok(())
    }

    pub fn v_c(&self) -> HalfInt {
        HalfInt::from_int(self.t as i64) - self.v_b
    }

    pub fn sgn_c(&self) -> Sign {
        self.sgn_1mna * self.sgn_b
    }

    pub fn b(&self) -> ValClass {
        ValClass::new(self.v_b, self.sgn_b)
    }

    pub fn c(&self) -> ValClass {
        ValClass::new(self.v_c(), self.sgn_c())
    }

    /// U0 iff `1 - N(a)` is a norm.
    pub fn side(&self) -> Side {
        match self.sgn_1mna {
            Sign::Plus => Side::U0,
            Sign::Minus => Side::U1,
        }
    }

    /// `λ^{-1} γ λ` for `λ ∈ F^×` embedded as `diag(λ, 1)`.
    pub fn conjugate_by(&self, lambda: &ValClass) -> Result<OrbitData> {
        if lambda.is_zero || !lambda.in_f() {
            return Err(Error::Domain("conjugation needs lambda in F^x".into()));
        }
        let mut out = *self;
        out.v_b = self.v_b - HalfInt::from_doubled(lambda.half_val);
        out.sgn_b = self.sgn_b * lambda.eta_sign;
        out.validate()?;
        Ok(out)
    }

    /// `2 v(b) mod 2`; indexes the class of `b` in `E^×/F^×` seen by germs.
    pub fn b_parity(&self) -> u8 {
        self.v_b.parity()
    }
}

impl fmt::Display for OrbitData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(q={}, {}, v_a={}, lvl=({}, {}), t={}, eta(1-Na)={}, v_b={}, eta(b)={})",
            self.setup.q,
            if self.setup.ramified { "ram" } else { "unram" },
            self.v_a,
            self.lvl_a,
            self.lvl_d,
            self.t,
            self.sgn_1mna,
            self.v_b,
            self.sgn_b
        )
    }
}

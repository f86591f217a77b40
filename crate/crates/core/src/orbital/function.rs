//! H(F)×H(F)-invariant test functions on S(F) as finite sums of boxes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::orbit::{Level, Side};
use crate::error::{Error, Result};
use crate::field::{HalfInt, Sign, SignReq, ValClass};
use crate::scalar::Scalar;

/// `[lo, hi]` of half-integer valuations; `None` is `-∞` / `+∞`.
///
/// An entry equal to zero has valuation `+∞`, so it is accepted exactly when
/// `hi` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ValInterval {
    pub lo: Option<HalfInt>,
    pub hi: Option<HalfInt>,
}

impl ValInterval {
    pub const ALL: ValInterval = ValInterval { lo: None, hi: None };

    pub fn new(lo: Option<HalfInt>, hi: Option<HalfInt>) -> ValInterval {
        ValInterval { lo, hi }
    }

    pub fn point(v: i64) -> ValInterval {
        let v = HalfInt::from_int(v);
        ValInterval::new(Some(v), Some(v))
    }

    pub fn at_least(v: i64) -> ValInterval {
        ValInterval::new(Some(HalfInt::from_int(v)), None)
    }

    /// `[0, ∞]`, i.e. the integers `O_E`.
    pub fn integral() -> ValInterval {
        ValInterval::at_least(0)
    }

    pub fn contains(&self, v: HalfInt) -> bool {
        self.lo.is_none_or(|lo| v >= lo) && self.hi.is_none_or(|hi| v <= hi)
    }

    pub fn contains_zero_entry(&self) -> bool {
        self.hi.is_none()
    }

    /// Accepts `Some(v)` for a nonzero entry of valuation `v`, `None` for 0.
    pub fn accepts(&self, v: Option<HalfInt>) -> bool {
        match v {
            Some(v) => self.contains(v),
            None => self.contains_zero_entry(),
        }
    }

    pub fn shift(&self, k: HalfInt) -> ValInterval {
        ValInterval::new(self.lo.map(|x| x + k), self.hi.map(|x| x + k))
    }

    pub fn finite_endpoints(&self) -> impl Iterator<Item = HalfInt> {
        self.lo.into_iter().chain(self.hi)
    }
}

/// `[lo, hi]` of levels (or of `t`); `hi = None` includes `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelInterval {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl LevelInterval {
    pub const ALL: LevelInterval = LevelInterval { lo: 0, hi: None };

    pub fn new(lo: u32, hi: Option<u32>) -> LevelInterval {
        LevelInterval { lo, hi }
    }

    pub fn point(n: u32) -> LevelInterval {
        LevelInterval::new(n, Some(n))
    }

    pub fn from(lo: u32) -> LevelInterval {
        LevelInterval::new(lo, None)
    }

    pub fn contains(&self, l: Level) -> bool {
        match l {
            Level::Infinite => self.hi.is_none(),
            Level::Finite(n) => n >= self.lo && self.hi.is_none_or(|hi| n <= hi),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_some_and(|hi| hi < self.lo)
    }

    /// Whether `self ⊆ other`.
    pub fn within(&self, other: &LevelInterval) -> bool {
        self.is_empty()
            || (self.lo >= other.lo
                && match (self.hi, other.hi) {
                    (_, None) => true,
                    (None, Some(_)) => false,
                    (Some(a), Some(b)) => a <= b,
                })
    }

    /// A level inside the interval; every box level interval either contains
    /// a refinement piece or misses it, so one representative suffices.
    pub fn representative(&self) -> Level {
        Level::Finite(self.lo)
    }
}

impl fmt::Display for LevelInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{}, {}]", self.lo, hi),
            None => write!(f, "[{}, inf]", self.lo),
        }
    }
}

impl Serialize for ValInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.lo, self.hi).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<ValInterval, D::Error> {
        let (lo, hi) = Deserialize::deserialize(d)?;
        Ok(ValInterval::new(lo, hi))
    }
}

impl Serialize for LevelInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.lo, self.hi).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LevelInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<LevelInterval, D::Error> {
        let (lo, hi) = Deserialize::deserialize(d)?;
        Ok(LevelInterval::new(lo, hi))
    }
}

/// Break a family of level intervals into the coarsest common refinement of
/// `[0, ∞]`.
pub fn level_pieces<'a, I>(intervals: I) -> Vec<LevelInterval>
where
    I: IntoIterator<Item = &'a LevelInterval>,
{
    let mut cuts = BTreeSet::from([0u32]);
    for iv in intervals {
        if iv.is_empty() {
            continue;
        }
        cuts.insert(iv.lo);
        if let Some(hi) = iv.hi {
            cuts.insert(hi + 1);
        }
    }
    let cuts: Vec<u32> = cuts.into_iter().collect();
    let mut out = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        out.push(LevelInterval::new(w[0], Some(w[1] - 1)));
    }
    out.push(LevelInterval::from(*cuts.last().unwrap()));
    out
}

/// A point of S(F) seen through the data boxes can test. `None` in `b` or
/// `c` means that entry is zero; `t = Infinite` and `side = None` on B0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    pub v_a: HalfInt,
    pub lvl_a: Level,
    pub lvl_d: Level,
    pub t: Level,
    pub side: Option<Side>,
    pub b: Option<(HalfInt, Sign)>,
    pub c: Option<(HalfInt, Sign)>,
}

/// The indicator of a box: valuation windows on the four entries, optional
/// η-sign requirements on `b` and `c`, level windows on the diagonal, and
/// optional restrictions on `t = v(1 - N(a))` and on the matching side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    #[serde(default)]
    pub a: ValInterval,
    #[serde(default)]
    pub b: ValInterval,
    #[serde(default)]
    pub c: ValInterval,
    #[serde(default)]
    pub d: ValInterval,
    #[serde(default, skip_serializing_if = "SignReq::is_any")]
    pub sgn_b: SignReq,
    #[serde(default, skip_serializing_if = "SignReq::is_any")]
    pub sgn_c: SignReq,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lvl_a: Option<LevelInterval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lvl_d: Option<LevelInterval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<LevelInterval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

impl Region {
    /// Every entry integral: the indicator of `K' ∩ S`.
    pub fn integral() -> Region {
        Region {
            a: ValInterval::integral(),
            b: ValInterval::integral(),
            c: ValInterval::integral(),
            d: ValInterval::integral(),
            sgn_b: SignReq::Any,
            sgn_c: SignReq::Any,
            lvl_a: None,
            lvl_d: None,
            t: None,
            side: None,
        }
    }

    /// Unit diagonal with prescribed level windows, integral off-diagonal.
    pub fn unit_diagonal(lvl_a: LevelInterval, lvl_d: LevelInterval) -> Region {
        Region {
            a: ValInterval::point(0),
            d: ValInterval::point(0),
            lvl_a: Some(lvl_a),
            lvl_d: Some(lvl_d),
            ..Region::integral()
        }
    }

    pub fn lvl_a(&self) -> LevelInterval {
        self.lvl_a.unwrap_or(LevelInterval::ALL)
    }

    pub fn lvl_d(&self) -> LevelInterval {
        self.lvl_d.unwrap_or(LevelInterval::ALL)
    }

    /// Static checks: a sign requirement on an entry excludes that entry
    /// vanishing, and a side requirement must exclude the whole of B0.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidFunction(m.to_string()));
        if !self.sgn_b.is_any() && self.b.hi.is_none() {
            return bad("a sign requirement on b needs an upper bound on v(b)");
        }
        if !self.sgn_c.is_any() && self.c.hi.is_none() {
            return bad("a sign requirement on c needs an upper bound on v(c)");
        }
        if self.side.is_some() {
            let t_bounded = self.t.is_some_and(|t| t.hi.is_some());
            if !t_bounded && (self.b.hi.is_none() || self.c.hi.is_none()) {
                return bad("a side requirement needs t or both v(b), v(c) bounded above");
            }
        }
        Ok(())
    }

    pub fn admits(&self, p: &Point) -> bool {
        let entry_ok = |iv: &ValInterval, req: SignReq, e: Option<(HalfInt, Sign)>| match e {
            Some((v, s)) => iv.contains(v) && req.admits(s),
            None => iv.contains_zero_entry() && req.is_any(),
        };
        self.a.contains(p.v_a)
            && self.d.contains(p.v_a)
            && self.lvl_a().contains(p.lvl_a)
            && self.lvl_d().contains(p.lvl_d)
            && self.t.is_none_or(|t| t.contains(p.t))
            && self.side.is_none_or(|s| p.side == Some(s))
            && entry_ok(&self.b, self.sgn_b, p.b)
            && entry_ok(&self.c, self.sgn_c, p.c)
    }

    /// Whether the box meets `diag(a, d)` with unit `a` of level in `la`
    /// and `d` of level in `ld`.
    pub fn admits_b0(&self, la: Level, ld: Level) -> bool {
        self.admits(&Point {
            v_a: HalfInt::ZERO,
            lvl_a: la,
            lvl_d: ld,
            t: Level::Infinite,
            side: None,
            b: None,
            c: None,
        })
    }

    /// Region of `λ^* 1_R`, i.e. `{γ : λ^{-1} γ λ ∈ R}`.
    pub fn pullback(&self, lambda: &ValClass) -> Region {
        let v = HalfInt::from_doubled(lambda.half_val);
        Region {
            b: self.b.shift(v),
            c: self.c.shift(-v),
            sgn_b: self.sgn_b.twist(lambda.eta_sign),
            sgn_c: self.sgn_c.twist(lambda.eta_sign),
            ..self.clone()
        }
    }
}

/// `Σ coeff · 1_region`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantFunction<S> {
    pub terms: Vec<(S, Region)>,
}

impl<S: Scalar> Default for InvariantFunction<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> InvariantFunction<S> {
    pub fn zero() -> Self {
        InvariantFunction { terms: Vec::new() }
    }

    pub fn indicator(region: Region) -> Self {
        Self::single(S::one(), region)
    }

    pub fn single(coeff: S, region: Region) -> Self {
        InvariantFunction {
            terms: vec![(coeff, region)],
        }
    }

    /// `1_{K'}` restricted to S(F).
    pub fn unit_k() -> Self {
        Self::indicator(Region::integral())
    }

    /// `1(V_a, V_d)`: unit diagonal entries with levels in the given windows.
    pub fn diagonal_units(lvl_a: LevelInterval, lvl_d: LevelInterval) -> Self {
        Self::indicator(Region::unit_diagonal(lvl_a, lvl_d))
    }

    pub fn push(&mut self, coeff: S, region: Region) {
        if !coeff.is_zero() {
            self.terms.push((coeff, region));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, r) in &other.terms {
            out.push(c.clone(), r.clone());
        }
        out
    }

    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::zero();
        for (c, r) in &self.terms {
            out.push(c.clone() * k.clone(), r.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn validate(&self) -> Result<()> {
        self.terms.iter().try_for_each(|(_, r)| r.validate())
    }

    /// `f(p)`.
    pub fn eval(&self, p: &Point) -> S {
        self.terms
            .iter()
            .filter(|(_, r)| r.admits(p))
            .fold(S::zero(), |acc, (c, _)| acc + c.clone())
    }

    /// `(λ^* f)(γ) = f(λ^{-1} γ λ)` for `λ ∈ F^×`.
    pub fn pullback(&self, lambda: &ValClass) -> Result<Self> {
        if lambda.is_zero || !lambda.in_f() {
            return Err(Error::Domain("pullback needs lambda in F^x".into()));
        }
        Ok(InvariantFunction {
            terms: self
                .terms
                .iter()
                .map(|(c, r)| (c.clone(), r.pullback(lambda)))
                .collect(),
        })
    }

    pub fn level_pieces_a(&self) -> Vec<LevelInterval> {
        let ivs: Vec<_> = self.terms.iter().filter_map(|(_, r)| r.lvl_a).collect();
        level_pieces(&ivs)
    }

    pub fn level_pieces_d(&self) -> Vec<LevelInterval> {
        let ivs: Vec<_> = self.terms.iter().filter_map(|(_, r)| r.lvl_d).collect();
        level_pieces(&ivs)
    }

    /// `f|_{B0}` as a value on each level class of `diag(a, d)`. Zero classes
    /// are dropped.
    pub fn b0_restriction(&self) -> Vec<(LevelInterval, LevelInterval, S)> {
        let mut out = Vec::new();
        for pa in self.level_pieces_a() {
            for pd in self.level_pieces_d() {
                let v = self
                    .terms
                    .iter()
                    .filter(|(_, r)| r.admits_b0(pa.representative(), pd.representative()))
                    .fold(S::zero(), |acc, (c, _)| acc + c.clone());
                if !v.is_zero() {
                    out.push((pa, pd, v));
                }
            }
        }
        out
    }

    pub fn vanishes_on_b0(&self) -> bool {
        self.b0_restriction().is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    coeff: String,
    region: Region,
}

impl<S: Scalar> Serialize for InvariantFunction<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let raw: Vec<RawTerm> = self
            .terms
            .iter()
            .map(|(c, r)| RawTerm {
                coeff: c.to_string(),
                region: r.clone(),
            })
            .collect();
        raw.serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for InvariantFunction<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<RawTerm>::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.len());
        for t in raw {
            let c =
                t.coeff.trim().parse::<S>().map_err(|_| {
                    serde::de::Error::custom(format!("bad coefficient {:?}", t.coeff))
                })?;
            t.region.validate().map_err(serde::de::Error::custom)?;
            terms.push((c, t.region));
        }
        Ok(InvariantFunction { terms })
    }
}

//! Germ expansions of orbital integrals near the diagonal torus `B0`.
//!
//! For `f` vanishing on `B0` and `γ` close enough to `diag(a, d)`,
//!
//! `Orb_γ(f, s) = η_s(b) A0(s; a, d, b) + η_s(c)^{-1} A1(s; a, d, c)`.
//!
//! Box functions only see the diagonal through level classes and `b`, `c`
//! through `v mod ℤ`, so germs are keyed on `(lvl_a piece, lvl_d piece,
//! 2v mod 2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{unit_integral, FieldSetup, HalfInt, Sign, SignReq};
use crate::orbital::{
    level_pieces, orb, regularize_off_b0, InvariantFunction, Level, LevelInterval, OrbitData,
    OrbitGrid, Point, Region, RegularizeParams, Side, ValInterval,
};
use crate::scalar::Scalar;
use crate::symbolic::{LaurentPoly, LogValue};

/// Which off-diagonal entry a germ term is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GermSide {
    /// `A0`, paired with `η_s(b)`.
    B,
    /// `A1`, paired with `η_s(c)^{-1}`.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GermKey {
    pub lvl_a: LevelInterval,
    pub lvl_d: LevelInterval,
    /// `2v mod 2` of the attached entry; always 0 when unramified.
    pub parity: u8,
}

impl GermKey {
    pub fn new(lvl_a: LevelInterval, lvl_d: LevelInterval, parity: u8) -> GermKey {
        GermKey {
            lvl_a,
            lvl_d,
            parity,
        }
    }

    pub fn matches(&self, la: Level, ld: Level, parity: u8) -> bool {
        self.parity == parity && self.lvl_a.contains(la) && self.lvl_d.contains(ld)
    }
}

impl fmt::Display for GermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(lvl_a {}, lvl_d {}, parity {})",
            self.lvl_a, self.lvl_d, self.parity
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GermEntry<S> {
    pub key: GermKey,
    pub poly: LaurentPoly<S>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GermData<S> {
    pub a0: Vec<GermEntry<S>>,
    pub a1: Vec<GermEntry<S>>,
    /// The expansion holds for every orbit with `t >= validity_threshold`.
    pub validity_threshold: u32,
}

fn parities(setup: &FieldSetup) -> &'static [u8] {
    if setup.ramified {
        &[0, 1]
    } else {
        &[0]
    }
}

impl<S: Scalar> GermData<S> {
    pub fn zero() -> Self {
        GermData {
            a0: Vec::new(),
            a1: Vec::new(),
            validity_threshold: 1,
        }
    }

    pub fn entries(&self, side: GermSide) -> &[GermEntry<S>] {
        match side {
            GermSide::B => &self.a0,
            GermSide::C => &self.a1,
        }
    }

    pub fn lookup(&self, side: GermSide, la: Level, ld: Level, parity: u8) -> LaurentPoly<S> {
        self.entries(side)
            .iter()
            .filter(|e| e.key.matches(la, ld, parity))
            .fold(LaurentPoly::zero(), |acc, e| &acc + &e.poly)
    }

    pub fn is_zero(&self) -> bool {
        self.a0.iter().chain(&self.a1).all(|e| e.poly.is_zero())
    }

    /// Both sides evaluated at `s = 0`; zero exactly when `A0(0) = A1(0) = 0`
    /// on every class.
    pub fn vanishes_at_s0(&self) -> bool {
        self.a0
            .iter()
            .chain(&self.a1)
            .all(|e| e.poly.eval_at_s0().is_zero())
    }

    fn pieces(&self, other: Option<&Self>) -> (Vec<LevelInterval>, Vec<LevelInterval>) {
        let all: Vec<&GermEntry<S>> = self
            .a0
            .iter()
            .chain(&self.a1)
            .chain(other.into_iter().flat_map(|o| o.a0.iter().chain(&o.a1)))
            .collect();
        let la: Vec<_> = all.iter().map(|e| e.key.lvl_a).collect();
        let ld: Vec<_> = all.iter().map(|e| e.key.lvl_d).collect();
        (level_pieces(&la), level_pieces(&ld))
    }

    /// Equality as functions on base data, ignoring how keys are cut up.
    pub fn same_germ(&self, other: &Self) -> bool {
        let (pa, pd) = self.pieces(Some(other));
        for side in [GermSide::B, GermSide::C] {
            for a in &pa {
                for d in &pd {
                    for parity in [0, 1] {
                        let (la, ld) = (a.representative(), d.representative());
                        if self.lookup(side, la, ld, parity) != other.lookup(side, la, ld, parity) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `η_s(b) A0 + η_s(c)^{-1} A1` at `γ`.
    pub fn predict(&self, gamma: &OrbitData) -> LaurentPoly<S> {
        let a0 = self.lookup(GermSide::B, gamma.lvl_a, gamma.lvl_d, gamma.v_b.parity());
        let a1 = self.lookup(GermSide::C, gamma.lvl_a, gamma.lvl_d, gamma.v_c().parity());
        let eb = LaurentPoly::monomial(gamma.sgn_b.to_scalar(), gamma.v_b);
        let ec_inv = LaurentPoly::monomial(gamma.sgn_c().to_scalar(), -gamma.v_c());
        &(&eb * &a0) + &(&ec_inv * &a1)
    }

    /// Whether the expansion is asserted at `γ`.
    pub fn applies_to(&self, gamma: &OrbitData) -> bool {
        gamma.t >= self.validity_threshold
    }
}

/// `Σ_σ w(σ) σ [req admits σ]` over the unit classes of an entry of
/// valuation `v`; unramified signs are forced to `(-1)^v`.
fn sign_average<S: Scalar>(setup: &FieldSetup, v: HalfInt, req: SignReq) -> S {
    if setup.ramified {
        unit_integral(setup, req, true)
    } else {
        let s = Sign::from_parity(v.floor());
        if req.admits(s) {
            s.to_scalar()
        } else {
            S::zero()
        }
    }
}

fn b0_limit_point(la: Level, ld: Level) -> Point {
    Point {
        v_a: HalfInt::ZERO,
        lvl_a: la,
        lvl_d: ld,
        t: Level::Infinite,
        side: None,
        b: None,
        c: None,
    }
}

/// One side of the extraction: the boxes meeting the limit where the other
/// entry vanishes, summed over shells of the surviving entry.
fn extract_side<S: Scalar>(
    f: &InvariantFunction<S>,
    setup: &FieldSetup,
    side: GermSide,
    pa: &[LevelInterval],
    pd: &[LevelInterval],
) -> Result<Vec<GermEntry<S>>> {
    let window = |r: &Region| match side {
        GermSide::B => (r.b, r.c),
        GermSide::C => (r.c, r.b),
    };
    let live: Vec<&(S, Region)> = f
        .terms
        .iter()
        .filter(|(_, r)| {
            window(r).1.contains_zero_entry()
                && r.a.contains(HalfInt::ZERO)
                && r.d.contains(HalfInt::ZERO)
                && r.t.is_none_or(|t| t.hi.is_none())
                && r.side.is_none()
        })
        .collect();
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    for (_, r) in &live {
        let (iv, _) = window(r);
        match iv.lo {
            None => {
                return Err(Error::Divergent(format!(
                    "box {r:?} is unbounded below on the {side:?}-entry near B0"
                )))
            }
            Some(l) => lo = Some(lo.map_or(l.doubled(), |x| x.min(l.doubled()))),
        }
        for e in iv.finite_endpoints() {
            hi = Some(hi.map_or(e.doubled(), |x| x.max(e.doubled())));
        }
    }
    let mut out = Vec::new();
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Ok(out);
    };
    for a in pa {
        for d in pd {
            for &parity in parities(setup) {
                let mut poly = LaurentPoly::zero();
                for m2 in lo..=hi {
                    if m2.rem_euclid(2) as u8 != parity {
                        continue;
                    }
                    let m = HalfInt::from_doubled(m2);
                    let mut acc = S::zero();
                    for sigma in [Sign::Plus, Sign::Minus] {
                        let mut p = b0_limit_point(a.representative(), d.representative());
                        let entry = Some((m, sigma));
                        match side {
                            GermSide::B => p.b = entry,
                            GermSide::C => p.c = entry,
                        }
                        let val = f.eval(&p);
                        if val.is_zero() {
                            continue;
                        }
                        let w: S = sign_average(setup, m, SignReq::exactly(sigma));
                        acc = acc + w * val;
                    }
                    let exp = match side {
                        GermSide::B => -m,
                        GermSide::C => m,
                    };
                    poly.add_term(exp, acc);
                }
                if !poly.is_zero() {
                    out.push(GermEntry {
                        key: GermKey::new(*a, *d, parity),
                        poly,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `t` from which every box of `f` sees an orbit only through its `B0`
/// limits: past all finite `t` bounds and past twice every finite valuation
/// endpoint.
pub fn validity_threshold<S: Scalar>(f: &InvariantFunction<S>) -> u32 {
    let mut m2: i64 = 0;
    let mut t_hi: u32 = 0;
    for (_, r) in &f.terms {
        for iv in [&r.b, &r.c] {
            for e in iv.finite_endpoints() {
                m2 = m2.max(e.doubled().abs());
            }
        }
        if let Some(h) = r.t.and_then(|t| t.hi) {
            t_hi = t_hi.max(h + 1);
        }
    }
    1u32.max(m2 as u32 + 1).max(t_hi)
}

/// `A0`, `A1` of `f`; `f` must vanish on `B0`.
pub fn germ_extract<S: Scalar>(
    f: &InvariantFunction<S>,
    setup: &FieldSetup,
) -> Result<GermData<S>> {
    f.validate()?;
    if !f.vanishes_on_b0() {
        return Err(Error::NotVanishingOnB0);
    }
    let pa = f.level_pieces_a();
    let pd = f.level_pieces_d();
    Ok(GermData {
        a0: extract_side(f, setup, GermSide::B, &pa, &pd)?,
        a1: extract_side(f, setup, GermSide::C, &pa, &pd)?,
        validity_threshold: validity_threshold(f),
    })
}

/// A box function whose germ is `g`, built from shells on which `η_s` of
/// the relevant entry is constant.
pub fn germ_reconstruct<S: Scalar>(
    g: &GermData<S>,
    setup: &FieldSetup,
) -> Result<InvariantFunction<S>> {
    let mut f = InvariantFunction::zero();
    for side in [GermSide::B, GermSide::C] {
        for e in g.entries(side) {
            if e.key.parity > 1 || (!setup.ramified && e.key.parity != 0) {
                return Err(Error::InvalidGerm(format!("bad parity in key {}", e.key)));
            }
            for (exp, c) in e.poly.terms() {
                if exp.parity() != e.key.parity {
                    return Err(Error::InvalidGerm(format!(
                        "exponent {exp} does not match the parity of key {}",
                        e.key
                    )));
                }
                let m = match side {
                    GermSide::B => -exp,
                    GermSide::C => exp,
                };
                let shell = ValInterval::new(Some(m), Some(m));
                let (req, coeff) = if setup.ramified {
                    (SignReq::Plus, c.clone() * S::from_int(2))
                } else {
                    (
                        SignReq::Any,
                        Sign::from_parity(m.floor()).to_scalar::<S>() * c.clone(),
                    )
                };
                let mut r = Region::unit_diagonal(e.key.lvl_a, e.key.lvl_d);
                match side {
                    GermSide::B => {
                        r.b = shell;
                        r.sgn_b = req;
                    }
                    GermSide::C => {
                        r.c = shell;
                        r.sgn_c = req;
                    }
                }
                f.push(coeff, r);
            }
        }
    }
    Ok(f)
}

/// `∂Orb` near `B0` in terms of one germ class: `η(x) (v(x)·slope + constant)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct GermDerivative<S> {
    pub key: GermKey,
    /// `C(0)`.
    #[serde(serialize_with = "crate::scalar::ser_display")]
    pub value: S,
    pub slope: LogValue<S>,
    pub constant: LogValue<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct GermDerivativeForm<S> {
    pub b_side: Vec<GermDerivative<S>>,
    pub c_side: Vec<GermDerivative<S>>,
}

impl<S: Scalar> GermDerivativeForm<S> {
    fn find(
        list: &[GermDerivative<S>],
        la: Level,
        ld: Level,
        parity: u8,
    ) -> (LogValue<S>, LogValue<S>) {
        list.iter()
            .filter(|d| d.key.matches(la, ld, parity))
            .fold((LogValue::zero(), LogValue::zero()), |(s, c), d| {
                (s + d.slope.clone(), c + d.constant.clone())
            })
    }

    /// `η(b)(v(b) slope_b + const_b) + η(c)(v(c) slope_c + const_c)`.
    pub fn predict_d_orb(&self, gamma: &OrbitData) -> LogValue<S> {
        let (sb, cb) = Self::find(&self.b_side, gamma.lvl_a, gamma.lvl_d, gamma.v_b.parity());
        let (sc, cc) = Self::find(&self.c_side, gamma.lvl_a, gamma.lvl_d, gamma.v_c().parity());
        let vb: S = gamma.v_b.to_scalar();
        let vc: S = gamma.v_c().to_scalar();
        let b = (sb.scale(&vb) + cb).scale(&gamma.sgn_b.to_scalar());
        let c = (sc.scale(&vc) + cc).scale(&gamma.sgn_c().to_scalar());
        b + c
    }
}

/// Differentiate the expansion at `s = 0`: `η_s(b) = η(b) T^{v(b)}` gives
/// slope `-C0(0) log q` on the `b` side and `+C1(0) log q` on the `c` side.
pub fn germ_derivative_form<S: Scalar>(g: &GermData<S>) -> GermDerivativeForm<S> {
    let conv = |e: &GermEntry<S>, sign: S| {
        let value = e.poly.eval_at_s0();
        GermDerivative {
            key: e.key,
            slope: LogValue::log_q(value.clone() * sign),
            constant: e.poly.d_ds_at_s0(),
            value,
        }
    };
    GermDerivativeForm {
        b_side: g.a0.iter().map(|e| conv(e, -S::one())).collect(),
        c_side: g.a1.iter().map(|e| conv(e, S::one())).collect(),
    }
}

/// A constant germ value on a parity class, as a Laurent polynomial with
/// that parity: `c` on integral classes, `c T^{∓1/2}` on half-integral ones.
fn constant_on_class<S: Scalar>(c: S, side: GermSide, parity: u8) -> LaurentPoly<S> {
    let e = match (parity, side) {
        (0, _) => HalfInt::ZERO,
        (_, GermSide::B) => HalfInt::from_doubled(-1),
        (_, GermSide::C) => HalfInt::from_doubled(1),
    };
    LaurentPoly::monomial(c, e)
}

/// Values on level classes `(lvl_a, lvl_d) → value`.
pub type LevelValues<S> = [(LevelInterval, LevelInterval, S)];

fn level_lookup<S: Scalar>(vals: &LevelValues<S>, la: Level, ld: Level) -> S {
    vals.iter()
        .filter(|(a, d, _)| a.contains(la) && d.contains(ld))
        .fold(S::zero(), |acc, (_, _, v)| acc + v.clone())
}

/// Solve `η(1-N(a)) η(b0/b̄0) A0 + A1 = C0` (norm side) / `= C1` (other
/// side) by `A0 = η(b̄0/b0)(C0 - C1)/2`, `A1 = (C0 + C1)/2`.
pub fn transfer_germ_solve<S: Scalar>(
    setup: &FieldSetup,
    c0: &LevelValues<S>,
    c1: &LevelValues<S>,
    side_sign_b0: Sign,
) -> GermData<S> {
    let la: Vec<_> = c0.iter().chain(c1).map(|x| x.0).collect();
    let ld: Vec<_> = c0.iter().chain(c1).map(|x| x.1).collect();
    let half = S::from_ratio(1, 2);
    let mut g = GermData::zero();
    for a in level_pieces(&la) {
        for d in level_pieces(&ld) {
            let x0 = level_lookup(c0, a.representative(), d.representative());
            let x1 = level_lookup(c1, a.representative(), d.representative());
            let v0 = (x0.clone() - x1.clone()) * half.clone() * side_sign_b0.to_scalar();
            let v1 = (x0 + x1) * half.clone();
            for &parity in parities(setup) {
                let key = GermKey::new(a, d, parity);
                if !v0.is_zero() {
                    g.a0.push(GermEntry {
                        key,
                        poly: constant_on_class(v0.clone(), GermSide::B, parity),
                    });
                }
                if !v1.is_zero() {
                    g.a1.push(GermEntry {
                        key,
                        poly: constant_on_class(v1.clone(), GermSide::C, parity),
                    });
                }
            }
        }
    }
    g
}

/// The value the solved system produces on one side:
/// `η(1-N(a)) s A0(0) + A1(0)`.
pub fn transfer_system_value<S: Scalar>(
    g: &GermData<S>,
    side: Side,
    side_sign_b0: Sign,
    la: Level,
    ld: Level,
    parity: u8,
) -> S {
    let sgn = match side {
        Side::U0 => Sign::Plus,
        Side::U1 => Sign::Minus,
    };
    let a0 = g.lookup(GermSide::B, la, ld, parity).eval_at_s0();
    let a1 = g.lookup(GermSide::C, la, ld, parity).eval_at_s0();
    (sgn * side_sign_b0).to_scalar::<S>() * a0 + a1
}

/// For `f` with `Orb_γ(f) = 0` on `grid`, whether its germ vanishes at
/// `s = 0` (after removing any `B0` value).
pub fn vanishing_orb_check<S: Scalar>(f: &InvariantFunction<S>, grid: &OrbitGrid) -> Result<bool> {
    for gamma in grid.orbits()? {
        if !orb(&gamma, f)?.is_zero() {
            return Err(Error::Precondition(format!(
                "Orb does not vanish at {gamma}"
            )));
        }
    }
    let setup = grid.setup;
    let f = if f.vanishes_on_b0() {
        f.clone()
    } else {
        regularize_off_b0(f, &RegularizeParams::default_for(&setup))?
    };
    Ok(germ_extract(&f, &setup)?.vanishes_at_s0())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::orb_s;
    use crate::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn shell_b0() -> InvariantFunction<Rational> {
        let mut reg = Region::unit_diagonal(LevelInterval::ALL, LevelInterval::ALL);
        reg.b = ValInterval::point(0);
        InvariantFunction::indicator(reg)
    }

    #[test]
    fn single_shell_extracts_unit_a0() {
        let setup = FieldSetup::unramified(3).unwrap();
        let g = germ_extract(&shell_b0(), &setup).unwrap();
        assert_eq!(g.a0.len(), 1);
        assert_eq!(g.a0[0].poly, LaurentPoly::one());
        assert!(g.a1.is_empty());
    }

    #[test]
    fn zero_and_nonvanishing() {
        let setup = FieldSetup::unramified(3).unwrap();
        assert!(germ_extract(&InvariantFunction::<Rational>::zero(), &setup)
            .unwrap()
            .is_zero());
        assert_eq!(
            germ_extract(&InvariantFunction::<Rational>::unit_k(), &setup).unwrap_err(),
            Error::NotVanishingOnB0
        );
    }

    #[test]
    fn expansion_holds_past_threshold() {
        for setup in [
            FieldSetup::unramified(3).unwrap(),
            FieldSetup::ramified(3).unwrap(),
        ] {
            let f = shell_b0();
            let g = germ_extract(&f, &setup).unwrap();
            let grid = OrbitGrid::new(setup, 8, 3);
            for gamma in grid.orbits().unwrap() {
                if g.applies_to(&gamma) {
                    assert_eq!(orb_s(&gamma, &f).unwrap(), g.predict(&gamma), "{gamma}");
                }
            }
        }
    }

    #[test]
    fn solver_examples() {
        let setup = FieldSetup::unramified(3).unwrap();
        let all = (LevelInterval::ALL, LevelInterval::ALL);
        let g = transfer_germ_solve(
            &setup,
            &[(all.0, all.1, r(1))],
            &[(all.0, all.1, r(1))],
            Sign::Plus,
        );
        assert!(g.a0.is_empty());
        assert_eq!(g.a1[0].poly, LaurentPoly::one());
        let g = transfer_germ_solve(&setup, &[(all.0, all.1, r(1))], &[], Sign::Plus);
        assert_eq!(g.a0[0].poly, LaurentPoly::constant(Rational::new(1, 2)));
        assert_eq!(g.a1[0].poly, LaurentPoly::constant(Rational::new(1, 2)));
    }

    #[test]
    fn derivative_form_signs() {
        let key = GermKey::new(LevelInterval::ALL, LevelInterval::ALL, 0);
        let g = GermData {
            a0: vec![GermEntry {
                key,
                poly: LaurentPoly::one(),
            }],
            a1: vec![],
            validity_threshold: 1,
        };
        let d = germ_derivative_form(&g);
        assert_eq!(d.b_side[0].slope, LogValue::log_q(r(-1)));
        assert!(d.b_side[0].constant.is_zero());
        let g = GermData {
            a0: vec![],
            a1: vec![GermEntry {
                key,
                poly: LaurentPoly::one(),
            }],
            validity_threshold: 1,
        };
        assert_eq!(
            germ_derivative_form(&g).c_side[0].slope,
            LogValue::log_q(r(1))
        );
    }
}

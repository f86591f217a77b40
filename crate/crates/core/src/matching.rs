//! Matching orbits of `S(F)` with the unitary side, intersection numbers
//! `Int(g)`, and the AFL / ATI verifiers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::deformation::{
    class_height_attainable, lift_bound_closed, ramification_index, reduction_commutes, DeformQuery,
};
use crate::error::{Error, Result};
use crate::field::{FieldSetup, HalfInt, Sign};
use crate::germ::{
    germ_extract, germ_reconstruct, transfer_germ_solve, GermData, GermEntry, GermKey,
};
use crate::orbital::{
    d_orb, orb, orb_s, transfer_factor, InvariantFunction, Level, LevelInterval, OrbitData, Side,
};
use crate::scalar::{scalar_from_u128, ser_display, Scalar};
use crate::symbolic::{LaurentPoly, LogValue};

/// A deformation length, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Length {
    Finite(u128),
    Infinite,
}

impl Length {
    pub fn finite(self) -> Option<u128> {
        match self {
            Length::Finite(n) => Some(n),
            Length::Infinite => None,
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(n) => write!(f, "{n}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Length::Finite(n) => s.serialize_u128(*n),
            Length::Infinite => s.serialize_none(),
        }
    }
}

/// Levels `(i, j)` of the lattice `O_i ⊕ O_j` and the ramification `e_F` of
/// the deformation base over `O_F̆`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MatchContext {
    pub setup: FieldSetup,
    pub i: u32,
    pub j: u32,
    pub e_f: u64,
}

impl MatchContext {
    pub fn new(setup: FieldSetup, i: u32, j: u32, e_f: u64) -> Result<MatchContext> {
        let ctx = MatchContext { setup, i, j, e_f };
        for k in [i, j] {
            let ek = ramification_index(&setup, k)?;
            if e_f == 0 || !(e_f as u128).is_multiple_of(ek) {
                return Err(Error::InvalidContext(format!(
                    "e_F = {e_f} is not a positive multiple of the ramification index {ek} of W_{k}"
                )));
            }
        }
        Ok(ctx)
    }

    /// `e_F = e_rel · ê_max{i,j}`.
    pub fn from_e_rel(setup: FieldSetup, i: u32, j: u32, e_rel: u64) -> Result<MatchContext> {
        let e_max = ramification_index(&setup, i.max(j))?;
        let e_f = u64::try_from(e_max * e_rel as u128).map_err(|_| Error::Overflow("e_F"))?;
        MatchContext::new(setup, i, j, e_f)
    }

    /// `e_F / ê_max{i', j'}`.
    pub fn e_rel(&self, i: u32, j: u32) -> Result<u64> {
        let e = ramification_index(&self.setup, i.max(j))?;
        Ok((self.e_f as u128 / e) as u64)
    }

    /// Ramified, or `i + j` even.
    pub fn first_case(&self) -> bool {
        reduction_commutes(&self.setup, self.i, self.j)
    }

    /// The unitary group `G` is isomorphic to.
    pub fn g_side(&self) -> Side {
        if self.first_case() {
            Side::U1
        } else {
            Side::U0
        }
    }
}

/// `U0` iff `1 - N(a)` is a norm.
pub fn match_side(gamma: &OrbitData) -> Side {
    gamma.side()
}

pub fn in_sf_g(gamma: &OrbitData, ctx: &MatchContext) -> bool {
    gamma.setup == ctx.setup && match_side(gamma) == ctx.g_side()
}

/// Class heights of the entries of the matching `g`. `None` is `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GInvariants {
    pub off_diag_height: u32,
    pub diag_height_1: Option<u32>,
    pub diag_height_4: Option<u32>,
}

/// Caller-supplied finite diagonal heights, used in place of the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiagOverrides {
    pub h1: Option<u32>,
    pub h4: Option<u32>,
}

/// Class height of a unit of level `lvl < level` in `End(X_level)`:
/// `2 lvl` unramified, `2 lvl + 1` ramified.
pub fn default_diag_height(setup: &FieldSetup, lvl: u32) -> u32 {
    if setup.ramified {
        2 * lvl + 1
    } else {
        2 * lvl
    }
}

fn diag_height(setup: &FieldSetup, lvl: Level, level: u32, over: Option<u32>) -> Option<u32> {
    match lvl {
        l if l.at_least(level) => None,
        Level::Finite(n) => Some(over.unwrap_or_else(|| default_diag_height(setup, n))),
        Level::Infinite => None,
    }
}

pub fn g_invariants(
    gamma: &OrbitData,
    ctx: &MatchContext,
    overrides: DiagOverrides,
) -> Result<GInvariants> {
    if !in_sf_g(gamma, ctx) {
        return Err(Error::Precondition(format!(
            "{gamma} does not match into G (side {})",
            ctx.g_side()
        )));
    }
    if gamma.v_a != HalfInt::ZERO {
        return Err(Error::Precondition(
            "the matching g needs unit diagonal entries".into(),
        ));
    }
    Ok(GInvariants {
        off_diag_height: gamma.t,
        diag_height_1: diag_height(&ctx.setup, gamma.lvl_a, ctx.i, overrides.h1),
        diag_height_4: diag_height(&ctx.setup, gamma.lvl_d, ctx.j, overrides.h4),
    })
}

fn entry_bound(ctx: &MatchContext, i: u32, j: u32, h: Option<u32>) -> Result<Length> {
    let Some(l) = h else {
        return Ok(Length::Infinite);
    };
    if !class_height_attainable(&ctx.setup, i, j, l) {
        return Err(Error::HeightNotAttainable { i, j, l });
    }
    let dq = DeformQuery::new(ctx.setup, i, j, ctx.e_rel(i, j)?, l)?;
    Ok(Length::Finite(lift_bound_closed(&dq)?))
}

/// `Int(g)`: the smallest lift bound over the four entries.
pub fn int_g(gi: &GInvariants, ctx: &MatchContext) -> Result<Length> {
    let off = entry_bound(ctx, ctx.i, ctx.j, Some(gi.off_diag_height))?;
    let d1 = entry_bound(ctx, ctx.i, ctx.i, gi.diag_height_1)?;
    let d4 = entry_bound(ctx, ctx.j, ctx.j, gi.diag_height_4)?;
    Ok(off.min(d1).min(d4))
}

fn length_log<S: Scalar>(n: u128) -> LogValue<S> {
    LogValue::log_q(scalar_from_u128(n))
}

/// One AFL evaluation. Odd `t`: `ω ∂Orb(1_K) = Int(g) log q`. Even `t`: the
/// transfer statement `ω Orb(1_K) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct AflRow<S> {
    pub q: u64,
    pub t: u32,
    pub v_b: i64,
    pub kind: &'static str,
    pub omega: Sign,
    pub orb_s: LaurentPoly<S>,
    #[serde(serialize_with = "ser_display")]
    pub orb: S,
    pub d_orb: LogValue<S>,
    /// `ω ∂Orb` (odd `t`) or `ω Orb` as a log-free value (even `t`).
    pub lhs: LogValue<S>,
    pub rhs: LogValue<S>,
    pub int_g: Option<Length>,
    pub pass: bool,
}

pub fn afl_verify<S: Scalar>(q: u64, t: u32, v_b: i64) -> Result<AflRow<S>> {
    let gamma = OrbitData::unramified(q, t, v_b)?;
    let f = InvariantFunction::<S>::unit_k();
    let poly = orb_s(&gamma, &f)?;
    let value = poly.eval_at_s0();
    let deriv = poly.d_ds_at_s0();
    let omega = transfer_factor(&gamma);
    let w: S = omega.to_scalar();
    let (kind, lhs, rhs, int, pass) = if t % 2 == 1 {
        let ctx = MatchContext::new(gamma.setup, 0, 0, 1)?;
        let gi = g_invariants(&gamma, &ctx, DiagOverrides::default())?;
        let int = int_g(&gi, &ctx)?;
        let n = int
            .finite()
            .ok_or_else(|| Error::Precondition("Int(g) is infinite".into()))?;
        let lhs = deriv.scale(&w);
        let rhs = length_log(n);
        let closed = LogValue::log_q(S::from_ratio(1 + t as i64, 2));
        let pass = lhs == rhs && rhs == closed && value.is_zero();
        ("identity", lhs, rhs, Some(int), pass)
    } else {
        let lhs = LogValue::new(value.clone() * w, S::zero());
        let rhs = LogValue::new(S::one(), S::zero());
        let pass = lhs == rhs;
        ("transfer", lhs, rhs, None, pass)
    };
    Ok(AflRow {
        q,
        t,
        v_b,
        kind,
        omega,
        orb_s: poly,
        orb: value,
        d_orb: deriv,
        lhs,
        rhs,
        int_g: int,
        pass,
    })
}

/// An orbit with unit diagonal in `S(F)_G` at height `t`, when one exists.
fn g_orbit(
    ctx: &MatchContext,
    t: u32,
    v_b: HalfInt,
    sgn_b: Sign,
    lvl_a: Level,
    lvl_d: Level,
) -> Option<OrbitData> {
    let s1 = match ctx.g_side() {
        Side::U0 => Sign::Plus,
        Side::U1 => Sign::Minus,
    };
    let sgn_b = if ctx.setup.ramified {
        sgn_b
    } else {
        Sign::from_parity(v_b.floor())
    };
    OrbitData::new(ctx.setup, HalfInt::ZERO, lvl_a, lvl_d, t, s1, v_b, sgn_b).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrowthPoint {
    pub t: u32,
    pub int_g: Length,
}

/// `Int(g(t))` along a family of orbits in `S(F)_G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub ctx: MatchContext,
    pub lvl_a: Level,
    pub lvl_d: Level,
    pub regime: &'static str,
    pub points: Vec<GrowthPoint>,
    /// Unbounded regime: `t mod 2 → 2 Int - e_F t` for `t >= i + j`.
    pub residuals: BTreeMap<u32, Vec<i128>>,
    /// Bounded regime: the saturated value and where it is reached.
    pub saturation: Option<(u32, Length)>,
    pub pass: bool,
}

/// Growth of `Int(g)` in `t = v(1 - N(a))` for diagonal levels
/// `(lvl_a, lvl_d)`: linear with slope `e_F / 2` when both diagonal entries
/// deform without bound, eventually constant otherwise.
pub fn ati_growth_check(
    ctx: &MatchContext,
    t_max: u32,
    lvl_a: Level,
    lvl_d: Level,
    overrides: DiagOverrides,
) -> Result<GrowthReport> {
    let mut points = Vec::new();
    for t in 0..=t_max {
        let Some(gamma) = g_orbit(ctx, t, HalfInt::ZERO, Sign::Plus, lvl_a, lvl_d) else {
            continue;
        };
        let gi = g_invariants(&gamma, ctx, overrides)?;
        points.push(GrowthPoint {
            t,
            int_g: int_g(&gi, ctx)?,
        });
    }
    let unbounded = lvl_a.at_least(ctx.i) && lvl_d.at_least(ctx.j);
    let mut residuals: BTreeMap<u32, Vec<i128>> = BTreeMap::new();
    let mut saturation = None;
    let pass = if unbounded {
        for p in points.iter().filter(|p| p.t >= ctx.i + ctx.j) {
            let n = p.int_g.finite().ok_or(Error::Overflow("Int(g)"))? as i128;
            let r = 2 * n - ctx.e_f as i128 * p.t as i128;
            let v = residuals.entry(p.t % 2).or_default();
            if !v.contains(&r) {
                v.push(r);
            }
        }
        !residuals.is_empty() && residuals.values().all(|v| v.len() == 1)
    } else {
        let h1 = diag_height(&ctx.setup, lvl_a, ctx.i, overrides.h1);
        let h4 = diag_height(&ctx.setup, lvl_d, ctx.j, overrides.h4);
        let cap = entry_bound(ctx, ctx.i, ctx.i, h1)?.min(entry_bound(ctx, ctx.j, ctx.j, h4)?);
        let last = points.last().map(|p| p.int_g);
        let start = points
            .iter()
            .rposition(|p| Some(p.int_g) != last)
            .map_or(0, |k| k + 1);
        if let (Some(last), Some(p)) = (last, points.get(start)) {
            saturation = Some((p.t, last));
        }
        last == Some(cap) && start + 1 < points.len()
    };
    Ok(GrowthReport {
        ctx: *ctx,
        lvl_a,
        lvl_d,
        regime: if unbounded { "unbounded" } else { "bounded" },
        points,
        residuals,
        saturation,
        pass,
    })
}

/// Grouping of orbits for the constancy checks: level pieces and the class
/// of `v(b)` mod `ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ClassKey {
    pub lvl_a: LevelInterval,
    pub lvl_d: LevelInterval,
    pub parity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct ClassResidual<S> {
    pub class: ClassKey,
    pub in_beta: bool,
    pub samples: usize,
    /// Distinct values of `ω ∂Orb(f) - Int(g) log q`.
    pub values: Vec<LogValue<S>>,
    /// Distinct values of `ω ∂Orb(f) - (e_F/2) t β log q`.
    pub lhs_residuals: Vec<LogValue<S>>,
    /// Distinct values of `(Int(g) - (e_F/2) t β) log q`.
    pub int_residuals: Vec<LogValue<S>>,
    pub constant: bool,
}

/// Orbits and classes an ATI run samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtiWindow {
    pub t_lo: u32,
    pub t_hi: u32,
    pub v_b_abs: i64,
}

fn level_samples(level: u32) -> Vec<(LevelInterval, Vec<Level>)> {
    let mut out: Vec<_> = (0..level)
        .map(|k| (LevelInterval::point(k), vec![Level::Finite(k)]))
        .collect();
    out.push((
        LevelInterval::from(level),
        vec![
            Level::Finite(level),
            Level::Finite(level + 1),
            Level::Infinite,
        ],
    ));
    out
}

fn window_orbits(ctx: &MatchContext, w: &AtiWindow) -> Vec<(ClassKey, OrbitData)> {
    let step = if ctx.setup.ramified { 1 } else { 2 };
    let signs: &[Sign] = if ctx.setup.ramified {
        &[Sign::Plus, Sign::Minus]
    } else {
        &[Sign::Plus]
    };
    let mut out = Vec::new();
    for (pa, las) in level_samples(ctx.i) {
        for (pd, lds) in level_samples(ctx.j) {
            for la in &las {
                for ld in &lds {
                    for t in w.t_lo..=w.t_hi {
                        for vb2 in (-2 * w.v_b_abs..=2 * w.v_b_abs).step_by(step) {
                            for &sb in signs {
                                let v_b = HalfInt::from_doubled(vb2);
                                if let Some(g) = g_orbit(ctx, t, v_b, sb, *la, *ld) {
                                    let key = ClassKey {
                                        lvl_a: pa,
                                        lvl_d: pd,
                                        parity: v_b.parity(),
                                    };
                                    out.push((key, g));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn push_distinct<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// `o(γ) = ω ∂Orb_γ(f) - Int(g) log q` over a window of `S(F)_G`, grouped
/// by class. Constancy of `o` per class is what the ATI identity needs.
pub fn ati_residuals<S: Scalar>(
    ctx: &MatchContext,
    f: &InvariantFunction<S>,
    w: &AtiWindow,
) -> Result<Vec<ClassResidual<S>>> {
    let half_e = S::from_ratio(ctx.e_f as i64, 2);
    let mut classes: BTreeMap<ClassKey, ClassResidual<S>> = BTreeMap::new();
    for (key, gamma) in window_orbits(ctx, w) {
        let in_beta = gamma.lvl_a.at_least(ctx.i) && gamma.lvl_d.at_least(ctx.j);
        let omega: S = transfer_factor(&gamma).to_scalar();
        let lhs = d_orb(&gamma, f)?.scale(&omega);
        let gi = g_invariants(&gamma, ctx, DiagOverrides::default())?;
        let n = int_g(&gi, ctx)?
            .finite()
            .ok_or_else(|| Error::Precondition("Int(g) is infinite".into()))?;
        let int = length_log::<S>(n);
        let lead = if in_beta {
            LogValue::log_q(half_e.clone() * S::from_int(gamma.t as i64))
        } else {
            LogValue::zero()
        };
        let entry = classes.entry(key).or_insert_with(|| ClassResidual {
            class: key,
            in_beta,
            samples: 0,
            values: Vec::new(),
            lhs_residuals: Vec::new(),
            int_residuals: Vec::new(),
            constant: false,
        });
        entry.samples += 1;
        push_distinct(&mut entry.values, lhs.clone() - int.clone());
        push_distinct(&mut entry.lhs_residuals, lhs - lead.clone());
        push_distinct(&mut entry.int_residuals, int - lead);
    }
    Ok(classes
        .into_values()
        .map(|mut c| {
            c.constant =
                c.values.len() == 1 && c.lhs_residuals.len() == 1 && c.int_residuals.len() == 1;
            c
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct AtiReport<S> {
    pub ctx: MatchContext,
    pub first_case: bool,
    /// Germ of the transfer `(C0, C1) = (e_F β, 0)` or `(0, e_F β)`.
    pub germ: GermData<S>,
    pub germ_round_trip: bool,
    pub transfer_ok: bool,
    pub window: AtiWindow,
    pub classes: Vec<ClassResidual<S>>,
    /// `A1` values of the correction term, in units of `log q`.
    pub f_corr: GermData<S>,
    pub identity_ok: bool,
    pub pass: bool,
}

/// Smallest `t >= from` in `S(F)_G` at which the off-diagonal lift bound
/// reaches every sampled finite diagonal bound.
fn saturation_start(ctx: &MatchContext, from: u32) -> Result<u32> {
    let mut cap: Option<u128> = None;
    for (lvl, level) in (0..ctx.i)
        .map(|k| (k, ctx.i))
        .chain((0..ctx.j).map(|k| (k, ctx.j)))
    {
        let h = default_diag_height(&ctx.setup, lvl);
        if let Length::Finite(b) = entry_bound(ctx, level, level, Some(h))? {
            cap = Some(cap.map_or(b, |c| c.max(b)));
        }
    }
    let Some(cap) = cap else {
        return Ok(from);
    };
    for t in from..from + 10_000 {
        if g_orbit(
            ctx,
            t,
            HalfInt::ZERO,
            Sign::Plus,
            Level::Infinite,
            Level::Infinite,
        )
        .is_none()
        {
            continue;
        }
        if entry_bound(ctx, ctx.i, ctx.j, Some(t))? >= Length::Finite(cap) {
            return Ok(t);
        }
    }
    Err(Error::Precondition(
        "off-diagonal bound never saturates".into(),
    ))
}

/// Build the test function whose transfer is `e_F 1_{K_{i,j}}` on one side
/// and 0 on the other near `B0`, and check
/// `ω ∂Orb(f) = Int(g) log q + ω Orb(f_corr) log q` on a window of `S(F)_G`,
/// producing `f_corr` from the constants `o(γ)`.
pub fn ati_end_to_end<S: Scalar>(
    ctx: &MatchContext,
    t_span: u32,
    v_b_abs: i64,
) -> Result<AtiReport<S>> {
    let setup = ctx.setup;
    let e = S::from_int(ctx.e_f as i64);
    let beta = [(LevelInterval::from(ctx.i), LevelInterval::from(ctx.j), e)];
    let (c0, c1): (&[_], &[_]) = if ctx.first_case() {
        (&beta, &[])
    } else {
        (&[], &beta)
    };
    let germ = transfer_germ_solve(&setup, c0, c1, Sign::Plus);
    let f = germ_reconstruct(&germ, &setup)?;
    let extracted = germ_extract(&f, &setup)?;
    let germ_round_trip = extracted.same_germ(&germ);
    let mut germ = germ;
    germ.validity_threshold = extracted.validity_threshold;

    let t_lo = saturation_start(ctx, extracted.validity_threshold.max(ctx.i + ctx.j))?;
    let window = AtiWindow {
        t_lo,
        t_hi: t_lo + t_span,
        v_b_abs,
    };

    // transfer near B0: ω Orb(f) = C on the matching side
    let mut transfer_ok = true;
    for (_, gamma) in window_orbits(ctx, &window) {
        for side_sign in [Sign::Plus, Sign::Minus] {
            let mut g = gamma;
            g.sgn_1mna = side_sign;
            if g.validate().is_err() {
                continue;
            }
            let in_beta = g.lvl_a.at_least(ctx.i) && g.lvl_d.at_least(ctx.j);
            let want = match (in_beta, g.side(), ctx.first_case()) {
                (false, _, _) => S::zero(),
                (true, Side::U0, true) | (true, Side::U1, false) => S::from_int(ctx.e_f as i64),
                _ => S::zero(),
            };
            let got = orb(&g, &f)? * transfer_factor(&g).to_scalar::<S>();
            transfer_ok &= got == want;
        }
    }

    let classes = ati_residuals(ctx, &f, &window)?;
    let mut f_corr = GermData::zero();
    let mut witness_ok = true;
    for c in &classes {
        witness_ok &= c.constant;
        let Some(o) = c.values.first() else { continue };
        witness_ok &= o.rational_part.is_zero();
        if o.log_q_part.is_zero() {
            continue;
        }
        let exp = HalfInt::from_doubled(c.class.parity as i64);
        f_corr.a1.push(GermEntry {
            key: GermKey::new(c.class.lvl_a, c.class.lvl_d, c.class.parity),
            poly: LaurentPoly::monomial(o.log_q_part.clone(), exp),
        });
    }

    let mut identity_ok = witness_ok;
    if witness_ok {
        let corr = germ_reconstruct(&f_corr, &setup)?;
        f_corr.validity_threshold = germ_extract(&corr, &setup)?.validity_threshold;
        for (_, gamma) in window_orbits(ctx, &window) {
            if !f_corr.applies_to(&gamma) {
                identity_ok = false;
                break;
            }
            let omega: S = transfer_factor(&gamma).to_scalar();
            let lhs = d_orb(&gamma, &f)?.scale(&omega);
            let gi = g_invariants(&gamma, ctx, DiagOverrides::default())?;
            let n = int_g(&gi, ctx)?.finite().ok_or(Error::Overflow("Int(g)"))?;
            let rhs = length_log::<S>(n) + LogValue::log_q(orb(&gamma, &corr)? * omega);
            identity_ok &= lhs == rhs;
        }
    }
    let pass = germ_round_trip && transfer_ok && witness_ok && identity_ok;
    Ok(AtiReport {
        ctx: *ctx,
        first_case: ctx.first_case(),
        germ,
        germ_round_trip,
        transfer_ok,
        window,
        classes,
        f_corr,
        identity_ok,
        pass,
    })
}

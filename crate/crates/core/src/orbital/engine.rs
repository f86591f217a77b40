//! Symbolic orbital integrals.
//!
//! `Orb_γ(f, s) = ∫_{F^×} f(h^{-1} γ h) η(h) |h|^s dh`. Conjugating by
//! `diag(h, 1)` with `v(h) = n` moves `v(b)` to `v(b) - n` and `v(c)` to
//! `v(c) + n`, and multiplies both η-signs by `η(h) = η(π_F)^n η(u)`. So each
//! box contributes `T^n η(π_F)^n ∫_{O_F^×} η(u) [box accepts] du` for every `n`
//! in a window.

use super::function::{InvariantFunction, LevelInterval, Region};
use super::orbit::{Level, OrbitData};
use crate::error::{Error, Result};
use crate::field::{unit_integral, FieldSetup, HalfInt, Sign, SignReq, ValClass};
use crate::scalar::Scalar;
use crate::symbolic::{LaurentPoly, LogValue};

/// Intersection of two sign requirements, `None` if empty.
fn meet(x: SignReq, y: SignReq) -> Option<SignReq> {
    match (x, y) {
        (SignReq::Any, r) | (r, SignReq::Any) => Some(r),
        (a, b) if a == b => Some(a),
        _ => None,
    }
}

/// Range of `n` with `v_b - n ∈ I_b` and `v_c + n ∈ I_c`; `None` ends are
/// unbounded.
fn n_window(region: &Region, v_b: HalfInt, v_c: HalfInt) -> (Option<i64>, Option<i64>) {
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    let mut raise = |x: i64| lo = Some(lo.map_or(x, |l| l.max(x)));
    if let Some(h) = region.b.hi {
        raise((v_b - h).ceil());
    }
    if let Some(l) = region.c.lo {
        raise((l - v_c).ceil());
    }
    let mut lower = |x: i64| hi = Some(hi.map_or(x, |h| h.min(x)));
    if let Some(l) = region.b.lo {
        lower((v_b - l).floor());
    }
    if let Some(h) = region.c.hi {
        lower((h - v_c).floor());
    }
    (lo, hi)
}

fn static_admits(region: &Region, gamma: &OrbitData) -> bool {
    region.a.contains(gamma.v_a)
        && region.d.contains(gamma.v_a)
        && region.lvl_a().contains(gamma.lvl_a)
        && region.lvl_d().contains(gamma.lvl_d)
        && region.t.is_none_or(|t| t.contains(Level::Finite(gamma.t)))
        && region.side.is_none_or(|s| s == gamma.side())
}

/// Contribution of one box to `Orb_γ(·, s)`.
pub fn region_orb_s<S: Scalar>(region: &Region, gamma: &OrbitData) -> Result<LaurentPoly<S>> {
    let setup = &gamma.setup;
    let mut out = LaurentPoly::zero();
    if !static_admits(region, gamma) {
        return Ok(out);
    }
    let (lo, hi) = n_window(region, gamma.v_b, gamma.v_c());
    let (lo, hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ => {
            return Err(Error::Divergent(format!(
                "box {region:?} meets the orbit of {gamma} for infinitely many n"
            )))
        }
    };
    for n in lo..=hi {
        let eta_n = setup.eta_pi_f.pow(n);
        // η(u) must land the conjugated signs in the required classes
        let on_b = region.sgn_b.twist(gamma.sgn_b * eta_n);
        let on_c = region.sgn_c.twist(gamma.sgn_c() * eta_n);
        let Some(req) = meet(on_b, on_c) else {
            continue;
        };
        let w: S = unit_integral(setup, req, true);
        if w.is_zero() {
            continue;
        }
        out.add_term(HalfInt::from_int(n), eta_n.to_scalar::<S>() * w);
    }
    Ok(out)
}

/// `Orb_γ(f, s)` as a Laurent polynomial in `T = q^{-s}`.
pub fn orb_s<S: Scalar>(gamma: &OrbitData, f: &InvariantFunction<S>) -> Result<LaurentPoly<S>> {
    gamma.validate()?;
    f.validate()?;
    let mut out = LaurentPoly::zero();
    for (c, r) in &f.terms {
        out += &region_orb_s::<S>(r, gamma)?.scale(c);
    }
    Ok(out)
}

/// `Orb_γ(f) = Orb_γ(f, 0)`.
pub fn orb<S: Scalar>(gamma: &OrbitData, f: &InvariantFunction<S>) -> Result<S> {
    Ok(orb_s(gamma, f)?.eval_at_s0())
}

/// `∂Orb_γ(f) = d/ds|_{s=0} Orb_γ(f, s)`.
pub fn d_orb<S: Scalar>(gamma: &OrbitData, f: &InvariantFunction<S>) -> Result<LogValue<S>> {
    Ok(orb_s(gamma, f)?.d_ds_at_s0())
}

/// `ω(γ) = η(c)`.
pub fn transfer_factor(gamma: &OrbitData) -> Sign {
    gamma.sgn_c()
}

fn check_f_unit(lambda: &ValClass, what: &str) -> Result<()> {
    if lambda.is_zero || !lambda.in_f() {
        return Err(Error::Domain(format!("{what} must lie in F^x")));
    }
    Ok(())
}

/// `η(λ) f - λ^* f`; its orbital integrals vanish identically at `s = 0`
/// and its derivative is `-η(λ) v(λ) Orb_γ(f) log q`.
pub fn pullback_combination<S: Scalar>(
    f: &InvariantFunction<S>,
    lambda: &ValClass,
) -> Result<InvariantFunction<S>> {
    check_f_unit(lambda, "lambda")?;
    if lambda.half_val == 0 {
        return Err(Error::Domain(
            "lambda must be a non-unit (v(lambda) != 0)".into(),
        ));
    }
    Ok(f.scale(&lambda.eta_sign.to_scalar())
        .sub(&f.pullback(lambda)?))
}

/// The two scaling elements used to remove a B0 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularizeParams {
    pub lambda0: ValClass,
    pub lambda1: ValClass,
}

impl RegularizeParams {
    /// `λ0 = λ1` of valuation 1 with `η = -1`.
    pub fn default_for(setup: &FieldSetup) -> RegularizeParams {
        let l = setup.f_element(1, Sign::Minus);
        RegularizeParams {
            lambda0: l,
            lambda1: l,
        }
    }

    fn validate(&self) -> Result<()> {
        for (l, name) in [(&self.lambda0, "lambda0"), (&self.lambda1, "lambda1")] {
            check_f_unit(l, name)?;
            if l.half_val <= 0 {
                return Err(Error::Precondition(format!("{name} needs v > 0")));
            }
            if l.eta_sign != Sign::Minus {
                return Err(Error::Precondition(format!("{name} needs eta = -1")));
            }
        }
        Ok(())
    }
}

/// `α(V) = ¼ (α' + λ1^* α')`, `α' = 1(V) + λ0^* 1(V)`.
pub fn alpha<S: Scalar>(
    lvl_a: LevelInterval,
    lvl_d: LevelInterval,
    params: &RegularizeParams,
) -> Result<InvariantFunction<S>> {
    let one_v = InvariantFunction::<S>::diagonal_units(lvl_a, lvl_d);
    let a1 = one_v.add(&one_v.pullback(&params.lambda0)?);
    let a = a1.add(&a1.pullback(&params.lambda1)?);
    Ok(a.scale(&S::from_ratio(1, 4)))
}

/// `f' = f - Σ r_V α(V)`, vanishing on B0 and with `Orb(f') = Orb(f)`
/// pointwise at `s = 0`.
pub fn regularize_off_b0<S: Scalar>(
    f: &InvariantFunction<S>,
    params: &RegularizeParams,
) -> Result<InvariantFunction<S>> {
    f.validate()?;
    params.validate()?;
    let mut out = f.clone();
    for (pa, pd, r) in f.b0_restriction() {
        out = out.sub(&alpha::<S>(pa, pd, params)?.scale(&r));
    }
    debug_assert!(out.vanishes_on_b0());
    Ok(out)
}

#![allow(dead_code)]

//! Shared test fixtures: a brute-force orbital integral and a battery of
//! box functions.

use ati_core::field::{FieldSetup, HalfInt, Sign, SignReq, ValClass};
use ati_core::germ::{germ_extract, GermData, GermEntry, GermKey};
use ati_core::orbital::{
    alpha, pullback_combination, regularize_off_b0, InvariantFunction, Level, LevelInterval,
    OrbitData, OrbitGrid, Region, RegularizeParams, Side, ValInterval,
};
use ati_core::{LaurentPoly, Rational};

pub type F = InvariantFunction<Rational>;

pub fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn unram(q: u64) -> FieldSetup {
    FieldSetup::unramified(q).unwrap()
}

pub fn ram(q: u64) -> FieldSetup {
    FieldSetup::ramified(q).unwrap()
}

fn in_window(lo: Option<HalfInt>, hi: Option<HalfInt>, v: Option<HalfInt>) -> bool {
    match v {
        None => hi.is_none(),
        Some(v) => lo.is_none_or(|l| l <= v) && hi.is_none_or(|h| v <= h),
    }
}

fn in_levels(iv: Option<LevelInterval>, l: Level) -> bool {
    let Some(iv) = iv else { return true };
    match l {
        Level::Infinite => iv.hi.is_none(),
        Level::Finite(n) => n >= iv.lo && iv.hi.is_none_or(|h| n <= h),
    }
}

fn sign_ok(req: SignReq, s: Sign) -> bool {
    match req {
        SignReq::Any => true,
        SignReq::Plus => s == Sign::Plus,
        SignReq::Minus => s == Sign::Minus,
    }
}

/// `f(h^{-1} γ h)` for `h = π^n u` with `η(u) = eps`, straight from the
/// matrix entries: `b ↦ b/h`, `c ↦ c h`.
fn value_at_conjugate(f: &F, g: &OrbitData, n: i64, eps: Sign) -> Rational {
    let eta_h = g.setup.eta_pi_f.pow(n) * eps;
    let vb = g.v_b - HalfInt::from_int(n);
    let vc = g.v_c() + HalfInt::from_int(n);
    // η(1/h) = η(h)
    let sb = g.sgn_b * eta_h;
    let sc = g.sgn_c() * eta_h;
    let mut acc = r(0);
    for (c, reg) in &f.terms {
        let side_ok = match reg.side {
            None => true,
            Some(Side::U0) => g.sgn_1mna == Sign::Plus,
            Some(Side::U1) => g.sgn_1mna == Sign::Minus,
        };
        let ok = in_window(reg.a.lo, reg.a.hi, Some(g.v_a))
            && in_window(reg.d.lo, reg.d.hi, Some(g.v_a))
            && in_window(reg.b.lo, reg.b.hi, Some(vb))
            && in_window(reg.c.lo, reg.c.hi, Some(vc))
            && sign_ok(reg.sgn_b, sb)
            && sign_ok(reg.sgn_c, sc)
            && in_levels(reg.lvl_a, g.lvl_a)
            && in_levels(reg.lvl_d, g.lvl_d)
            && in_levels(reg.t, Level::Finite(g.t))
            && side_ok;
        if ok {
            acc += *c;
        }
    }
    acc
}

/// `Σ_n T^n Σ_ε w(ε) η(h) f(h^{-1} γ h)` over a generous window of `n`;
/// `None` if the integrand is still nonzero at the window edge.
pub fn brute_orb_s(f: &F, g: &OrbitData) -> Option<LaurentPoly<Rational>> {
    let mut reach: i64 = g.t as i64 + g.v_b.doubled().abs() + 4;
    for (_, reg) in &f.terms {
        for e in [reg.b.lo, reg.b.hi, reg.c.lo, reg.c.hi]
            .into_iter()
            .flatten()
        {
            reach = reach.max(e.doubled().abs() + g.v_b.doubled().abs() + g.t as i64 + 4);
        }
    }
    let units: Vec<(Sign, Rational)> = if g.setup.ramified {
        vec![
            (Sign::Plus, Rational::new(1, 2)),
            (Sign::Minus, Rational::new(1, 2)),
        ]
    } else {
        vec![(Sign::Plus, r(1))]
    };
    let mut out = LaurentPoly::zero();
    for n in -reach..=reach {
        let mut coeff = r(0);
        for &(eps, w) in &units {
            let eta_h = g.setup.eta_pi_f.pow(n) * eps;
            let v = value_at_conjugate(f, g, n, eps);
            coeff += w * v * eta_h.to_scalar::<Rational>();
        }
        if (n == -reach || n == reach)
            && units
                .iter()
                .any(|&(e, _)| value_at_conjugate(f, g, n, e) != r(0))
        {
            return None;
        }
        out.add_term(HalfInt::from_int(n), coeff);
    }
    Some(out)
}

pub fn iv(lo: Option<i64>, hi: Option<i64>) -> ValInterval {
    ValInterval::new(lo.map(HalfInt::from_int), hi.map(HalfInt::from_int))
}

pub fn half_iv(lo2: i64, hi2: i64) -> ValInterval {
    ValInterval::new(
        Some(HalfInt::from_doubled(lo2)),
        Some(HalfInt::from_doubled(hi2)),
    )
}

fn b_shell(lo: i64, hi: i64, lvl_a: LevelInterval, lvl_d: LevelInterval) -> Region {
    let mut reg = Region::unit_diagonal(lvl_a, lvl_d);
    reg.b = iv(Some(lo), Some(hi));
    reg
}

fn c_shell(lo: i64, hi: i64, lvl_a: LevelInterval, lvl_d: LevelInterval) -> Region {
    let mut reg = Region::unit_diagonal(lvl_a, lvl_d);
    reg.c = iv(Some(lo), Some(hi));
    reg
}

/// Box functions vanishing on `B0`, at least 20 of them, valid for `setup`.
pub fn b0_free_battery(setup: &FieldSetup) -> Vec<F> {
    let all = LevelInterval::ALL;
    let params = RegularizeParams::default_for(setup);
    let mut out: Vec<F> = Vec::new();
    for m in [-1, 0, 1, 2] {
        out.push(F::indicator(b_shell(m, m, all, all)));
        out.push(F::indicator(c_shell(m, m, all, all)));
    }
    out.push(F::indicator(b_shell(0, 3, LevelInterval::from(1), all)));
    out.push(F::indicator(c_shell(-2, 1, all, LevelInterval::point(0))));
    let mut two = F::single(r(3), b_shell(1, 2, all, all));
    two.push(
        Rational::new(-1, 2),
        c_shell(0, 0, LevelInterval::from(2), all),
    );
    out.push(two);
    // compact away from B0
    let mut both = Region::unit_diagonal(all, all);
    both.b = iv(Some(0), Some(2));
    both.c = iv(Some(0), Some(1));
    out.push(F::indicator(both.clone()));
    // t and side windows
    let mut tw = b_shell(0, 1, all, all);
    tw.t = Some(LevelInterval::new(0, Some(3)));
    out.push(F::indicator(tw));
    let mut sw = both.clone();
    sw.side = Some(Side::U0);
    out.push(F::single(r(2), sw));
    // regularized functions
    out.push(regularize_off_b0(&F::unit_k(), &params).unwrap());
    out.push(regularize_off_b0(&F::diagonal_units(all, all), &params).unwrap());
    out.push(
        regularize_off_b0(
            &F::diagonal_units(LevelInterval::from(1), LevelInterval::point(0)),
            &params,
        )
        .unwrap(),
    );
    // pullback combinations of shells
    let lam = setup.f_element(2, Sign::Plus);
    out.push(pullback_combination(&F::indicator(b_shell(0, 1, all, all)), &lam).unwrap());
    out.push(F::zero());
    let shell = F::indicator(b_shell(1, 1, all, all));
    out.push(pullback_combination(&shell, &setup.f_element(1, Sign::Minus)).unwrap());
    if setup.ramified {
        let mut s = Region::unit_diagonal(all, all);
        s.b = half_iv(1, 1);
        s.sgn_b = SignReq::Plus;
        out.push(F::indicator(s));
        let mut s = Region::unit_diagonal(all, LevelInterval::from(1));
        s.c = half_iv(-1, 3);
        s.sgn_c = SignReq::Minus;
        out.push(F::single(r(5), s));
        let mut s = Region::unit_diagonal(all, all);
        s.b = half_iv(0, 0);
        s.sgn_b = SignReq::Minus;
        out.push(F::indicator(s));
    }
    for f in &out {
        assert!(f.vanishes_on_b0());
    }
    out
}

/// The B0-free battery plus functions that do not vanish on `B0`.
pub fn full_battery(setup: &FieldSetup) -> Vec<F> {
    let params = RegularizeParams::default_for(setup);
    let mut out = b0_free_battery(setup);
    out.push(alpha::<Rational>(LevelInterval::ALL, LevelInterval::ALL, &params).unwrap());
    out.push(alpha::<Rational>(LevelInterval::point(1), LevelInterval::from(2), &params).unwrap());
    out.push(F::unit_k());
    out.push(F::diagonal_units(LevelInterval::ALL, LevelInterval::ALL));
    out.push(F::diagonal_units(
        LevelInterval::from(2),
        LevelInterval::point(1),
    ));
    let mut sh = Region::integral();
    sh.b = iv(Some(-1), None);
    out.push(F::single(Rational::new(2, 3), sh));
    out
}

pub fn levels() -> Vec<Level> {
    vec![
        Level::Finite(0),
        Level::Finite(1),
        Level::Finite(2),
        Level::Infinite,
    ]
}

/// `v_b ∈ [-4, 4]`, `t ∈ [0, 9]`, four diagonal levels each.
pub fn sweep_grid(setup: FieldSetup) -> Vec<OrbitData> {
    OrbitGrid::new(setup, 9, 4)
        .with_levels(levels(), levels())
        .orbits()
        .unwrap()
}

/// Elements of `F^×` with `v ∈ {1, 2, 3}`, both η-signs where they differ.
pub fn lambdas(setup: &FieldSetup) -> Vec<ValClass> {
    let mut out = Vec::new();
    for v in 1..=3 {
        for s in [Sign::Plus, Sign::Minus] {
            let l = setup.f_element(v, s);
            if !out.contains(&l) {
                out.push(l);
            }
        }
    }
    out
}

pub fn setups() -> Vec<FieldSetup> {
    vec![
        unram(3),
        unram(2),
        ram(3),
        FieldSetup::new(5, true, Sign::Minus).unwrap(),
    ]
}

pub fn key(la: LevelInterval, ld: LevelInterval, parity: u8) -> GermKey {
    GermKey::new(la, ld, parity)
}

pub fn entry(k: GermKey, poly: &str) -> GermEntry<Rational> {
    GermEntry {
        key: k,
        poly: poly.parse().unwrap(),
    }
}

/// Orbits with `t ∈ [lo, lo + 10]`, `|v_b| <= 5` and sampled diagonal levels.
pub fn near_b0(setup: FieldSetup, lo: u32) -> Vec<OrbitData> {
    OrbitGrid::new(setup, lo + 10, 5)
        .with_levels(levels(), levels())
        .orbits()
        .unwrap()
        .into_iter()
        .filter(|g| g.t >= lo)
        .collect()
}

/// Germs given directly, plus those of the B0-free battery.
pub fn germ_battery(setup: &FieldSetup) -> Vec<GermData<Rational>> {
    let all = LevelInterval::ALL;
    let mut out: Vec<GermData<Rational>> = b0_free_battery(setup)
        .iter()
        .map(|f| germ_extract(f, setup).unwrap())
        .collect();
    let mut push = |a0: Vec<GermEntry<Rational>>, a1: Vec<GermEntry<Rational>>| {
        out.push(GermData {
            a0,
            a1,
            validity_threshold: 1,
        })
    };
    push(vec![entry(key(all, all, 0), "1")], vec![]);
    push(vec![], vec![entry(key(all, all, 0), "3/7")]);
    push(
        vec![entry(
            key(LevelInterval::point(0), all, 0),
            "T^-1 - 2 + T^2",
        )],
        vec![entry(key(all, LevelInterval::from(1), 0), "-T^-2 + 5/2*T")],
    );
    push(
        vec![entry(
            key(LevelInterval::from(2), LevelInterval::point(1), 0),
            "4*T^3",
        )],
        vec![],
    );
    if setup.ramified {
        push(
            vec![entry(key(all, all, 1), "T^-1/2")],
            vec![entry(key(all, all, 1), "-T^3/2")],
        );
        push(
            vec![entry(
                key(LevelInterval::point(1), all, 1),
                "2*T^1/2 - T^-3/2",
            )],
            vec![entry(key(all, all, 0), "1/3 - T^-1")],
        );
    }
    out
}

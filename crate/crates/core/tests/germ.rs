mod support;

use ati_core::field::{HalfInt, Sign};
use ati_core::germ::{
    germ_derivative_form, germ_extract, germ_reconstruct, transfer_germ_solve,
    transfer_system_value, vanishing_orb_check, GermData, GermEntry, GermSide,
};
use ati_core::orbital::{
    alpha, d_orb, orb, orb_s, Level, LevelInterval, OrbitData, OrbitGrid, RegularizeParams, Side,
};
use ati_core::{LaurentPoly, Rational};
use proptest::prelude::*;
use support::*;

#[test]
fn battery_is_large_enough() {
    for setup in setups() {
        assert!(b0_free_battery(&setup).len() >= 20);
        assert!(germ_battery(&setup).len() >= 20);
    }
}

#[test]
fn reconstruct_then_extract_is_identity() {
    for setup in setups() {
        for g in germ_battery(&setup) {
            let f = germ_reconstruct(&g, &setup).unwrap();
            assert!(f.vanishes_on_b0());
            let back = germ_extract(&f, &setup).unwrap();
            assert!(back.same_germ(&g), "{g:?}\n{back:?}");
        }
    }
}

#[test]
fn expansion_holds_near_b0() {
    for setup in setups() {
        let mut fns = b0_free_battery(&setup);
        for g in germ_battery(&setup) {
            fns.push(germ_reconstruct(&g, &setup).unwrap());
        }
        for f in &fns {
            let g = germ_extract(f, &setup).unwrap();
            for gamma in near_b0(setup, g.validity_threshold) {
                assert!(g.applies_to(&gamma));
                assert_eq!(
                    orb_s(&gamma, f).unwrap(),
                    g.predict(&gamma),
                    "{gamma} / {f:?}"
                );
            }
        }
    }
}

#[test]
fn expansion_fails_below_threshold_somewhere() {
    // a shell at v(b) = 2 is seen differently while t < 2 v(b)
    let setup = unram(3);
    let mut reg = ati_core::orbital::Region::unit_diagonal(LevelInterval::ALL, LevelInterval::ALL);
    reg.b = iv(Some(2), Some(2));
    let f = F::indicator(reg);
    let g = germ_extract(&f, &setup).unwrap();
    let bad = near_b0(setup, 0)
        .into_iter()
        .filter(|x| !g.applies_to(x))
        .any(|x| orb_s(&x, &f).unwrap() != g.predict(&x));
    assert!(bad);
}

#[test]
fn worked_examples() {
    let setup = unram(3);
    let all = LevelInterval::ALL;
    let g = GermData {
        a0: vec![entry(key(all, all, 0), "1")],
        a1: vec![],
        validity_threshold: 1,
    };
    let f = germ_reconstruct(&g, &setup).unwrap();
    for gamma in near_b0(setup, 1) {
        let eb = LaurentPoly::monomial(gamma.sgn_b.to_scalar(), gamma.v_b);
        assert_eq!(orb_s(&gamma, &f).unwrap(), eb);
    }
    let c = Rational::new(-5, 3);
    let g = GermData {
        a0: vec![],
        a1: vec![GermEntry {
            key: key(all, all, 0),
            poly: LaurentPoly::constant(c),
        }],
        validity_threshold: 1,
    };
    let f = germ_reconstruct(&g, &setup).unwrap();
    for gamma in near_b0(setup, 1) {
        let ec = LaurentPoly::monomial(gamma.sgn_c().to_scalar::<Rational>() * c, -gamma.v_c());
        assert_eq!(orb_s(&gamma, &f).unwrap(), ec);
    }
    assert!(germ_reconstruct(&GermData::<Rational>::zero(), &setup)
        .unwrap()
        .terms
        .is_empty());

    // α has a zero germ once its B0 value is stripped
    for setup in setups() {
        let params = RegularizeParams::default_for(&setup);
        let a = alpha::<Rational>(all, all, &params).unwrap();
        let grid = OrbitGrid::new(setup, 9, 4).with_levels(levels(), levels());
        assert!(vanishing_orb_check(&a, &grid).unwrap());
    }
}

#[test]
fn reconstruct_rejects_bad_parity() {
    let all = LevelInterval::ALL;
    let g = GermData {
        a0: vec![entry(key(all, all, 0), "T^1/2")],
        a1: vec![],
        validity_threshold: 1,
    };
    assert!(germ_reconstruct(&g, &ram(3)).is_err());
    let g = GermData {
        a0: vec![entry(key(all, all, 1), "T^-1/2")],
        a1: vec![],
        validity_threshold: 1,
    };
    assert!(germ_reconstruct(&g, &unram(3)).is_err());
}

#[test]
fn derivative_form_predicts_d_orb() {
    for setup in setups() {
        for f in b0_free_battery(&setup) {
            let g = germ_extract(&f, &setup).unwrap();
            let d = germ_derivative_form(&g);
            for gamma in near_b0(setup, g.validity_threshold) {
                assert_eq!(
                    d_orb(&gamma, &f).unwrap(),
                    d.predict_d_orb(&gamma),
                    "{gamma}"
                );
            }
        }
    }
}

#[test]
fn vanishing_orb_gives_zero_germ_on_battery() {
    for setup in setups() {
        let grid = OrbitGrid::new(setup, 9, 4).with_levels(levels(), levels());
        let orbits = grid.orbits().unwrap();
        let mut hits = 0;
        for f in full_battery(&setup) {
            let vanishing = orbits.iter().all(|g| orb(g, &f).unwrap() == r(0));
            if vanishing {
                hits += 1;
                assert!(vanishing_orb_check(&f, &grid).unwrap(), "{f:?}");
            } else {
                assert!(vanishing_orb_check(&f, &grid).is_err());
            }
        }
        assert!(hits >= 3);
    }
}

#[test]
fn unbounded_orbital_integral_off_b0_free_functions() {
    // Orb_s of 1(O_E^×, O_E^×) along γ_t has t + 1 monomials
    for q in [2, 3, 5] {
        let f = F::diagonal_units(LevelInterval::ALL, LevelInterval::ALL);
        for t in 0..=30 {
            let g = OrbitData::unramified(q, t, 0).unwrap();
            assert_eq!(orb_s(&g, &f).unwrap().terms().count(), t as usize + 1);
        }
    }
}

#[test]
fn solver_examples() {
    let setup = unram(3);
    let all = LevelInterval::ALL;
    let g = transfer_germ_solve(&setup, &[(all, all, r(4))], &[], Sign::Minus);
    assert_eq!(
        g.lookup(GermSide::B, Level::Infinite, Level::Infinite, 0)
            .eval_at_s0(),
        r(-2)
    );
    assert_eq!(
        g.lookup(GermSide::C, Level::Infinite, Level::Infinite, 0)
            .eval_at_s0(),
        r(2)
    );
    let g = transfer_germ_solve(&setup, &[(all, all, r(3))], &[(all, all, r(3))], Sign::Plus);
    assert!(g.a0.is_empty());
}

fn level_values() -> impl Strategy<Value = Vec<(LevelInterval, LevelInterval, Rational)>> {
    let li = prop_oneof![
        Just(LevelInterval::ALL),
        (0u32..3).prop_map(LevelInterval::point),
        (0u32..3).prop_map(LevelInterval::from),
    ];
    prop::collection::vec((li.clone(), li, -6i64..7, 1i64..4), 0..4).prop_map(|v| {
        v.into_iter()
            .map(|(a, d, n, m)| (a, d, Rational::new(n, m)))
            .collect()
    })
}

fn lookup(vals: &[(LevelInterval, LevelInterval, Rational)], la: Level, ld: Level) -> Rational {
    vals.iter()
        .filter(|(a, d, _)| a.contains(la) && d.contains(ld))
        .map(|x| x.2)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_satisfies_the_system(
        c0 in level_values(),
        c1 in level_values(),
        plus in any::<bool>(),
        ramified in any::<bool>(),
    ) {
        let setup = if ramified { ram(3) } else { unram(3) };
        let sb0 = if plus { Sign::Plus } else { Sign::Minus };
        let g = transfer_germ_solve(&setup, &c0, &c1, sb0);
        let parities: &[u8] = if ramified { &[0, 1] } else { &[0] };
        for la in levels() {
            for ld in levels() {
                for &p in parities {
                    prop_assert_eq!(
                        transfer_system_value(&g, Side::U0, sb0, la, ld, p),
                        lookup(&c0, la, ld)
                    );
                    prop_assert_eq!(
                        transfer_system_value(&g, Side::U1, sb0, la, ld, p),
                        lookup(&c1, la, ld)
                    );
                }
            }
        }
    }

    #[test]
    fn solved_germ_round_trips(c0 in level_values(), c1 in level_values(), ramified in any::<bool>()) {
        let setup = if ramified { ram(5) } else { unram(5) };
        let g = transfer_germ_solve(&setup, &c0, &c1, Sign::Plus);
        let f = germ_reconstruct(&g, &setup).unwrap();
        prop_assert!(germ_extract(&f, &setup).unwrap().same_germ(&g));
    }

    #[test]
    fn half_integral_orbits_see_parity_one(vb2 in -9i64..10, t in 4u32..12) {
        let setup = ram(3);
        let all = LevelInterval::ALL;
        let g = GermData {
            a0: vec![entry(key(all, all, 1), "T^-1/2")],
            a1: vec![],
            validity_threshold: 1,
        };
        let f = germ_reconstruct(&g, &setup).unwrap();
        let gamma = OrbitData::new(
            setup, HalfInt::ZERO, Level::Infinite, Level::Infinite, t, Sign::Plus,
            HalfInt::from_doubled(vb2), Sign::Plus,
        ).unwrap();
        prop_assert_eq!(orb_s(&gamma, &f).unwrap(), g.predict(&gamma));
    }
}

//! Finite sample grids of orbits for sweeps and property checks.

use super::orbit::{Level, OrbitData};
use crate::error::Result;
use crate::field::{FieldSetup, HalfInt, Sign};

/// Orbits with unit `a` (so `v(a) = 0`) over ranges of `t`, `v(b)` and
/// diagonal levels. Ramified grids also run over half-integral `v(b)` and
/// both signs; unramified signs are forced.
#[derive(Debug, Clone)]
pub struct OrbitGrid {
    pub setup: FieldSetup,
    pub t: std::ops::RangeInclusive<u32>,
    /// Doubled valuations of `b`; unramified grids skip odd entries.
    pub v_b_doubled: std::ops::RangeInclusive<i64>,
    pub lvl_a: Vec<Level>,
    pub lvl_d: Vec<Level>,
}

impl OrbitGrid {
    pub fn new(setup: FieldSetup, t_max: u32, v_b_abs: i64) -> OrbitGrid {
        OrbitGrid {
            setup,
            t: 0..=t_max,
            v_b_doubled: -2 * v_b_abs..=2 * v_b_abs,
            lvl_a: vec![Level::Infinite],
            lvl_d: vec![Level::Infinite],
        }
    }

    pub fn with_levels(mut self, lvl_a: Vec<Level>, lvl_d: Vec<Level>) -> OrbitGrid {
        self.lvl_a = lvl_a;
        self.lvl_d = lvl_d;
        self
    }

    pub fn orbits(&self) -> Result<Vec<OrbitData>> {
        let signs: &[Sign] = if self.setup.ramified {
            &[Sign::Plus, Sign::Minus]
        } else {
            &[Sign::Plus]
        };
        let mut out = Vec::new();
        for t in self.t.clone() {
            for vb2 in self.v_b_doubled.clone() {
                if !self.setup.ramified && vb2 % 2 != 0 {
                    continue;
                }
                let v_b = HalfInt::from_doubled(vb2);
                for &la in &self.lvl_a {
                    for &ld in &self.lvl_d {
                        for &s1 in signs {
                            for &sb in signs {
                                let (s1, sb) = if self.setup.ramified {
                                    (s1, sb)
                                } else {
                                    (Sign::from_parity(t as i64), Sign::from_parity(v_b.floor()))
                                };
                                out.push(OrbitData::new(
                                    self.setup,
                                    HalfInt::ZERO,
                                    la,
                                    ld,
                                    t,
                                    s1,
                                    v_b,
                                    sb,
                                )?);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

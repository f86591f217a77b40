//! Deformation lengths of homomorphisms between quasi-canonical lifts.
//!
//! `X_i` is the quasi-canonical lift of level `i` (defined over `W_i`), and
//! `f0: X_i ⊗ k -> Y_j ⊗ k` has class height `l` relative to the lifting
//! homomorphisms. [`lift_bound_closed`] gives `α + 1`, the first length at
//! which `f0` fails to lift over a base of ramification `e_rel` over `W_max`.
//! [`lift_bound_oracle`] recomputes it by climbing levels one at a time.
//!
//! Values are plain `u128` integers; everything here is exact integer
//! arithmetic with overflow reported as an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSetup;

fn pow(q: u64, n: u32) -> Result<u128> {
    (q as u128).checked_pow(n).ok_or(Error::Overflow("q^n"))
}

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow("product"))
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow("sum"))
}

/// `e_s = [O_E^× : O_s^×]`: 1 for `s = 0`, `2q^s` ramified, `q^s + q^{s-1}`
/// unramified.
pub fn e_s(setup: &FieldSetup, s: u32) -> Result<u128> {
    if s == 0 {
        return Ok(1);
    }
    if setup.ramified {
        mul(2, pow(setup.q, s)?)
    } else {
        add(pow(setup.q, s)?, pow(setup.q, s - 1)?)
    }
}

/// Ramification index of `W_s` over `O_F̆`: `e_s` for `s >= 1`, and for
/// `s = 0` the index of `O_Ĕ` itself (2 ramified, 1 unramified).
pub fn ramification_index(setup: &FieldSetup, s: u32) -> Result<u128> {
    match (s, setup.ramified) {
        (0, true) => Ok(2),
        (0, false) => Ok(1),
        _ => e_s(setup, s),
    }
}

/// `a(n) = 1 + q + ... + q^n`, with `a(-1) = 0`.
pub fn a(n: i64, q: u64) -> Result<u128> {
    if n < -1 {
        return Err(Error::Domain(format!("a(n) needs n >= -1, got {n}")));
    }
    let mut acc: u128 = 0;
    let mut term: u128 = 1;
    for k in 0..=n {
        acc = add(acc, term)?;
        if k < n {
            term = mul(term, q as u128)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeformQuery {
    pub setup: FieldSetup,
    pub i: u32,
    pub j: u32,
    /// Ramification of the base over `W_max{i,j}`.
    pub e_rel: u64,
    /// Class height of `f0`.
    pub l: u32,
}

/// Which of the four closed-form regimes a query falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightCase {
    /// `l < d`.
    BelowGap,
    /// `d <= l <= i + j - 1`, `l + d` even.
    MiddleEven,
    /// `d <= l <= i + j - 1`, `l + d` odd.
    MiddleOdd,
    /// `l >= i + j`.
    Stable,
}

impl DeformQuery {
    pub fn new(setup: FieldSetup, i: u32, j: u32, e_rel: u64, l: u32) -> Result<DeformQuery> {
        if e_rel == 0 {
            return Err(Error::InvalidQuery("e_rel must be >= 1".into()));
        }
        Ok(DeformQuery {
            setup,
            i,
            j,
            e_rel,
            l,
        })
    }

    /// `(min, max)` of the levels.
    pub fn ordered(&self) -> (u32, u32) {
        (self.i.min(self.j), self.i.max(self.j))
    }

    pub fn d(&self) -> u32 {
        self.i.abs_diff(self.j)
    }

    pub fn case(&self) -> HeightCase {
        let (i, j) = self.ordered();
        let d = self.d();
        if self.l < d {
            HeightCase::BelowGap
        } else if self.l < i + j {
            if (self.l + d).is_multiple_of(2) {
                HeightCase::MiddleEven
            } else {
                HeightCase::MiddleOdd
            }
        } else {
            HeightCase::Stable
        }
    }

    /// In the stable regime `(l - (i+j-1)) · ê_max` must be even.
    pub fn check_admissible(&self) -> Result<()> {
        if self.e_rel == 0 {
            return Err(Error::InvalidQuery("e_rel must be >= 1".into()));
        }
        if self.case() == HeightCase::Stable {
            let (i, j) = self.ordered();
            let x = self.l as i128 - (i as i128 + j as i128 - 1);
            let num = x * ramification_index(&self.setup, j)? as i128;
            if num % 2 != 0 {
                return Err(Error::ParityInadmissible { numerator: num });
            }
        }
        Ok(())
    }
}

/// `α + 1` by the four-case closed formula.
pub fn lift_bound_closed(dq: &DeformQuery) -> Result<u128> {
    dq.check_admissible()?;
    let q = dq.setup.q;
    let (i, j) = dq.ordered();
    let d = dq.d() as i64;
    let l = dq.l as i64;
    let n = (l + d) / 2;
    let a_d = a(d - 1, q)?;
    let inner = match dq.case() {
        HeightCase::BelowGap => a(l, q)?,
        HeightCase::MiddleEven => add(a(n, q)?, a(n - 1, q)?)? - a_d,
        HeightCase::MiddleOdd => mul(2, a(n, q)?)? - a_d,
        HeightCase::Stable => {
            let x = (l - (i as i64 + j as i64 - 1)) as u128;
            let frac = mul(x, ramification_index(&dq.setup, j)?)? / 2;
            add(mul(2, a(j as i64 - 1, q)?)? - a_d, frac)?
        }
    };
    mul(dq.e_rel as u128, inner)
}

/// `α + 1` by explicit recursion: a base value at the lowest level where
/// `f0` can be written as `Π^k g0`, then one increment `e/ê_{k+1}` per level
/// climbed.
pub fn lift_bound_oracle(dq: &DeformQuery) -> Result<u128> {
    dq.check_admissible()?;
    let setup = &dq.setup;
    let q = setup.q;
    let (i, j) = dq.ordered();
    let d = j - i;
    let l = dq.l;
    let e_abs = mul(dq.e_rel as u128, ramification_index(setup, j)?)?;
    let ratio = |k: u32| -> Result<u128> {
        let ek = ramification_index(setup, k)?;
        if e_abs % ek != 0 {
            return Err(Error::InvalidQuery(format!("e_{k} does not divide e")));
        }
        Ok(e_abs / ek)
    };

    let (start, mut n) = if l < d {
        // f0 = Π^l g0 with g0 an isomorphism at level j - l
        let k0 = j - l;
        (k0, ratio(k0)?)
    } else {
        // f0 = Π^d g0 with g0 ∈ End at level i, of height l - d
        let h = l - d;
        let m = (h / 2) as i64;
        let doubled: u128 = if h < 2 * i {
            if h.is_multiple_of(2) {
                mul(2, add(a(m, q)?, a(m - 1, q)?)?)?
            } else {
                mul(4, a(m, q)?)?
            }
        } else {
            let x = (l as i64 - (i as i64 + j as i64 - 1)) as u128;
            add(
                mul(4, a(i as i64 - 1, q)?)?,
                mul(x, ramification_index(setup, i)?)?,
            )?
        };
        let twice = mul(ratio(i)?, doubled)?;
        if twice % 2 != 0 {
            return Err(Error::ParityInadmissible {
                numerator: twice as i128,
            });
        }
        (i, twice / 2)
    };
    for k in start..j {
        n = add(n, ratio(k + 1)?)?;
    }
    Ok(n)
}

/// Whether some nonzero element of `Π^{|i-j|} O_min{i,j}` has `v_D`-height
/// exactly `l`. `v_D` of `O_s \ 0` takes every even value, and in the
/// ramified case also every odd value `>= 2s + 1` (all odd values if `s = 0`).
pub fn hom_height_attainable(setup: &FieldSetup, i: u32, j: u32, l: u32) -> bool {
    let d = i.abs_diff(j);
    let s = i.min(j);
    if l < d {
        return false;
    }
    let h = l - d;
    if h.is_multiple_of(2) {
        return true;
    }
    setup.ramified && (s == 0 || h > 2 * s)
}

/// Whether `l` occurs as a class height, i.e. as the height of `f0` modulo
/// the homomorphisms that lift. Ramified: every `l`. Unramified: heights of
/// the parity of `d` stop at `i + j - 2`; the other parity is unbounded.
pub fn class_height_attainable(setup: &FieldSetup, i: u32, j: u32, l: u32) -> bool {
    if setup.ramified {
        return true;
    }
    let d = i.abs_diff(j);
    (l + d) % 2 == 1 || l + 2 <= i + j
}

/// Whether the reduction map on homomorphisms commutes with the Galois
/// twist: ramified, or `i + j` even.
pub fn reduction_commutes(setup: &FieldSetup, i: u32, j: u32) -> bool {
    setup.ramified || (i + j).is_multiple_of(2)
}

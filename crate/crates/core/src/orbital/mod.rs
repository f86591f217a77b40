//! Orbits on S(F), invariant test functions and their orbital integrals.

mod engine;
mod function;
mod grid;
mod orbit;

pub use engine::{
    alpha, d_orb, orb, orb_s, pullback_combination, region_orb_s, regularize_off_b0,
    transfer_factor, RegularizeParams,
};
pub use function::{level_pieces, InvariantFunction, LevelInterval, Point, Region, ValInterval};
pub use grid::OrbitGrid;
pub use orbit::{Level, OrbitData, Side};

//! Fixtures shared by the benchmarks.

use ness_core::lax::LaxOp;
use ness_core::mpo::MpoFactor;
use ness_core::verify::xxz_solution;

/// XXZ Lax operator at the solved spin parameter, sized for `n` sites.
pub fn xxz_lax(gamma: f64, coupling: f64, n: usize) -> LaxOp {
    xxz_solution(gamma, coupling, n + 2).expect("valid parameters").0
}

pub fn xxz_factor(gamma: f64, coupling: f64, n: usize) -> MpoFactor {
    MpoFactor::new(xxz_lax(gamma, coupling, n), n).expect("valid factor")
}

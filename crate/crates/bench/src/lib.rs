//! Shared fixtures for the benchmarks.

use dfl_core::floquet::build_layout;
use dfl_core::{InitialStateSpec, LatticeSpec, QubitLayout, Statevector};

/// Open chain with `J = h = 1` and the given period.
pub fn chain(sites: usize, period: f64) -> LatticeSpec {
    LatticeSpec::open(sites, 1.0, 1.0, period).expect("valid chain")
}

/// Domain wall with z-up bonds, prepared on `spec`.
pub fn domain_wall_state(spec: &LatticeSpec) -> (QubitLayout, InitialStateSpec, Statevector) {
    let layout = build_layout(spec);
    let init = InitialStateSpec::z_up(InitialStateSpec::domain_wall(spec.sites), spec.bond_count());
    let psi = init.product_state(&layout).expect("fits in memory");
    (layout, init, psi)
}

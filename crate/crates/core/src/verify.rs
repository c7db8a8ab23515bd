//! Unitary-equivalence checks of the compiled circuits.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_unitary, phase_insensitive_distance};
use crate::error::Result;
use crate::exact::{bond_term_unitary, hopping_term_unitary, FloquetEd};
use crate::floquet::{
    build_a_gate, build_a_gate_sycamore, build_b_gate, build_layout, build_period_for_backend,
    CircuitBackend, LatticeSpec,
};
use crate::rng;

/// Tolerance on the phase-insensitive Frobenius distance.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Largest distance over all draws.
    pub max_error: f64,
    pub tolerance: f64,
    pub draws: usize,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        Check {
            name: name.to_string(),
            max_error,
            tolerance,
            draws: errors.len(),
            passed: errors.iter().all(|e| e.is_finite()) && max_error <= tolerance,
        }
    }
}

/// Random `(J, h, T)` with `J` in `(0, 2]`, `h` in `[0, 2]` and `T` in `(0, 1]`.
pub fn random_parameters(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut r = rng::stream(seed, rng::label("decomposition-draws"), 0);
    (0..count)
        .map(|_| {
            (
                2.0 - r.random_range(0.0..2.0),
                r.random_range(0.0..=2.0),
                1.0 - r.random_range(0.0..1.0),
            )
        })
        .collect()
}

fn embed(u: &DMatrix<C64>, qubits: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let k = qubits.len();
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let local_in = qubits.iter().enumerate().fold(0, |a, (t, &q)| a | ((col >> q & 1) << t));
        let rest = qubits.iter().fold(col, |a, &q| a & !(1 << q));
        for local_out in 0..1usize << k {
            let row = qubits.iter().enumerate().fold(rest, |a, (t, &q)| a | ((local_out >> t & 1) << q));
            out[(row, col)] = u[(local_out, local_in)];
        }
    }
    out
}

/// Runs every check over `draws` random parameter sets.
pub fn verify_decompositions(draws: usize, seed: u64, tolerance: f64) -> Result<Vec<Check>> {
    let params = random_parameters(seed, draws);
    let (mut a_err, mut b_err, mut syc_err, mut cz_err, mut ed_err) = (vec![], vec![], vec![], vec![], vec![]);
    for &(j, h, t) in &params {
        // A on (site 1, bond, site 2) of a two-site chain
        let two = build_layout(&LatticeSpec::open(2, j, h, t)?);
        let a = circuit_unitary(&build_a_gate(1, &two, j, t)?)?;
        a_err.push(phase_insensitive_distance(&a, &hopping_term_unitary(j, t)));
        let s = circuit_unitary(&build_a_gate_sycamore(1, &two, j, t)?)?;
        syc_err.push(phase_insensitive_distance(&s, &a));

        // B around site 2 of a three-site chain: bonds on qubits 1 and 3
        let three = build_layout(&LatticeSpec::open(3, j, h, t)?);
        let b = circuit_unitary(&build_b_gate(2, &three, h, t)?)?;
        b_err.push(phase_insensitive_distance(&b, &embed(&bond_term_unitary(h, t), &[1, 3], 5)));

        let spec = LatticeSpec::open(4, j, h, t)?;
        let layout = build_layout(&spec);
        let cnot = circuit_unitary(&build_period_for_backend(&spec, &layout, CircuitBackend::Cnot)?)?;
        let cz = circuit_unitary(&build_period_for_backend(&spec, &layout, CircuitBackend::Cz)?)?;
        cz_err.push(phase_insensitive_distance(&cz, &cnot));
        ed_err.push(phase_insensitive_distance(&cnot, &FloquetEd::new(&spec)?.unitary()?));
    }
    Ok(vec![
        Check::new("a_block_vs_term_exponential", &a_err, tolerance),
        Check::new("b_block_vs_term_exponential", &b_err, tolerance),
        Check::new("sycamore_a_vs_cnot_a", &syc_err, tolerance),
        Check::new("cz_period_vs_cnot_period", &cz_err, tolerance),
        Check::new("period_vs_floquet_ed", &ed_err, tolerance),
    ])
}

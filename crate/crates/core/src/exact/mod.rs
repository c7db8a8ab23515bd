//! Reference solvers: exact diagonalization of the spin model, the
//! term-by-term Floquet product and the charge-sector free-fermion solver.

mod ed;
mod floquet_ed;
mod greens;
mod hamiltonian;
mod sector;

pub use ed::{evolve_continuous, ExactEvolver};
pub use floquet_ed::{evolve_floquet_ed, FloquetEd};
pub use greens::{greens_function_ed, MAX_GREENS_QUBITS};
pub use hamiltonian::{build_dense_hamiltonian, DenseHamiltonian, MAX_ED_QUBITS, MAX_DENSE_QUBITS};
pub use sector::{
    sector_averaged_densities, sector_averaged_imbalance, sector_evolve, sector_imbalance_plateau,
    single_sector_densities, ChargeConfig, CorrelationMatrix, SectorAverage, SectorHamiltonian,
    SectorStrategy,
};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// `exp(+i J T sz_b (S+_j S-_k + h.c.))` on local qubits `(site j, bond, site k)`.
pub fn hopping_term_unitary(hopping: f64, period: f64) -> DMatrix<C64> {
    expi_symmetric(&hamiltonian::hopping_generator(), hopping * period)
}

/// `exp(-i h T sx sx)` on two bond qubits.
pub fn bond_term_unitary(h: f64, period: f64) -> DMatrix<C64> {
    expi_symmetric(&hamiltonian::bond_generator(), -h * period)
}

/// `exp(i coeff G)` for a real symmetric `G`.
pub(crate) fn expi_symmetric(g: &DMatrix<f64>, coeff: f64) -> DMatrix<C64> {
    let eig = g.clone().symmetric_eigen();
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues.map(|e| C64::from_polar(1.0, coeff * e)),
    );
    let mut u = &v * phases * v.transpose();
    // entries linking disconnected blocks of `g` vanish exactly
    let comp = components(g);
    for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            if comp[r] != comp[c] {
                u[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    u
}

/// Connected-component label of every basis index under the nonzero pattern of `g`.
fn components(g: &DMatrix<f64>) -> Vec<usize> {
    let n = g.nrows();
    let mut label = vec![usize::MAX; n];
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for k in 0..n {
                if label[k] == usize::MAX && (g[(i, k)] != 0.0 || g[(k, i)] != 0.0) {
                    label[k] = start;
                    stack.push(k);
                }
            }
        }
    }
    label
}

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::floquet::{build_layout, LatticeSpec, QubitLayout};
use crate::statevector::Statevector;

/// Widest chain handled by the exact solvers.
pub const MAX_ED_QUBITS: usize = 16;
/// Widest chain whose Hamiltonian may be materialized as a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 12;

/// `sz_b (S+_j S-_k + h.c.)` on local qubits `(site j, bond, site k)`.
pub(crate) fn hopping_generator() -> DMatrix<f64> {
    let mut g = DMatrix::zeros(8, 8);
    for i in 0..8usize {
        if (i & 1) != (i >> 2 & 1) {
            g[(i ^ 0b101, i)] = if i & 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    g
}

/// `sx sx` on two bond qubits.
pub(crate) fn bond_generator() -> DMatrix<f64> {
    let mut g = DMatrix::zeros(4, 4);
    for i in 0..4usize {
        g[(i ^ 0b11, i)] = 1.0;
    }
    g
}

/// Spin form of the lattice Hamiltonian
///
/// ```text
/// H = -J sum_j (sz_{j,j+1} S+_j S-_{j+1} + h.c.) + h sum_j sx_{j-1,j} sx_{j,j+1}
/// ```
///
/// kept as a list of local terms. Periodic chains are periodic in the spin
/// variables; the matching fermion boundary sign lives in the sector solver.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    spec: LatticeSpec,
    layout: QubitLayout,
    /// `(site j, bond, site j+1)` qubits of each hopping term.
    hops: Vec<[usize; 3]>,
    /// Bond pairs of each B term.
    bond_pairs: Vec<[usize; 2]>,
}

pub fn build_dense_hamiltonian(spec: &LatticeSpec) -> Result<DenseHamiltonian> {
    spec.validate()?;
    let layout = build_layout(spec);
    let n = layout.total_qubits();
    if n > MAX_ED_QUBITS {
        return Err(Error::Capacity {
            what: "exact diagonalization qubits",
            requested: n,
            limit: MAX_ED_QUBITS,
        });
    }
    let hops = spec
        .hopping_sites()
        .into_iter()
        .map(|j| [layout.site_qubit(j), layout.bond_qubit(j), layout.site_qubit(layout.next_site(j))])
        .collect();
    let bond_pairs = spec
        .charge_sites()
        .into_iter()
        .map(|j| [layout.left_bond(j).unwrap(), layout.right_bond(j).unwrap()])
        .collect();
    Ok(DenseHamiltonian {
        spec: *spec,
        layout,
        hops,
        bond_pairs,
    })
}

impl DenseHamiltonian {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub(crate) fn hops(&self) -> &[[usize; 3]] {
        &self.hops
    }

    pub(crate) fn bond_pairs(&self) -> &[[usize; 2]] {
        &self.bond_pairs
    }

    /// Nonzero entries `(row, value)` of column `i`.
    pub fn column(&self, i: usize) -> Vec<(usize, f64)> {
        let (j, h) = (self.spec.j, self.spec.h);
        let mut out = Vec::with_capacity(self.hops.len() + self.bond_pairs.len());
        for &[a, b, c] in &self.hops {
            if (i >> a & 1) != (i >> c & 1) {
                let sign = if i >> b & 1 == 0 { 1.0 } else { -1.0 };
                out.push((i ^ (1 << a) ^ (1 << c), -j * sign));
            }
        }
        if h != 0.0 {
            for &[a, b] in &self.bond_pairs {
                out.push((i ^ (1 << a) ^ (1 << b), h));
            }
        }
        out
    }

    /// `H |psi>`.
    pub fn apply(&self, psi: &Statevector) -> Result<Statevector> {
        if psi.num_qubits() != self.num_qubits() {
            return crate::error::param("state width does not match the Hamiltonian");
        }
        let mut out = vec![C64::new(0.0, 0.0); psi.amplitudes().len()];
        for (i, &a) in psi.amplitudes().iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (r, v) in self.column(i) {
                out[r] += a * v;
            }
        }
        Statevector::from_amplitudes(self.num_qubits(), out)
    }

    /// `<psi|H|psi>`.
    pub fn energy(&self, psi: &Statevector) -> Result<f64> {
        Ok(psi.inner(&self.apply(psi)?).re)
    }

    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let n = self.num_qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "dense Hamiltonian qubits",
                requested: n,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for (r, v) in self.column(i) {
                m[(r, i)] += C64::new(v, 0.0);
            }
        }
        Ok(m)
    }
}

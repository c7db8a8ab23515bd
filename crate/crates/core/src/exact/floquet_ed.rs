use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{bond_term_unitary, hopping_term_unitary};
use crate::error::{param, Error, Result};
use crate::floquet::{build_layout, LatticeSpec};
use crate::statevector::Statevector;

/// One Floquet period as a product of exact term exponentials, applied in
/// the order `B (even j), B (odd j), A (even j), A (odd j)`.
#[derive(Debug, Clone)]
pub struct FloquetEd {
    num_qubits: usize,
    terms: Vec<(Vec<usize>, DMatrix<C64>)>,
}

impl FloquetEd {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let layout = build_layout(spec);
        let budget = crate::statevector::qubit_budget();
        if layout.total_qubits() > budget {
            return Err(Error::Capacity {
                what: "Floquet-ED qubits",
                requested: layout.total_qubits(),
                limit: budget,
            });
        }
        let a = hopping_term_unitary(spec.j, spec.period);
        let b = bond_term_unitary(spec.h, spec.period);
        let parity_first = |sites: Vec<usize>| {
            let (even, odd): (Vec<usize>, Vec<usize>) = sites.into_iter().partition(|j| j % 2 == 0);
            even.into_iter().chain(odd)
        };
        let mut terms = Vec::new();
        for j in parity_first(spec.charge_sites()) {
            let qs = vec![layout.left_bond(j).unwrap(), layout.right_bond(j).unwrap()];
            terms.push((qs, b.clone()));
        }
        for j in parity_first(spec.hopping_sites()) {
            let qs = vec![layout.site_qubit(j), layout.bond_qubit(j), layout.site_qubit(layout.next_site(j))];
            terms.push((qs, a.clone()));
        }
        Ok(FloquetEd {
            num_qubits: layout.total_qubits(),
            terms,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn step(&self, psi: &mut Statevector) -> Result<()> {
        for (qs, m) in &self.terms {
            psi.apply_matrix(qs, m)?;
        }
        Ok(())
    }

    /// The state after `0, 1, ..., n_steps` periods.
    pub fn evolve(&self, init: &Statevector, n_steps: usize) -> Result<Vec<Statevector>> {
        if init.num_qubits() != self.num_qubits {
            return param(format!(
                "state has {} qubits, model has {}",
                init.num_qubits(),
                self.num_qubits
            ));
        }
        let mut out = Vec::with_capacity(n_steps + 1);
        let mut psi = init.clone();
        out.push(psi.clone());
        for _ in 0..n_steps {
            self.step(&mut psi)?;
            out.push(psi.clone());
        }
        Ok(out)
    }

    /// Dense one-period unitary.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        let limit = crate::circuit::MAX_UNITARY_QUBITS;
        if self.num_qubits > limit {
            return Err(Error::Capacity {
                what: "unitary qubits",
                requested: self.num_qubits,
                limit,
            });
        }
        let dim = 1 << self.num_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut psi = Statevector::basis(self.num_qubits, c)?;
            self.step(&mut psi)?;
            u.set_column(c, &nalgebra::DVector::from_column_slice(psi.amplitudes()));
        }
        Ok(u)
    }
}

pub fn evolve_floquet_ed(
    spec: &LatticeSpec,
    init: &Statevector,
    n_steps: usize,
) -> Result<Vec<Statevector>> {
    FloquetEd::new(spec)?.evolve(init, n_steps)
}

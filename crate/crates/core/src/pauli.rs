use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The three non-identity Paulis, in a fixed order.
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i & 3]
    }

    pub fn gate(self) -> Option<GateKind> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(GateKind::X),
            Pauli::Y => Some(GateKind::Y),
            Pauli::Z => Some(GateKind::Z),
        }
    }
}

/// Tensor product of Paulis on a subset of qubits; identity elsewhere.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    factors: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, qubit: usize, p: Pauli) -> Self {
        if p == Pauli::I {
            self.factors.remove(&qubit);
        } else {
            self.factors.insert(qubit, p);
        }
        self
    }

    pub fn z(qubit: usize) -> Self {
        Self::new().with(qubit, Pauli::Z)
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.factors.iter().map(|(&q, &p)| (q, p))
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    /// `(x_mask, z_mask, y_count)`: X/Y flip bits in `x_mask`, Y/Z pick up
    /// a sign from bits in `z_mask`.
    pub(crate) fn masks(&self) -> (usize, usize, u32) {
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (&q, &p) in &self.factors {
            match p {
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
                Pauli::I => {}
            }
        }
        (x, z, ny)
    }
}

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::hamiltonian::{build_dense_hamiltonian, DenseHamiltonian};
use crate::circuit::{GateKind, GateOp};
use crate::error::{param, Result};
use crate::floquet::LatticeSpec;
use crate::statevector::Statevector;

/// One connected block of the Hamiltonian in the bond-rotated basis.
#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

/// Full diagonalization of the spin Hamiltonian.
///
/// After a Hadamard on every bond qubit the B terms are diagonal and each
/// hop moves one fermion while flipping the bond it crosses. The
/// Hamiltonian then splits into real symmetric blocks, one per charge
/// sector and fermion number, which are diagonalized independently.
#[derive(Debug, Clone)]
pub struct ExactEvolver {
    hamiltonian: DenseHamiltonian,
    blocks: Vec<Block>,
}

impl ExactEvolver {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        let hamiltonian = build_dense_hamiltonian(spec)?;
        let n = hamiltonian.num_qubits();
        let dim = 1usize << n;
        let (jh, hb) = (spec.j, spec.h);
        let hops = hamiltonian.hops().to_vec();
        let pairs = hamiltonian.bond_pairs().to_vec();

        let diagonal = |r: usize| -> f64 {
            pairs
                .iter()
                .map(|&[a, b]| if (r >> a ^ r >> b) & 1 == 0 { hb } else { -hb })
                .sum()
        };
        let neighbours = |r: usize| {
            hops.iter()
                .filter(move |&&[a, _, c]| (r >> a & 1) != (r >> c & 1))
                .map(move |&[a, b, c]| r ^ (1 << a) ^ (1 << b) ^ (1 << c))
        };

        let mut block_of = vec![usize::MAX; dim];
        let mut blocks = Vec::new();
        for start in 0..dim {
            if block_of[start] != usize::MAX {
                continue;
            }
            let id = blocks.len();
            let mut indices = vec![start];
            block_of[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(r) = queue.pop_front() {
                for s in neighbours(r) {
                    if block_of[s] == usize::MAX {
                        block_of[s] = id;
                        indices.push(s);
                        queue.push_back(s);
                    }
                }
            }
            indices.sort_unstable();
            let m = indices.len();
            let mut hm = DMatrix::zeros(m, m);
            for (c, &r) in indices.iter().enumerate() {
                hm[(c, c)] = diagonal(r);
                for s in neighbours(r) {
                    let row = indices.binary_search(&s).expect("closed block");
                    hm[(row, c)] += -jh;
                }
            }
            let eig = hm.symmetric_eigen();
            blocks.push(Block {
                indices,
                energies: eig.eigenvalues,
                vectors: eig.eigenvectors,
            });
        }
        Ok(ExactEvolver { hamiltonian, blocks })
    }

    pub fn hamiltonian(&self) -> &DenseHamiltonian {
        &self.hamiltonian
    }

    /// Largest block dimension.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).max().unwrap_or(0)
    }

    /// All eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.blocks.iter().flat_map(|b| b.energies.iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn rotate_bonds(&self, psi: &mut Statevector) {
        for b in self.hamiltonian.layout().bond_qubits() {
            psi.apply_gate_unchecked(&GateOp::one(GateKind::H, b));
        }
    }

    /// `exp(-iHt)|psi>` for each `t` in `times`.
    pub fn evolve(&self, psi: &Statevector, times: &[f64]) -> Result<Vec<Statevector>> {
        let n = self.hamiltonian.num_qubits();
        if psi.num_qubits() != n {
            return param(format!("state has {} qubits, model has {n}", psi.num_qubits()));
        }
        let mut rotated = psi.clone();
        self.rotate_bonds(&mut rotated);
        let amps = rotated.amplitudes();

        // eigenbasis coefficients of the initial state, per block
        let coeffs: Vec<Vec<C64>> = self
            .blocks
            .iter()
            .map(|b| {
                (0..b.indices.len())
                    .map(|k| {
                        b.indices
                            .iter()
                            .enumerate()
                            .map(|(r, &i)| amps[i] * b.vectors[(r, k)])
                            .sum()
                    })
                    .collect()
            })
            .collect();

        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let mut next = vec![C64::new(0.0, 0.0); 1 << n];
            for (b, c) in self.blocks.iter().zip(&coeffs) {
                if c.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let phased: Vec<C64> = c
                    .iter()
                    .zip(b.energies.iter())
                    .map(|(z, &e)| z * C64::from_polar(1.0, -e * t))
                    .collect();
                for (r, &i) in b.indices.iter().enumerate() {
                    next[i] = phased
                        .iter()
                        .enumerate()
                        .map(|(k, z)| z * b.vectors[(r, k)])
                        .sum();
                }
            }
            let mut state = Statevector::from_amplitudes(n, next)?;
            self.rotate_bonds(&mut state);
            out.push(state);
        }
        Ok(out)
    }
}

/// Continuous-time evolution by full diagonalization.
pub fn evolve_continuous(
    spec: &LatticeSpec,
    init: &Statevector,
    times: &[f64],
) -> Result<Vec<Statevector>> {
    ExactEvolver::new(spec)?.evolve(init, times)
}

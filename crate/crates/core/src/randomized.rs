//! Rényi-2 entropy from randomized single-qubit measurements.
//!
//! For each of `n_u` random product unitaries `u = u_1 x ... x u_k` on the
//! kept qubits, `M` shots give outcome strings `s_1..s_M`. The purity is
//! estimated as
//!
//! ```text
//! X_u = 2^k / (M (M - 1)) sum_{a != b} (-2)^{-D(s_a, s_b)}
//! Tr rho_A^2 ~ mean_u X_u
//! ```
//!
//! with `D` the Hamming distance, which is unbiased for every `u` when the
//! `u_i` are Haar distributed. The entropy is `-log2` of the mean, with a
//! bootstrap error over unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng;
use crate::statevector::{Statevector, SubsystemCut};

/// Haar-random 2x2 unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary_2<R: Rng + ?Sized>(r: &mut R) -> DMatrix<C64> {
    let mut g = || C64::new(r.sample(StandardNormal), r.sample(StandardNormal));
    let (a, b, c, d) = (g(), g(), g(), g());
    let n0 = (a.norm_sqr() + c.norm_sqr()).sqrt();
    let (u0, u1) = (a / n0, c / n0);
    // second column: project out the first, then normalize
    let overlap = u0.conj() * b + u1.conj() * d;
    let (v0, v1) = (b - overlap * u0, d - overlap * u1);
    let n1 = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    DMatrix::from_row_slice(2, 2, &[u0, v0 / n1, u1, v1 / n1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiEstimate {
    pub entropy: f64,
    pub stderr: f64,
    pub purity: f64,
    pub n_unitaries: usize,
    pub shots: usize,
}

const BOOTSTRAP_RESAMPLES: usize = 400;

/// Randomized-measurement estimate of `S2` for the qubits of `cut`.
pub fn estimate_renyi2_randomized(
    state: &Statevector,
    cut: &SubsystemCut,
    n_unitaries: usize,
    shots: usize,
    seed: u64,
) -> Result<RenyiEstimate> {
    if n_unitaries < 2 {
        return param(format!("need at least 2 unitaries, got {n_unitaries}"));
    }
    if shots < 2 {
        return Err(Error::Statistics(format!("need at least 2 shots per unitary, got {shots}")));
    }
    let qubits = cut.qubits();
    let k = qubits.len();
    if k > 16 {
        return Err(Error::Capacity {
            what: "randomized-measurement subsystem qubits",
            requested: k,
            limit: 16,
        });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= state.num_qubits()) {
        return param(format!("qubit {q} outside the state"));
    }

    // weight (-2)^{-D} for every Hamming distance
    let weight: Vec<f64> = (0..=k).map(|d| (-0.5f64).powi(d as i32)).collect();
    let dim = 1usize << k;
    let label = rng::label("randomized-renyi");
    let mut per_unitary = Vec::with_capacity(n_unitaries);
    for u in 0..n_unitaries {
        let mut r = rng::stream(seed, label, u as u64);
        let mut psi = state.clone();
        for &q in qubits {
            psi.apply_matrix(&[q], &haar_unitary_2(&mut r))?;
        }
        let mut hist = vec![0u64; dim];
        for s in psi.sample_bitstrings(shots, &mut r) {
            let local = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (t, &q)| acc | ((s as usize >> q & 1) << t));
            hist[local] += 1;
        }
        let occupied: Vec<(usize, f64)> = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s, c as f64))
            .collect();
        let mut pair_sum = 0.0;
        for &(s, cs) in &occupied {
            for &(t, ct) in &occupied {
                pair_sum += cs * ct * weight[(s ^ t).count_ones() as usize];
            }
        }
        // drop the a == b terms
        pair_sum -= shots as f64;
        let m = shots as f64;
        per_unitary.push(dim as f64 * pair_sum / (m * (m - 1.0)));
    }

    let purity = per_unitary.iter().sum::<f64>() / n_unitaries as f64;
    if !(purity > 0.0) {
        return Err(Error::Statistics(format!(
            "estimated purity {purity} is not positive; increase the shot budget"
        )));
    }
    let mut r = rng::stream(seed, label ^ 1, 0);
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let p: f64 = (0..n_unitaries)
            .map(|_| per_unitary[r.random_range(0..n_unitaries)])
            .sum::<f64>()
            / n_unitaries as f64;
        if p > 0.0 {
            boot.push(-p.log2());
        }
    }
    if boot.len() < BOOTSTRAP_RESAMPLES / 2 {
        return Err(Error::Statistics("bootstrap purities mostly non-positive".into()));
    }
    let (_, sd) = crate::observables::mean_stderr(&boot);
    // mean_stderr divides by sqrt(n); the bootstrap spread is the raw deviation
    let stderr = sd * (boot.len() as f64).sqrt();
    Ok(RenyiEstimate {
        entropy: -purity.log2(),
        stderr,
        purity,
        n_unitaries,
        shots,
    })
}

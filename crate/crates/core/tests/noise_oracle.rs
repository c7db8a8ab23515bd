//! Trajectory averages against density-matrix evolution with depolarizing
//! channels after every gate.

mod common;

use common::{c, pauli_string};
use dfl_core::circuit::gate_matrix;
use dfl_core::noise::run_noisy;
use dfl_core::pauli::{Pauli, PauliString};
use dfl_core::{Circuit, GateKind, GateOp, NoiseModel, Statevector};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Embeds a gate acting on `qubits` (first qubit least significant) into `n` qubits.
fn embed(g: &DMatrix<C64>, qubits: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let li = qubits.iter().enumerate().fold(0, |a, (t, &q)| a | ((col >> q & 1) << t));
        let rest = qubits.iter().fold(col, |a, &q| a & !(1 << q));
        for lo in 0..1usize << qubits.len() {
            let row = qubits.iter().enumerate().fold(rest, |a, (t, &q)| a | ((lo >> t & 1) << q));
            out[(row, col)] = g[(lo, li)];
        }
    }
    out
}

fn depolarize(rho: &DMatrix<C64>, qubits: &[usize], p: f64, n: usize) -> DMatrix<C64> {
    let letters = ['I', 'X', 'Y', 'Z'];
    let k = qubits.len();
    let count = 4usize.pow(k as u32) - 1;
    let mut out = rho * c(1.0 - p, 0.0);
    for idx in 1..=count {
        let ops: Vec<(usize, char)> = qubits.iter().enumerate().map(|(t, &q)| (q, letters[idx >> (2 * t) & 3])).collect();
        let m = pauli_string(n, &ops);
        out += &m * rho * &m * c(p / count as f64, 0.0);
    }
    out
}

fn channel_oracle(circuit: &Circuit, model: &NoiseModel) -> DMatrix<C64> {
    let n = circuit.num_qubits();
    let mut rho = DMatrix::<C64>::zeros(1 << n, 1 << n);
    rho[(0, 0)] = c(1.0, 0.0);
    for op in circuit.ops() {
        let u = embed(&gate_matrix(op.kind), &op.qubits, n);
        rho = &u * rho * u.adjoint();
        let p = if op.is_two_qubit() { model.p2 } else { model.p1 };
        rho = depolarize(&rho, &op.qubits, p, n);
    }
    rho
}

#[test]
fn trajectory_average_matches_channel() {
    let mut circ = Circuit::new(3);
    for op in [
        GateOp::one(GateKind::H, 0),
        GateOp::two(GateKind::Cnot, 0, 1),
        GateOp::one(GateKind::Ry(0.7), 2),
        GateOp::two(GateKind::SqrtIswap, 1, 2),
        GateOp::two(GateKind::Cz, 0, 2),
        GateOp::one(GateKind::Rx(1.1), 1),
    ] {
        circ.push(op).unwrap();
    }
    let model = NoiseModel::new(0.03, 0.15, 17).unwrap();
    let rho = channel_oracle(&circ, &model);
    let observables: Vec<(PauliString, Vec<(usize, char)>)> = vec![
        (PauliString::z(0), vec![(0, 'Z')]),
        (PauliString::z(2), vec![(2, 'Z')]),
        (PauliString::new().with(0, Pauli::X).with(1, Pauli::X), vec![(0, 'X'), (1, 'X')]),
        (PauliString::new().with(1, Pauli::Y).with(2, Pauli::Z), vec![(1, 'Y'), (2, 'Z')]),
    ];
    let strings: Vec<PauliString> = observables.iter().map(|(p, _)| p.clone()).collect();
    let batch = run_noisy(&circ, &Statevector::zero(3).unwrap(), &model, &strings, 20_000).unwrap();
    for ((_, ops), (m, e)) in observables.iter().zip(batch.means.iter().zip(&batch.stderr)) {
        let exact = (&rho * pauli_string(3, ops)).trace().re;
        assert!((m - exact).abs() < 4.0 * e + 1e-12, "{ops:?}: trajectories {m} +/- {e}, channel {exact}");
    }
    // the noise is strong enough to matter
    let ideal = channel_oracle(&circ, &NoiseModel::ideal(0));
    let zi = (&ideal * pauli_string(3, &[(0, 'X'), (1, 'X')])).trace().re;
    let zn = (&rho * pauli_string(3, &[(0, 'X'), (1, 'X')])).trace().re;
    assert!((zi - zn).abs() > 0.05, "{zi} vs {zn}");
}

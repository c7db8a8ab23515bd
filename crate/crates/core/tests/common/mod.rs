//! Dense matrices built directly from Pauli products.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli(p: char) -> DMatrix<C64> {
    let (o, i) = (c(0.0, 0.0), c(1.0, 0.0));
    match p {
        'I' => DMatrix::from_row_slice(2, 2, &[i, o, o, i]),
        'X' => DMatrix::from_row_slice(2, 2, &[o, i, i, o]),
        'Y' => DMatrix::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        'Z' => DMatrix::from_row_slice(2, 2, &[i, o, o, -i]),
        _ => panic!("not a Pauli letter: {p}"),
    }
}

/// Pauli string on `n` qubits from `(qubit, letter)` pairs; qubit 0 is the
/// least significant bit.
pub fn pauli_string(n: usize, ops: &[(usize, char)]) -> DMatrix<C64> {
    (0..n).rev().fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, q| {
        let p = ops.iter().find(|(k, _)| *k == q).map_or('I', |(_, p)| *p);
        acc.kronecker(&pauli(p))
    })
}

/// `sz_b (S+_j S-_k + h.c.)` on `n` qubits.
pub fn hopping(n: usize, sj: usize, b: usize, sk: usize) -> DMatrix<C64> {
    (pauli_string(n, &[(sj, 'X'), (b, 'Z'), (sk, 'X')]) + pauli_string(n, &[(sj, 'Y'), (b, 'Z'), (sk, 'Y')])) * c(0.5, 0.0)
}

/// `min_phi |a - e^{i phi} b|_F`.
pub fn phase_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    (a - b * phase).norm()
}

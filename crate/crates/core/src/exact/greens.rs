use num_complex::Complex64 as C64;

use super::ed::ExactEvolver;
use crate::error::{param, Error, Result};
use crate::floquet::{build_layout, LatticeSpec, QubitLayout};
use crate::statevector::Statevector;

pub const MAX_GREENS_QUBITS: usize = 14;

/// `f_k |psi>` with the Jordan-Wigner string over sites `1..k`.
fn annihilate(layout: &QubitLayout, k: usize, psi: &Statevector) -> Result<Statevector> {
    let q = layout.site_qubit(k);
    let string: usize = (1..k).map(|i| 1usize << layout.site_qubit(i)).sum();
    let mut out = vec![C64::new(0.0, 0.0); psi.amplitudes().len()];
    for (i, &a) in psi.amplitudes().iter().enumerate() {
        if i >> q & 1 == 1 {
            let sign = if (i & string).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            out[i ^ (1 << q)] = a * sign;
        }
    }
    Statevector::from_amplitudes(psi.num_qubits(), out)
}

/// `G_jk(t) = <psi| e^{iHt} f+_j e^{-iHt} f_k |psi>` at each time.
pub fn greens_function_ed(
    spec: &LatticeSpec,
    init: &Statevector,
    j: usize,
    k: usize,
    times: &[f64],
) -> Result<Vec<C64>> {
    let layout = build_layout(spec);
    let n = layout.total_qubits();
    if n > MAX_GREENS_QUBITS {
        return Err(Error::Capacity {
            what: "Green's function qubits",
            requested: n,
            limit: MAX_GREENS_QUBITS,
        });
    }
    for s in [j, k] {
        if !(1..=spec.sites).contains(&s) {
            return param(format!("site {s} out of range"));
        }
    }
    let ed = ExactEvolver::new(spec)?;
    let removed = annihilate(&layout, k, init)?;
    let left = ed.evolve(init, times)?;
    let right = ed.evolve(&removed, times)?;
    left.iter()
        .zip(&right)
        .map(|(a, b)| Ok(annihilate(&layout, j, a)?.inner(b)))
        .collect()
}

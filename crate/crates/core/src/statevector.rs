//! Dense ideal statevector simulation.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::circuit::{Circuit, GateKind, GateMatrix, GateOp};
use crate::error::{param, Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Default memory budget: 2^24 amplitudes.
pub const DEFAULT_MAX_QUBITS: usize = 24;

static MAX_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUBITS);

/// Sets the process-wide statevector width limit.
pub fn set_qubit_budget(max_qubits: usize) {
    MAX_QUBITS.store(max_qubits.min(40), Ordering::Relaxed);
}

pub fn qubit_budget() -> usize {
    MAX_QUBITS.load(Ordering::Relaxed)
}

/// Computational-basis measurement outcome; bit `q` is qubit `q`.
pub type Bitstring = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
}

impl Statevector {
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_width(n)?;
        if index >> n != 0 {
            return param(format!("basis index {index} out of range for {n} qubits"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Statevector { n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_width(n)?;
        if amps.len() != 1 << n {
            return param(format!("{} amplitudes for {n} qubits", amps.len()));
        }
        Ok(Statevector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply_gate(&mut self, op: &GateOp) -> Result<()> {
        if let Some(&q) = op.qubits.iter().find(|&&q| q >= self.n) {
            return param(format!("qubit {q} out of range for {} qubits", self.n));
        }
        self.apply_gate_unchecked(op);
        Ok(())
    }

    pub(crate) fn apply_gate_unchecked(&mut self, op: &GateOp) {
        let q = &op.qubits;
        match op.kind {
            GateKind::X => self.apply_x(q[0]),
            GateKind::Z => self.apply_phase(q[0], C64::new(-1.0, 0.0)),
            GateKind::S => self.apply_phase(q[0], C64::new(0.0, 1.0)),
            GateKind::Sdg => self.apply_phase(q[0], C64::new(0.0, -1.0)),
            GateKind::Cnot => self.apply_cnot(q[0], q[1]),
            GateKind::Cz => self.apply_cz(q[0], q[1]),
            kind => match kind.matrix() {
                GateMatrix::One(m) => self.apply_1q(q[0], &m),
                GateMatrix::Two(m) => self.apply_2q(q[0], q[1], &m),
            },
        }
    }

    pub fn apply_pauli(&mut self, qubit: usize, p: Pauli) {
        if let Some(kind) = p.gate() {
            self.apply_gate_unchecked(&GateOp::one(kind, qubit));
        }
    }

    pub fn run_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.num_qubits() > self.n {
            return param(format!(
                "{}-qubit circuit on a {}-qubit state",
                c.num_qubits(),
                self.n
            ));
        }
        for op in c.ops() {
            self.apply_gate_unchecked(op);
        }
        Ok(())
    }

    fn apply_x(&mut self, q: usize) {
        let m = 1usize << q;
        for base in (0..self.amps.len()).step_by(2 * m) {
            for i in base..base + m {
                self.amps.swap(i, i | m);
            }
        }
    }

    fn apply_phase(&mut self, q: usize, phase: C64) {
        let m = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= phase;
            }
        }
    }

    fn apply_cnot(&mut self, c: usize, t: usize) {
        let (cm, tm) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *amp = -*amp;
            }
        }
    }

    fn apply_1q(&mut self, q: usize, m: &[[C64; 2]; 2]) {
        let mask = 1usize << q;
        for base in (0..self.amps.len()).step_by(2 * mask) {
            for i in base..base + mask {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_2q(&mut self, q0: usize, q1: usize, m: &[[C64; 4]; 4]) {
        let (m0, m1) = (1usize << q0, 1usize << q1);
        let idx = [0, m0, m1, m0 | m1];
        for i in 0..self.amps.len() {
            if i & (m0 | m1) != 0 {
                continue;
            }
            let a = idx.map(|o| self.amps[i | o]);
            for r in 0..4 {
                self.amps[i | idx[r]] = m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
            }
        }
    }

    /// Applies a dense `2^k x 2^k` unitary on `qubits` (local bit `t` is
    /// `qubits[t]`). Zero matrix entries are skipped.
    pub fn apply_matrix(&mut self, qubits: &[usize], m: &DMatrix<C64>) -> Result<()> {
        let k = qubits.len();
        let dim = 1usize << k;
        if m.nrows() != dim || m.ncols() != dim {
            return param(format!("{}x{} matrix on {k} qubits", m.nrows(), m.ncols()));
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n) {
            return param(format!("qubit {q} out of range for {} qubits", self.n));
        }
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return param("repeated qubit in apply_matrix");
        }
        let offsets: Vec<usize> = (0..dim)
            .map(|l| (0..k).filter(|t| l >> t & 1 == 1).map(|t| 1usize << qubits[t]).sum())
            .collect();
        let rows: Vec<Vec<(usize, C64)>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .filter(|&c| m[(r, c)] != C64::new(0.0, 0.0))
                    .map(|c| (c, m[(r, c)]))
                    .collect()
            })
            .collect();
        let mut local = vec![C64::new(0.0, 0.0); dim];
        for c in 0..(self.amps.len() >> k) {
            let mut base = c;
            for &p in &sorted {
                base = ((base >> p) << (p + 1)) | (base & ((1 << p) - 1));
            }
            for (l, o) in offsets.iter().enumerate() {
                local[l] = self.amps[base | o];
            }
            for (r, row) in rows.iter().enumerate() {
                self.amps[base | offsets[r]] = row.iter().map(|&(c, v)| v * local[c]).sum();
            }
        }
        Ok(())
    }

    pub fn expect_z(&self, qubit: usize) -> f64 {
        let m = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `<psi|P|psi>`; the imaginary part vanishes for Hermitian `P`.
    pub fn expect_pauli_string(&self, p: &PauliString) -> Result<f64> {
        if let Some(q) = p.max_qubit().filter(|&q| q >= self.n) {
            return param(format!("Pauli string on qubit {q} of a {}-qubit state", self.n));
        }
        let (x, z, ny) = p.masks();
        let global = match ny % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let total: C64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let sign = if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                self.amps[i ^ x].conj() * a * sign
            })
            .sum();
        Ok((global * total).re)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// I.i.d. computational-basis samples from `|amps|^2`.
    pub fn sample_bitstrings<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Vec<Bitstring> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        (0..shots)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                i as Bitstring
            })
            .collect()
    }

    /// Second Renyi entropy `-log2 Tr rho_A^2` of the kept subsystem.
    pub fn renyi2(&self, cut: &SubsystemCut) -> Result<f64> {
        Ok(-self.purity(cut, 0)?.log2())
    }

    /// Same as [`Statevector::renyi2`], exploiting a conserved occupation
    /// number on the qubits of `conserved_mask`: when the state has a single
    /// value of that number, `rho_A` is block diagonal in its restriction to A.
    pub fn renyi2_conserving(&self, cut: &SubsystemCut, conserved_mask: usize) -> Result<f64> {
        Ok(-self.purity(cut, conserved_mask)?.log2())
    }

    pub fn purity(&self, cut: &SubsystemCut, conserved_mask: usize) -> Result<f64> {
        cut.check(self.n)?;
        let a_q = &cut.qubits;
        let b_q: Vec<usize> = (0..self.n).filter(|q| !a_q.contains(q)).collect();
        let max_rows = 1usize << a_q.len().min(b_q.len());
        if max_rows > 1 << 14 {
            return Err(Error::Capacity {
                what: "reduced density matrix rows",
                requested: max_rows,
                limit: 1 << 14,
            });
        }

        // Single conserved count across the support? Otherwise one dense block.
        let mut total = None;
        let mut blocked = conserved_mask != 0;
        if blocked {
            for (i, a) in self.amps.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let k = (i & conserved_mask).count_ones();
                match total {
                    None => total = Some(k),
                    Some(t) if t != k => {
                        blocked = false;
                        break;
                    }
                    _ => {}
                }
            }
        }
        let cmask = if blocked { conserved_mask } else { 0 };

        let (a_rank, a_sector, a_sizes) = local_ranks(a_q, cmask);
        let (b_rank, b_sector, b_sizes) = local_ranks(&b_q, cmask);
        let total = if blocked { total.unwrap_or(0) as usize } else { 0 };
        // block k pairs A-sector k with B-sector total - k
        let mut blocks: Vec<Option<Block>> = a_sizes
            .iter()
            .enumerate()
            .map(|(k, &rows)| {
                let cols = *b_sizes.get(total.checked_sub(k)?)?;
                Some(Block::new(rows, cols))
            })
            .collect();

        for (i, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let a = gather_bits(i, a_q);
            let b = gather_bits(i, &b_q);
            let k = if blocked { a_sector[a] as usize } else { 0 };
            debug_assert!(!blocked || a_sector[a] as usize + b_sector[b] as usize == total);
            if let Some(Some(block)) = blocks.get_mut(k) {
                block.set(a_rank[a], b_rank[b], *amp);
            }
        }
        Ok(blocks.into_iter().flatten().map(|b| b.purity()).sum())
    }
}

fn check_width(n: usize) -> Result<()> {
    let limit = qubit_budget();
    if n > limit {
        return Err(Error::Capacity {
            what: "statevector width",
            requested: n,
            limit,
        });
    }
    Ok(())
}

fn gather_bits(i: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (t, &q)| acc | (((i >> q) & 1) << t))
}

/// For each local index: rank within its conserved-count sector, the sector,
/// and the sector sizes.
fn local_ranks(qubits: &[usize], cmask: usize) -> (Vec<usize>, Vec<u32>, Vec<usize>) {
    let local_mask: usize = qubits
        .iter()
        .enumerate()
        .filter(|(_, &q)| cmask >> q & 1 == 1)
        .map(|(t, _)| 1usize << t)
        .sum();
    let n_cons = local_mask.count_ones() as usize;
    let mut sizes = vec![0usize; n_cons + 1];
    let dim = 1usize << qubits.len();
    let mut rank = Vec::with_capacity(dim);
    let mut sector = Vec::with_capacity(dim);
    for l in 0..dim {
        let k = (l & local_mask).count_ones();
        rank.push(sizes[k as usize]);
        sizes[k as usize] += 1;
        sector.push(k);
    }
    (rank, sector, sizes)
}

/// One block of the amplitude matrix, stored with the shorter side as rows.
struct Block {
    transposed: bool,
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Block {
    fn new(a_rows: usize, b_cols: usize) -> Self {
        let transposed = a_rows > b_cols;
        let (rows, cols) = if transposed { (b_cols, a_rows) } else { (a_rows, b_cols) };
        Block {
            transposed,
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    fn set(&mut self, a: usize, b: usize, v: C64) {
        let (r, c) = if self.transposed { (b, a) } else { (a, b) };
        self.data[r * self.cols + c] = v;
    }

    /// `||M M^dag||_F^2`, equal to `||M^dag M||_F^2`.
    fn purity(&self) -> f64 {
        let row = |r: usize| &self.data[r * self.cols..(r + 1) * self.cols];
        let mut p = 0.0;
        for i in 0..self.rows {
            let ri = row(i);
            for j in i..self.rows {
                let rj = row(j);
                let (mut re, mut im) = (0.0, 0.0);
                for (x, y) in ri.iter().zip(rj) {
                    // x * conj(y)
                    re += x.re * y.re + x.im * y.im;
                    im += x.im * y.re - x.re * y.im;
                }
                let g = re * re + im * im;
                p += if i == j { g } else { 2.0 * g };
            }
        }
        p
    }
}

/// Qubits kept in a bipartition (subsystem A).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemCut {
    qubits: Vec<usize>,
}

impl SubsystemCut {
    pub fn new(mut qubits: Vec<usize>) -> Result<Self> {
        qubits.sort_unstable();
        qubits.dedup();
        if qubits.is_empty() {
            return param("subsystem must be nonempty");
        }
        Ok(SubsystemCut { qubits })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn complement(&self, n: usize) -> Result<SubsystemCut> {
        SubsystemCut::new((0..n).filter(|q| !self.qubits.contains(q)).collect())
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.qubits.iter().any(|&q| q >= n) || self.qubits.len() >= n {
            return param(format!(
                "cut {:?} is not a proper subset of {n} qubits",
                self.qubits
            ));
        }
        Ok(())
    }
}

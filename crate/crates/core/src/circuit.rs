//! Gate set, circuit IR, layer scheduling and dense unitary extraction.
//!
//! Qubit 0 is the least-significant bit of a basis-state index. For a
//! two-qubit gate acting on `[q0, q1]` the local 4x4 matrix is indexed by
//! `bit(q0) + 2 * bit(q1)`; for `CNOT` and `CZ` the first qubit is the control.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::statevector::Statevector;

/// Largest width accepted by [`circuit_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    /// Adjoint of `S`; needed to invert compiled circuits gate by gate.
    Sdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
    Iswap,
    SqrtIswap,
    SqrtIswapDag,
}

/// Dense matrix of a single gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One([[C64; 2]; 2]),
    Two([[C64; 4]; 4]),
}

impl GateMatrix {
    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        match self {
            GateMatrix::One(m) => DMatrix::from_fn(2, 2, |r, c| m[r][c]),
            GateMatrix::Two(m) => DMatrix::from_fn(4, 4, |r, c| m[r][c]),
        }
    }
}

impl GateKind {
    /// Builds a gate from its text name and angle list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let kind = match name {
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "SDG" => GateKind::Sdg,
            "RX" | "RY" | "RZ" => {
                let [theta] = params else {
                    return param(format!("{name} takes exactly one angle, got {}", params.len()));
                };
                return Ok(match name {
                    "RX" => GateKind::Rx(*theta),
                    "RY" => GateKind::Ry(*theta),
                    _ => GateKind::Rz(*theta),
                });
            }
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "ISWAP" => GateKind::Iswap,
            "SQRT_ISWAP" => GateKind::SqrtIswap,
            "SQRT_ISWAP_DAG" => GateKind::SqrtIswapDag,
            other => return param(format!("unknown gate kind `{other}`")),
        };
        if !params.is_empty() {
            return param(format!("{name} takes no angle, got {}", params.len()));
        }
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Iswap => "ISWAP",
            GateKind::SqrtIswap => "SQRT_ISWAP",
            GateKind::SqrtIswapDag => "SQRT_ISWAP_DAG",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) => Some(t),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot
            | GateKind::Cz
            | GateKind::Iswap
            | GateKind::SqrtIswap
            | GateKind::SqrtIswapDag => 2,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match *self {
            GateKind::X => GateMatrix::One([[ZERO, ONE], [ONE, ZERO]]),
            GateKind::Y => GateMatrix::One([[ZERO, -I], [I, ZERO]]),
            GateKind::Z => GateMatrix::One([[ONE, ZERO], [ZERO, -ONE]]),
            GateKind::H => GateMatrix::One([[h, h], [h, -h]]),
            GateKind::S => GateMatrix::One([[ONE, ZERO], [ZERO, I]]),
            GateKind::Sdg => GateMatrix::One([[ONE, ZERO], [ZERO, -I]]),
            GateKind::Rx(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let (c, ms) = (C64::new(c, 0.0), C64::new(0.0, -s));
                GateMatrix::One([[c, ms], [ms, c]])
            }
            GateKind::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let (c, s) = (C64::new(c, 0.0), C64::new(s, 0.0));
                GateMatrix::One([[c, -s], [s, c]])
            }
            GateKind::Rz(t) => GateMatrix::One([
                [C64::from_polar(1.0, -t / 2.0), ZERO],
                [ZERO, C64::from_polar(1.0, t / 2.0)],
            ]),
            GateKind::Cnot => GateMatrix::Two([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ZERO, ZERO, ONE],
                [ZERO, ZERO, ONE, ZERO],
                [ZERO, ONE, ZERO, ZERO],
            ]),
            GateKind::Cz => GateMatrix::Two([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ONE, ZERO, ZERO],
                [ZERO, ZERO, ONE, ZERO],
                [ZERO, ZERO, ZERO, -ONE],
            ]),
            GateKind::Iswap => GateMatrix::Two([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ZERO, I, ZERO],
                [ZERO, I, ZERO, ZERO],
                [ZERO, ZERO, ZERO, ONE],
            ]),
            GateKind::SqrtIswap | GateKind::SqrtIswapDag => {
                let off = if *self == GateKind::SqrtIswap {
                    C64::new(0.0, FRAC_1_SQRT_2)
                } else {
                    C64::new(0.0, -FRAC_1_SQRT_2)
                };
                GateMatrix::Two([
                    [ONE, ZERO, ZERO, ZERO],
                    [ZERO, h, off, ZERO],
                    [ZERO, off, h, ZERO],
                    [ZERO, ZERO, ZERO, ONE],
                ])
            }
        }
    }
}

/// Dense unitary of `kind`, 2x2 or 4x4.
pub fn gate_matrix(kind: GateKind) -> DMatrix<C64> {
    kind.matrix().to_dmatrix()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateOp {
    /// Checks arity and distinctness; width is checked when the op is pushed
    /// into a circuit.
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return param(format!(
                "{} acts on {} qubit(s), got {}",
                kind.name(),
                kind.arity(),
                qubits.len()
            ));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return param(format!("{} on repeated qubit {}", kind.name(), qubits[0]));
        }
        Ok(GateOp { kind, qubits })
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        GateOp { kind, qubits: vec![q] }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        debug_assert_ne!(a, b);
        GateOp { kind, qubits: vec![a, b] }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    /// Ops whose product (in circuit order) is the adjoint of this op.
    pub fn adjoint(&self) -> Vec<GateOp> {
        let q = &self.qubits;
        let k = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::SqrtIswap => GateKind::SqrtIswapDag,
            GateKind::SqrtIswapDag => GateKind::SqrtIswap,
            // iSWAP^dag = (Z x Z) iSWAP
            GateKind::Iswap => {
                return vec![
                    self.clone(),
                    GateOp::one(GateKind::Z, q[0]),
                    GateOp::one(GateKind::Z, q[1]),
                ]
            }
            k => k,
        };
        vec![GateOp { kind: k, qubits: q.clone() }]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
    /// Layer index per op, present after [`schedule_layers`].
    layer_tags: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            ops: Vec::new(),
            layer_tags: None,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn layer_tags(&self) -> Option<&[usize]> {
        self.layer_tags.as_deref()
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        if let Some(&q) = op.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return param(format!(
                "qubit {q} out of range for a {}-qubit circuit",
                self.num_qubits
            ));
        }
        let op = GateOp::new(op.kind, op.qubits)?;
        self.ops.push(op);
        self.layer_tags = None;
        Ok(())
    }

    pub fn gate(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self> {
        self.push(GateOp::new(kind, qubits.to_vec())?)?;
        Ok(self)
    }

    /// Appends all ops of `other` (same width required).
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return param(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.num_qubits, self.num_qubits
            ));
        }
        self.ops.extend(other.ops.iter().cloned());
        self.layer_tags = None;
        Ok(())
    }

    /// `n` back-to-back copies of this circuit.
    pub fn repeated(&self, n: usize) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for _ in 0..n {
            out.ops.extend(self.ops.iter().cloned());
        }
        out
    }

    /// Gate-by-gate adjoint, reversed.
    pub fn inverse(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for op in self.ops.iter().rev() {
            out.ops.extend(op.adjoint());
        }
        out
    }

    /// Rewrites every CNOT as H(target) CZ H(target).
    pub fn with_cz_entanglers(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for op in &self.ops {
            if op.kind == GateKind::Cnot {
                let (c, t) = (op.qubits[0], op.qubits[1]);
                out.ops.push(GateOp::one(GateKind::H, t));
                out.ops.push(GateOp::two(GateKind::Cz, c, t));
                out.ops.push(GateOp::one(GateKind::H, t));
            } else {
                out.ops.push(op.clone());
            }
        }
        out
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_two_qubit()).count()
    }

    /// Gate counts keyed by gate name.
    pub fn gate_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for op in &self.ops {
            *counts.entry(op.kind.name()).or_insert(0) += 1;
        }
        counts
    }

    /// Ops grouped by layer. Computes an ASAP schedule if none is stored.
    pub fn layers(&self) -> Vec<Vec<&GateOp>> {
        let tags = match &self.layer_tags {
            Some(t) => t.clone(),
            None => asap_tags(&self.ops),
        };
        let depth = tags.iter().map(|&t| t + 1).max().unwrap_or(0);
        let mut layers = vec![Vec::new(); depth];
        for (op, &t) in self.ops.iter().zip(&tags) {
            layers[t].push(op);
        }
        layers
    }

    pub fn depth(&self) -> usize {
        self.layers().len()
    }

    /// Number of layers holding at least one two-qubit gate.
    pub fn two_qubit_layer_count(&self) -> usize {
        self.layers()
            .iter()
            .filter(|layer| layer.iter().any(|op| op.is_two_qubit()))
            .count()
    }

    /// ASAP depth counting only two-qubit gates, i.e. treating interleaved
    /// single-qubit gates as free.
    pub fn two_qubit_depth(&self) -> usize {
        let two: Vec<GateOp> = self.ops.iter().filter(|o| o.is_two_qubit()).cloned().collect();
        asap_tags(&two)
            .into_iter()
            .map(|t| t + 1)
            .max()
            .unwrap_or(0)
    }

    /// Line-oriented text form: `qubits N` followed by one `KIND q0 [q1] [angle]` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "qubits {}", self.num_qubits).unwrap();
        for op in &self.ops {
            s.push_str(op.kind.name());
            for q in &op.qubits {
                write!(s, " {q}").unwrap();
            }
            if let Some(theta) = op.kind.angle() {
                // `{:?}` prints the shortest representation that round-trips.
                write!(s, " {theta:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `qubits N` header".into(),
        })?;
        let n = header
            .strip_prefix("qubits ")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `qubits N`, got `{header}`"),
            })?;
        let mut c = Circuit::new(n);
        for (line, l) in lines {
            let perr = |message: String| Error::Parse { line, message };
            let mut fields = l.split_whitespace();
            let name = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let arity = GateKind::from_name(name, &[])
                .or_else(|_| GateKind::from_name(name, &[0.0]))
                .map_err(|e| perr(e.to_string()))?
                .arity();
            if rest.len() < arity {
                return Err(perr(format!("{name} needs {arity} qubit(s)")));
            }
            let qubits = rest[..arity]
                .iter()
                .map(|q| q.parse::<usize>().map_err(|e| perr(format!("bad qubit `{q}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let params = rest[arity..]
                .iter()
                .map(|p| p.parse::<f64>().map_err(|e| perr(format!("bad angle `{p}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let kind = GateKind::from_name(name, &params).map_err(|e| perr(e.to_string()))?;
            c.push(GateOp::new(kind, qubits).map_err(|e| perr(e.to_string()))?)
                .map_err(|e| perr(e.to_string()))?;
        }
        Ok(c)
    }
}

fn asap_tags(ops: &[GateOp]) -> Vec<usize> {
    let mut front: Vec<usize> = Vec::new();
    ops.iter()
        .map(|op| {
            let top = op.qubits.iter().map(|&q| *front.get(q).unwrap_or(&0)).max().unwrap_or(0);
            for &q in &op.qubits {
                if front.len() <= q {
                    front.resize(q + 1, 0);
                }
                front[q] = top + 1;
            }
            top
        })
        .collect()
}

/// Greedy as-soon-as-possible layering. Ops are reordered layer by layer;
/// the order of ops touching any given qubit is unchanged.
pub fn schedule_layers(c: &Circuit) -> Circuit {
    let tags = asap_tags(&c.ops);
    let mut order: Vec<usize> = (0..c.ops.len()).collect();
    order.sort_by_key(|&i| tags[i]);
    Circuit {
        num_qubits: c.num_qubits,
        ops: order.iter().map(|&i| c.ops[i].clone()).collect(),
        layer_tags: Some(order.iter().map(|&i| tags[i]).collect()),
    }
}

/// Ordered product of the embedded gate unitaries, column by column.
pub fn circuit_unitary(c: &Circuit) -> Result<DMatrix<C64>> {
    let n = c.num_qubits;
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::Capacity {
            what: "circuit_unitary width",
            requested: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = Statevector::basis(n, col)?;
        psi.run_circuit(c)?;
        u.column_mut(col).copy_from_slice(psi.amplitudes());
    }
    Ok(u)
}

/// `min_phi || a - e^{i phi} b ||_F`.
pub fn phase_insensitive_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn equivalent_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
    phase_insensitive_distance(a, b) <= tol
}

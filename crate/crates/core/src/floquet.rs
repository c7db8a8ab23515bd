//! Qubit layout, state preparation and the Floquet-period circuit of the
//! Z2 fermion/bond-spin chain.
//!
//! Sites are numbered `1..=L`. Qubits interleave site and bond spins:
//! `site 1, bond(1,2), site 2, bond(2,3), ...`, with a closing bond `(L,1)`
//! as the last qubit for periodic chains. An occupied site is qubit `|1>`;
//! a bond spin pointing up along z is qubit `|0>`.
//!
//! One period is `U(T) = prod_{odd} A_j prod_{even} A_j prod_{odd} B_j prod_{even} B_j`
//! with
//!
//! ```text
//! A_j = exp(+i J T sz_{j,j+1} (S+_j S-_{j+1} + h.c.))
//! B_j = exp(-i h T sx_{j-1,j} sx_{j,j+1})
//! ```
//!
//! so in circuit time order the even-`j` B terms come first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{schedule_layers, Circuit, GateKind, GateOp};
use crate::error::{param, Result};
use crate::statevector::Statevector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Number of fermion sites.
    pub sites: usize,
    pub boundary: Boundary,
    /// Hopping energy.
    pub j: f64,
    /// Bond-spin coupling.
    pub h: f64,
    /// Floquet period, in units of 1/J.
    pub period: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, boundary: Boundary, j: f64, h: f64, period: f64) -> Result<Self> {
        let spec = LatticeSpec {
            sites,
            boundary,
            j,
            h,
            period,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Open chain with the given couplings.
    pub fn open(sites: usize, j: f64, h: f64, period: f64) -> Result<Self> {
        Self::new(sites, Boundary::Open, j, h, period)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return param(format!("need at least 2 sites, got {}", self.sites));
        }
        if !(self.j > 0.0) {
            return param(format!("J must be positive, got {}", self.j));
        }
        if !(self.period > 0.0) {
            return param(format!("period must be positive, got {}", self.period));
        }
        if !(self.h >= 0.0) {
            return param(format!("h must be non-negative, got {}", self.h));
        }
        Ok(())
    }

    pub fn with_period(self, period: f64) -> Self {
        LatticeSpec { period, ..self }
    }

    pub fn with_h(self, h: f64) -> Self {
        LatticeSpec { h, ..self }
    }

    pub fn bond_count(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.sites - 1,
            Boundary::Periodic => self.sites,
        }
    }

    /// Sites carrying a conserved charge and a B term: bulk sites for open
    /// chains, every site for periodic ones.
    pub fn charge_sites(&self) -> Vec<usize> {
        match self.boundary {
            Boundary::Open => (2..self.sites).collect(),
            Boundary::Periodic => (1..=self.sites).collect(),
        }
    }

    /// Left sites `j` of the hopping bonds `(j, j+1)`; `(L, 1)` closes a ring.
    pub fn hopping_sites(&self) -> Vec<usize> {
        (1..=self.bond_count()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    sites: usize,
    boundary: Boundary,
}

impl QubitLayout {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Qubit of site `j` (1-based).
    pub fn site_qubit(&self, j: usize) -> usize {
        debug_assert!((1..=self.sites).contains(&j));
        2 * (j - 1)
    }

    /// Qubit of bond `(j, j+1)`; for periodic chains `j = L` is the closing bond.
    pub fn bond_qubit(&self, j: usize) -> usize {
        debug_assert!((1..=self.bond_count()).contains(&j));
        2 * (j - 1) + 1
    }

    /// Bond to the left of site `j`, if any.
    pub fn left_bond(&self, j: usize) -> Option<usize> {
        match (j, self.boundary) {
            (1, Boundary::Open) => None,
            (1, Boundary::Periodic) => Some(self.bond_qubit(self.sites)),
            _ => Some(self.bond_qubit(j - 1)),
        }
    }

    /// Bond to the right of site `j`, if any.
    pub fn right_bond(&self, j: usize) -> Option<usize> {
        (j <= self.bond_count()).then(|| self.bond_qubit(j))
    }

    /// Site to the right of site `j` along bond `(j, j+1)`.
    pub fn next_site(&self, j: usize) -> usize {
        if j == self.sites {
            1
        } else {
            j + 1
        }
    }

    pub fn bond_count(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.sites - 1,
            Boundary::Periodic => self.sites,
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.sites + self.bond_count()
    }

    /// Bit mask of all site qubits.
    pub fn site_mask(&self) -> usize {
        (1..=self.sites).map(|j| 1usize << self.site_qubit(j)).sum()
    }

    pub fn bond_qubits(&self) -> Vec<usize> {
        (1..=self.bond_count()).map(|b| self.bond_qubit(b)).collect()
    }
}

pub fn build_layout(spec: &LatticeSpec) -> QubitLayout {
    QubitLayout {
        sites: spec.sites,
        boundary: spec.boundary,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondPolarization {
    /// z-up, qubit `|0>`.
    ZUp,
    /// `|+>` along x.
    XPlus,
    /// `|->` along x.
    XMinus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    /// Site occupations, site 1 first.
    pub occupation: Vec<bool>,
    /// One entry per bond, bond `(1,2)` first.
    pub bonds: Vec<BondPolarization>,
}

impl InitialStateSpec {
    /// Parses an occupation string such as `"11110000"`.
    pub fn parse_occupation(bits: &str) -> Result<Vec<bool>> {
        bits.chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => param(format!("occupation must be 0/1, got `{other}`")),
            })
            .collect()
    }

    /// Left half filled, right half empty.
    pub fn domain_wall(sites: usize) -> Vec<bool> {
        (0..sites).map(|i| i < sites / 2).collect()
    }

    /// All bonds z-up: an equal-weight superposition of every charge sector.
    pub fn z_up(occupation: Vec<bool>, bonds: usize) -> Self {
        InitialStateSpec {
            occupation,
            bonds: vec![BondPolarization::ZUp; bonds],
        }
    }

    /// x-polarized bonds chosen so that every charge-carrying site has
    /// `q_j = charge`. The first bond is `|+>`.
    pub fn uniform_charge(occupation: Vec<bool>, boundary: Boundary, charge: i8) -> Result<Self> {
        if charge != 1 && charge != -1 {
            return param(format!("charge must be +1 or -1, got {charge}"));
        }
        let l = occupation.len();
        let n_bonds = match boundary {
            Boundary::Open => l.saturating_sub(1),
            Boundary::Periodic => l,
        };
        // q_j = (-1)^{n_j} x_{j-1} x_j  =>  x_j = q (-1)^{n_j} x_{j-1}
        let mut signs = vec![1i8; n_bonds];
        for j in 2..=n_bonds {
            let parity = if occupation[j - 1] { -1 } else { 1 };
            signs[j - 1] = charge * parity * signs[j - 2];
        }
        if boundary == Boundary::Periodic {
            let parity = if occupation[0] { -1 } else { 1 };
            if charge * parity * signs[n_bonds - 1] != signs[0] {
                return param("no uniform-charge bond pattern exists for this occupation parity");
            }
        }
        Ok(InitialStateSpec {
            occupation,
            bonds: signs
                .into_iter()
                .map(|s| if s > 0 { BondPolarization::XPlus } else { BondPolarization::XMinus })
                .collect(),
        })
    }

    pub fn fermion_number(&self) -> usize {
        self.occupation.iter().filter(|&&b| b).count()
    }

    /// Computational basis index with the site occupations set (bonds zero).
    pub fn occupation_index(&self, layout: &QubitLayout) -> usize {
        self.occupation
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| 1usize << layout.site_qubit(i + 1))
            .sum()
    }

    fn check(&self, layout: &QubitLayout) -> Result<()> {
        if self.occupation.len() != layout.sites() {
            return param(format!(
                "occupation has {} sites, layout has {}",
                self.occupation.len(),
                layout.sites()
            ));
        }
        if self.bonds.len() != layout.bond_count() {
            return param(format!(
                "{} bond polarizations for {} bonds",
                self.bonds.len(),
                layout.bond_count()
            ));
        }
        Ok(())
    }

    /// Builds the product state directly, without a circuit.
    pub fn product_state(&self, layout: &QubitLayout) -> Result<Statevector> {
        self.check(layout)?;
        let n = layout.total_qubits();
        let base = self.occupation_index(layout);
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << n];
        let bonds = layout.bond_qubits();
        let x_count = self.bonds.iter().filter(|&&b| b != BondPolarization::ZUp).count();
        let amp = 0.5f64.powf(x_count as f64 / 2.0);
        for choice in 0..1usize << bonds.len() {
            let mut idx = base;
            let mut sign = 1.0;
            let mut allowed = true;
            for (k, (&q, pol)) in bonds.iter().zip(&self.bonds).enumerate() {
                let bit = choice >> k & 1 == 1;
                match pol {
                    BondPolarization::ZUp if bit => allowed = false,
                    BondPolarization::XMinus if bit => sign = -sign,
                    _ => {}
                }
                if bit {
                    idx |= 1 << q;
                }
            }
            if allowed {
                amps[idx] = num_complex::Complex64::new(sign * amp, 0.0);
            }
        }
        Statevector::from_amplitudes(n, amps)
    }
}

/// Preparation circuit from all-zeros.
pub fn build_initial_state_circuit(
    layout: &QubitLayout,
    init: &InitialStateSpec,
) -> Result<Circuit> {
    init.check(layout)?;
    let mut c = Circuit::new(layout.total_qubits());
    for (i, &occ) in init.occupation.iter().enumerate() {
        if occ {
            c.push(GateOp::one(GateKind::X, layout.site_qubit(i + 1)))?;
        }
    }
    for (b, pol) in init.bonds.iter().enumerate() {
        let q = layout.bond_qubit(b + 1);
        match pol {
            BondPolarization::ZUp => {}
            BondPolarization::XPlus => c.push(GateOp::one(GateKind::H, q))?,
            BondPolarization::XMinus => {
                c.push(GateOp::one(GateKind::X, q))?;
                c.push(GateOp::one(GateKind::H, q))?;
            }
        }
    }
    Ok(c)
}

/// Entangling gate used for the CNOT-based blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    Cnot,
    /// Each CNOT replaced by H(target) CZ H(target).
    Cz,
}

fn finish(c: Circuit, entangler: Entangler) -> Circuit {
    match entangler {
        Entangler::Cnot => c,
        Entangler::Cz => c.with_cz_entanglers(),
    }
}

fn require_open(layout: &QubitLayout) -> Result<()> {
    if layout.boundary() != Boundary::Open {
        return param("circuits are only compiled for open chains");
    }
    Ok(())
}

/// `exp(-i h T sx sx)` on the two bonds around site `j`, using only
/// nearest-neighbour CNOTs through the site qubit (8 CNOTs).
pub fn build_b_gate(j: usize, layout: &QubitLayout, h: f64, period: f64) -> Result<Circuit> {
    require_open(layout)?;
    if j < 2 || j >= layout.sites() {
        return param(format!("site {j} does not have two bonds"));
    }
    let (b1, s, b2) = (layout.bond_qubit(j - 1), layout.site_qubit(j), layout.bond_qubit(j));
    let mut c = Circuit::new(layout.total_qubits());
    let long_cnot = |c: &mut Circuit| -> Result<()> {
        // CNOT(b1 -> b2) routed through s, leaving s unchanged
        for _ in 0..2 {
            c.push(GateOp::two(GateKind::Cnot, b1, s))?;
            c.push(GateOp::two(GateKind::Cnot, s, b2))?;
        }
        Ok(())
    };
    c.push(GateOp::one(GateKind::H, b1))?;
    c.push(GateOp::one(GateKind::H, b2))?;
    long_cnot(&mut c)?;
    c.push(GateOp::one(GateKind::Rz(2.0 * h * period), b2))?;
    long_cnot(&mut c)?;
    c.push(GateOp::one(GateKind::H, b1))?;
    c.push(GateOp::one(GateKind::H, b2))?;
    Ok(c)
}

/// `exp(+i J T sz_{j,j+1} (S+_j S-_{j+1} + h.c.))` on (site j, bond, site j+1)
/// as basis change C, bond-controlled RY pair, basis change D.
pub fn build_a_gate(j: usize, layout: &QubitLayout, hopping: f64, period: f64) -> Result<Circuit> {
    require_open(layout)?;
    if j < 1 || j >= layout.sites() {
        return param(format!("no hopping bond to the right of site {j}"));
    }
    let (sj, b, sk) = (layout.site_qubit(j), layout.bond_qubit(j), layout.site_qubit(j + 1));
    let theta = hopping * period;
    let mut c = Circuit::new(layout.total_qubits());
    let one = |c: &mut Circuit, q: usize, kinds: &[GateKind]| -> Result<()> {
        for &k in kinds {
            c.push(GateOp::one(k, q))?;
        }
        Ok(())
    };
    let routed_cnot = |c: &mut Circuit| -> Result<()> {
        // CNOT(sj -> sk) through the bond qubit
        for _ in 0..2 {
            c.push(GateOp::two(GateKind::Cnot, sj, b))?;
            c.push(GateOp::two(GateKind::Cnot, b, sk))?;
        }
        Ok(())
    };
    use GateKind::{H, S, Z};

    // block C
    one(&mut c, sj, &[H, S, H])?;
    one(&mut c, sk, &[H, S, H])?;
    routed_cnot(&mut c)?;
    one(&mut c, sj, &[S, H])?;
    one(&mut c, sk, &[H, Z, S, H])?;

    // bond-controlled rotations
    c.push(GateOp::two(GateKind::Cnot, b, sj))?;
    c.push(GateOp::two(GateKind::Cnot, b, sk))?;
    c.push(GateOp::one(GateKind::Ry(theta), sj))?;
    c.push(GateOp::one(GateKind::Ry(-theta), sk))?;
    c.push(GateOp::two(GateKind::Cnot, b, sk))?;
    c.push(GateOp::two(GateKind::Cnot, b, sj))?;

    // block D
    one(&mut c, sj, &[H, Z, S])?;
    one(&mut c, sk, &[H, S, H])?;
    routed_cnot(&mut c)?;
    one(&mut c, sj, &[H, Z, S, H])?;
    one(&mut c, sk, &[H, Z, S, H])?;
    Ok(c)
}

/// The A term realised with sqrt-iSWAP entanglers: an iSWAP moves site j
/// next to site j+1, a sqrt-iSWAP / RZ / sqrt-iSWAP^dag sandwich does the
/// hopping, and two sqrt-iSWAP^dag undo the move.
pub fn build_a_gate_sycamore(
    j: usize,
    layout: &QubitLayout,
    hopping: f64,
    period: f64,
) -> Result<Circuit> {
    require_open(layout)?;
    if j < 1 || j >= layout.sites() {
        return param(format!("no hopping bond to the right of site {j}"));
    }
    let (sj, b, sk) = (layout.site_qubit(j), layout.bond_qubit(j), layout.site_qubit(j + 1));
    let theta = hopping * period;
    let mut c = Circuit::new(layout.total_qubits());
    c.push(GateOp::two(GateKind::SqrtIswap, sj, b))?;
    c.push(GateOp::two(GateKind::SqrtIswap, sj, b))?;
    c.push(GateOp::two(GateKind::SqrtIswap, b, sk))?;
    c.push(GateOp::one(GateKind::Rz(theta), b))?;
    c.push(GateOp::one(GateKind::Rz(-theta), sk))?;
    c.push(GateOp::two(GateKind::SqrtIswapDag, b, sk))?;
    c.push(GateOp::two(GateKind::SqrtIswapDag, sj, b))?;
    c.push(GateOp::two(GateKind::SqrtIswapDag, sj, b))?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitBackend {
    Cnot,
    Cz,
    Sycamore,
}

fn period_with(
    spec: &LatticeSpec,
    layout: &QubitLayout,
    a_term: impl Fn(usize) -> Result<Circuit>,
) -> Result<Circuit> {
    spec.validate()?;
    require_open(layout)?;
    let l = spec.sites;
    let mut c = Circuit::new(layout.total_qubits());
    let even_b = (2..l).filter(|j| j % 2 == 0);
    let odd_b = (2..l).filter(|j| j % 2 == 1);
    for j in even_b.chain(odd_b) {
        c.append(&build_b_gate(j, layout, spec.h, spec.period)?)?;
    }
    let even_a = (1..l).filter(|j| j % 2 == 0);
    let odd_a = (1..l).filter(|j| j % 2 == 1);
    for j in even_a.chain(odd_a) {
        c.append(&a_term(j)?)?;
    }
    Ok(schedule_layers(&c))
}

/// One Floquet period with CNOT entanglers, layer-scheduled.
pub fn build_floquet_period(spec: &LatticeSpec, layout: &QubitLayout) -> Result<Circuit> {
    period_with(spec, layout, |j| build_a_gate(j, layout, spec.j, spec.period))
}

/// One Floquet period with sqrt-iSWAP A terms. The B terms keep their
/// CNOT form.
pub fn build_floquet_period_sycamore(spec: &LatticeSpec, layout: &QubitLayout) -> Result<Circuit> {
    period_with(spec, layout, |j| build_a_gate_sycamore(j, layout, spec.j, spec.period))
}

pub fn build_period_for_backend(
    spec: &LatticeSpec,
    layout: &QubitLayout,
    backend: CircuitBackend,
) -> Result<Circuit> {
    match backend {
        CircuitBackend::Cnot => build_floquet_period(spec, layout),
        CircuitBackend::Cz => Ok(schedule_layers(&finish(
            build_floquet_period(spec, layout)?,
            Entangler::Cz,
        ))),
        CircuitBackend::Sycamore => build_floquet_period_sycamore(spec, layout),
    }
}

/// Gate and layer statistics of a compiled circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub qubits: usize,
    pub gates: usize,
    pub two_qubit_gates: usize,
    pub depth: usize,
    pub two_qubit_layers: usize,
    /// Depth counting only two-qubit gates.
    pub two_qubit_depth: usize,
    pub gate_counts: BTreeMap<String, usize>,
}

impl CompileReport {
    pub fn of(c: &Circuit) -> Self {
        let scheduled = schedule_layers(c);
        CompileReport {
            qubits: c.num_qubits(),
            gates: c.len(),
            two_qubit_gates: c.two_qubit_gate_count(),
            depth: scheduled.depth(),
            two_qubit_layers: scheduled.two_qubit_layer_count(),
            two_qubit_depth: c.two_qubit_depth(),
            gate_counts: c
                .gate_counts()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    /// `key = value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = format!(
            "qubits = {}\ngates = {}\ntwo_qubit_gates = {}\ndepth = {}\ntwo_qubit_layers = {}\ntwo_qubit_depth = {}\n",
            self.qubits, self.gates, self.two_qubit_gates, self.depth, self.two_qubit_layers, self.two_qubit_depth
        );
        for (k, v) in &self.gate_counts {
            s.push_str(&format!("count.{k} = {v}\n"));
        }
        s
    }
}

//! Localization diagnostics: imbalance, charges, Rényi-2 entropy series and
//! the Loschmidt-echo norm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exact::FloquetEd;
use crate::floquet::{
    build_initial_state_circuit, build_layout, build_period_for_backend, Boundary, CircuitBackend,
    InitialStateSpec, LatticeSpec, QubitLayout,
};
use crate::pauli::{Pauli, PauliString};
use crate::statevector::{Bitstring, Statevector, SubsystemCut};

/// Observable values on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Zero for exact values.
    pub stderr: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() != stderr.len() {
            return param(format!(
                "series lengths differ: {} times, {} values, {} errors",
                times.len(),
                values.len(),
                stderr.len()
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return param("series times must be strictly increasing");
        }
        Ok(TimeSeries {
            label: label.into(),
            times,
            values,
            stderr,
            metadata: BTreeMap::new(),
        })
    }

    pub fn exact(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(label, times, values, vec![0.0; n])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Values and errors multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self.stderr.iter_mut().for_each(|e| *e *= factor.abs());
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Values and errors divided by the first value.
    pub fn normalized(&self) -> Result<TimeSeries> {
        let v0 = *self.values.first().ok_or_else(|| Error::Parameter("empty series".into()))?;
        if v0 == 0.0 {
            return param("cannot normalize a series starting at zero");
        }
        let mut out = self.clone();
        out.label = format!("{}_normalized", self.label);
        out.values.iter_mut().for_each(|v| *v /= v0);
        out.stderr.iter_mut().for_each(|e| *e /= v0.abs());
        Ok(out)
    }

    /// The points at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<TimeSeries> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.len()) {
            return param(format!("index {i} outside a series of {} points", self.len()));
        }
        let pick = |v: &[f64]| indices.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        let mut out = TimeSeries::new(self.label.clone(), pick(&self.times), pick(&self.values), pick(&self.stderr))?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    /// Indices with `lo <= time <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.times[i] >= lo && self.times[i] <= hi).collect()
    }

    /// Mean of the values at `indices` and its standard error, treating the
    /// points as independent.
    pub fn mean_over(&self, indices: &[usize]) -> Result<(f64, f64)> {
        if indices.is_empty() {
            return Err(Error::Statistics("empty averaging window".into()));
        }
        let n = indices.len() as f64;
        let mean = indices.iter().map(|&i| self.values[i]).sum::<f64>() / n;
        let var = indices.iter().map(|&i| self.stderr[i].powi(2)).sum::<f64>() / (n * n);
        Ok((mean, var.sqrt()))
    }

    /// Like [`TimeSeries::mean_over`] but with the error of fully correlated
    /// points, the mean of the pointwise errors. An upper bound for points
    /// taken along the same trajectories.
    pub fn mean_over_correlated(&self, indices: &[usize]) -> Result<(f64, f64)> {
        let (mean, _) = self.mean_over(indices)?;
        let err = indices.iter().map(|&i| self.stderr[i]).sum::<f64>() / indices.len() as f64;
        Ok((mean, err))
    }
}

/// `n_j = (1 - <Z>)/2` for every site.
pub fn site_densities(state: &Statevector, layout: &QubitLayout) -> Vec<f64> {
    (1..=layout.sites())
        .map(|j| (1.0 - state.expect_z(layout.site_qubit(j))) / 2.0)
        .collect()
}

fn weighted_imbalance(occupation0: &[bool], densities: &[f64]) -> f64 {
    occupation0
        .iter()
        .zip(densities)
        .map(|(&b, &n)| if b { n } else { -n })
        .sum()
}

/// `I = sum_j (2 n_j(0) - 1) n_j(t)` for a Fock initial state.
pub fn imbalance(state: &Statevector, occupation0: &[bool], layout: &QubitLayout) -> Result<f64> {
    if occupation0.len() != layout.sites() {
        return param("occupation length does not match the layout");
    }
    Ok(weighted_imbalance(occupation0, &site_densities(state, layout)))
}

/// Per-shot imbalance.
pub fn shot_imbalance(bits: Bitstring, occupation0: &[bool], layout: &QubitLayout) -> f64 {
    occupation0
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let n = (bits >> layout.site_qubit(i + 1) & 1) as f64;
            if b {
                n
            } else {
                -n
            }
        })
        .sum()
}

/// Sample mean of the per-shot imbalance and its standard error.
pub fn imbalance_from_samples(
    bitstrings: &[Bitstring],
    occupation0: &[bool],
    layout: &QubitLayout,
) -> Result<(f64, f64)> {
    if bitstrings.is_empty() {
        return Err(Error::Statistics("no shots to estimate the imbalance from".into()));
    }
    if occupation0.len() != layout.sites() {
        return param("occupation length does not match the layout");
    }
    let xs: Vec<f64> = bitstrings.iter().map(|&b| shot_imbalance(b, occupation0, layout)).collect();
    Ok(mean_stderr(&xs))
}

/// Mean and standard error of independent samples.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sites carrying a conserved charge.
pub fn charge_sites(layout: &QubitLayout) -> Vec<usize> {
    match layout.boundary() {
        Boundary::Open => (2..layout.sites()).collect(),
        Boundary::Periodic => (1..=layout.sites()).collect(),
    }
}

/// `q_j = (-1)^{n_j} sx sx` as the Pauli string `Z_site X_left X_right`.
pub fn charge_operator(layout: &QubitLayout, j: usize) -> Result<PauliString> {
    match (layout.left_bond(j), layout.right_bond(j)) {
        (Some(l), Some(r)) => Ok(PauliString::new()
            .with(layout.site_qubit(j), Pauli::Z)
            .with(l, Pauli::X)
            .with(r, Pauli::X)),
        _ => param(format!("site {j} carries no charge")),
    }
}

/// `<q_j>` for each charge site.
pub fn charge_profile(state: &Statevector, layout: &QubitLayout) -> Result<Vec<f64>> {
    charge_sites(layout)
        .into_iter()
        .map(|j| state.expect_pauli_string(&charge_operator(layout, j)?))
        .collect()
}

/// `<sum_j Z_site_j>`.
pub fn site_magnetization(state: &Statevector, layout: &QubitLayout) -> f64 {
    (1..=layout.sites()).map(|j| state.expect_z(layout.site_qubit(j))).sum()
}

/// Which qubits form the left half of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutPolicy {
    /// Sites `1..=L/2`, the bonds between them and the bond across the cut.
    #[default]
    WithCutBond,
    /// Sites `1..=L/2` only.
    SitesOnlyLeft,
}

pub fn half_chain_cut(layout: &QubitLayout, policy: CutPolicy) -> Result<SubsystemCut> {
    let half = layout.sites() / 2;
    let qubits = match policy {
        CutPolicy::WithCutBond => {
            let mut q: Vec<usize> = (1..=half).map(|j| layout.site_qubit(j)).collect();
            q.extend((1..=half).filter_map(|j| layout.right_bond(j)));
            q
        }
        CutPolicy::SitesOnlyLeft => (1..=half).map(|j| layout.site_qubit(j)).collect(),
    };
    SubsystemCut::new(qubits)
}

/// Second Rényi entropy across the half-chain cut, using fermion-number
/// conservation when the state has a definite number.
pub fn renyi2_half_chain(state: &Statevector, layout: &QubitLayout, policy: CutPolicy) -> Result<f64> {
    let cut = half_chain_cut(layout, policy)?;
    state.renyi2_conserving(&cut, layout.site_mask())
}

/// How states are propagated for ideal series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealBackend {
    /// Gate-level simulation of the compiled circuit.
    Circuit(CircuitBackend),
    /// Product of exact term exponentials.
    FloquetEd,
}

type StepFn = Box<dyn Fn(&mut Statevector) -> Result<()>>;

/// Prepared initial state and a stepper advancing one Floquet period.
pub struct FloquetStepper {
    layout: QubitLayout,
    state: Statevector,
    step: StepFn,
}

impl FloquetStepper {
    pub fn new(spec: &LatticeSpec, init: &InitialStateSpec, backend: IdealBackend) -> Result<Self> {
        let layout = build_layout(spec);
        let (state, step): (Statevector, StepFn) = match backend {
            IdealBackend::Circuit(b) => {
                let mut psi = Statevector::zero(layout.total_qubits())?;
                psi.run_circuit(&build_initial_state_circuit(&layout, init)?)?;
                let period = build_period_for_backend(spec, &layout, b)?;
                (psi, Box::new(move |s: &mut Statevector| s.run_circuit(&period)))
            }
            IdealBackend::FloquetEd => {
                let psi = init.product_state(&layout)?;
                let f = FloquetEd::new(spec)?;
                (psi, Box::new(move |s: &mut Statevector| f.step(s)))
            }
        };
        Ok(FloquetStepper { layout, state, step })
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn state(&self) -> &Statevector {
        &self.state
    }

    pub fn advance(&mut self) -> Result<()> {
        (self.step)(&mut self.state)
    }

    /// Evaluates `f` on the state after `0..=n_steps` periods.
    pub fn collect<T>(
        mut self,
        n_steps: usize,
        mut f: impl FnMut(&Statevector, &QubitLayout) -> Result<T>,
    ) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(f(&self.state, &self.layout)?);
        for _ in 0..n_steps {
            self.advance()?;
            out.push(f(&self.state, &self.layout)?);
        }
        Ok(out)
    }
}

fn step_times(spec: &LatticeSpec, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|n| n as f64 * spec.period).collect()
}

/// Imbalance after every period.
pub fn imbalance_series(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    n_steps: usize,
    backend: IdealBackend,
) -> Result<TimeSeries> {
    let occ = init.occupation.clone();
    let values = FloquetStepper::new(spec, init, backend)?
        .collect(n_steps, |s, l| imbalance(s, &occ, l))?;
    TimeSeries::exact("imbalance", step_times(spec, n_steps), values)
}

/// Half-chain Rényi-2 entropy after every period.
pub fn renyi2_series(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    n_steps: usize,
    policy: CutPolicy,
    backend: IdealBackend,
) -> Result<TimeSeries> {
    let values = FloquetStepper::new(spec, init, backend)?
        .collect(n_steps, |s, l| renyi2_half_chain(s, l, policy))?;
    TimeSeries::exact("renyi2", step_times(spec, n_steps), values)
}

/// Loschmidt-echo norm `|<i| U(t)^-1 U(t) |i>|` for the ideal circuit,
/// which is one up to rounding. Noisy estimates live in the noise module.
pub fn loschmidt_echo_norm_ideal(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    n_steps: usize,
    backend: CircuitBackend,
) -> Result<TimeSeries> {
    let layout = build_layout(spec);
    let period = build_period_for_backend(spec, &layout, backend)?;
    let inverse = period.inverse();
    let mut psi0 = Statevector::zero(layout.total_qubits())?;
    psi0.run_circuit(&build_initial_state_circuit(&layout, init)?)?;
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut forward = psi0.clone();
    for n in 0..=n_steps {
        if n > 0 {
            forward.run_circuit(&period)?;
        }
        let mut echo = forward.clone();
        for _ in 0..n {
            echo.run_circuit(&inverse)?;
        }
        values.push(psi0.inner(&echo).norm());
    }
    TimeSeries::exact("loschmidt_echo", step_times(spec, n_steps), values)
}

/// First time at which `values` exceeds `threshold`, linearly interpolated.
pub fn crossing_time(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    if values.first().is_some_and(|&v| v >= threshold) {
        return times.first().copied();
    }
    (1..values.len()).find_map(|i| {
        let (v0, v1) = (values[i - 1], values[i]);
        (v0 < threshold && v1 >= threshold).then(|| {
            let f = (threshold - v0) / (v1 - v0);
            times[i - 1] + f * (times[i] - times[i - 1])
        })
    })
}

/// Least-squares line `y = a + b x`, returning `(a, b, max |residual| / |y|)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rel = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| ((a + b * xi) - yi).abs() / yi.abs())
        .fold(0.0, f64::max);
    (a, b, rel)
}

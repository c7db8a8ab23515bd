//! Monte Carlo trajectories under gate-level depolarizing noise.
//!
//! After every gate a uniformly random non-identity Pauli on the gate's
//! support is inserted with probability `p1` (one-qubit gates) or `p2`
//! (two-qubit gates). Averaging over trajectories reproduces the
//! depolarizing channel. Readout flips are optional and off by default.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{param, Result};
use crate::observables::{mean_stderr, shot_imbalance, TimeSeries};
use crate::pauli::{Pauli, PauliString};
use crate::rng;
use crate::floquet::{
    build_initial_state_circuit, build_layout, build_period_for_backend, CircuitBackend,
    InitialStateSpec, LatticeSpec, QubitLayout,
};
use crate::statevector::{Bitstring, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each one-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Probability of flipping each measured bit.
    #[serde(default)]
    pub readout: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, seed: u64) -> Result<Self> {
        let m = NoiseModel {
            p1,
            p2,
            readout: 0.0,
            seed,
        };
        m.validate()?;
        Ok(m)
    }

    /// Two-qubit probability `p2`, one-qubit probability `p2 / 10`.
    pub fn depolarizing(p2: f64, seed: u64) -> Result<Self> {
        Self::new(p2 / 10.0, p2, seed)
    }

    pub fn ideal(seed: u64) -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            readout: 0.0,
            seed,
        }
    }

    pub fn with_readout(mut self, readout: f64) -> Result<Self> {
        self.readout = readout;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseModel { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("readout", self.readout)] {
            if !(0.0..=1.0).contains(&p) {
                return param(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.readout == 0.0
    }
}

/// Runs `circuit` on `psi` with sampled Pauli errors; returns the number of
/// errors inserted.
pub fn run_trajectory<R: Rng + ?Sized>(
    psi: &mut Statevector,
    circuit: &Circuit,
    model: &NoiseModel,
    r: &mut R,
) -> Result<usize> {
    if circuit.num_qubits() != psi.num_qubits() {
        return param(format!(
            "circuit has {} qubits, state has {}",
            circuit.num_qubits(),
            psi.num_qubits()
        ));
    }
    let mut errors = 0;
    for op in circuit.ops() {
        psi.apply_gate_unchecked(op);
        if op.is_two_qubit() {
            if model.p2 > 0.0 && r.random::<f64>() < model.p2 {
                let k = r.random_range(1..16usize);
                psi.apply_pauli(op.qubits[0], Pauli::from_index(k));
                psi.apply_pauli(op.qubits[1], Pauli::from_index(k >> 2));
                errors += 1;
            }
        } else if model.p1 > 0.0 && r.random::<f64>() < model.p1 {
            psi.apply_pauli(op.qubits[0], Pauli::NON_IDENTITY[r.random_range(0..3usize)]);
            errors += 1;
        }
    }
    Ok(errors)
}

/// Flips each of the low `n` bits with probability `model.readout`.
pub fn apply_readout<R: Rng + ?Sized>(bits: Bitstring, n: usize, model: &NoiseModel, r: &mut R) -> Bitstring {
    if model.readout == 0.0 {
        return bits;
    }
    (0..n).fold(bits, |b, q| if r.random::<f64>() < model.readout { b ^ (1 << q) } else { b })
}

fn trajectory_rng(model: &NoiseModel, label: &str, index: usize) -> (u64, ChaCha8Rng) {
    let seed = rng::derive(model.seed, rng::label(label), index as u64);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

/// Trajectory averages of a set of observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    pub n_traj: usize,
    /// Seed of each trajectory's generator.
    pub seeds: Vec<u64>,
    pub means: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Mean and standard error of Pauli expectation values over `n_traj` noisy
/// runs of `circuit` from `initial`.
pub fn run_noisy(
    circuit: &Circuit,
    initial: &Statevector,
    model: &NoiseModel,
    observables: &[PauliString],
    n_traj: usize,
) -> Result<TrajectoryBatch> {
    model.validate()?;
    if n_traj == 0 {
        return param("need at least one trajectory");
    }
    let mut seeds = Vec::with_capacity(n_traj);
    let mut acc = vec![Vec::with_capacity(n_traj); observables.len()];
    for t in 0..n_traj {
        let (seed, mut r) = trajectory_rng(model, "run-noisy", t);
        seeds.push(seed);
        let mut psi = initial.clone();
        run_trajectory(&mut psi, circuit, model, &mut r)?;
        for (a, p) in acc.iter_mut().zip(observables) {
            a.push(psi.expect_pauli_string(p)?);
        }
    }
    let (means, stderr) = acc.iter().map(|xs| mean_stderr(xs)).unzip();
    Ok(TrajectoryBatch {
        n_traj,
        seeds,
        means,
        stderr,
    })
}

/// Per-point trajectory statistics of a vector-valued measurement.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    /// `mean[point][component]`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    /// Measured bitstrings per point, `shots_per_traj` from each trajectory.
    pub samples: Vec<Vec<Bitstring>>,
}

impl StepStats {
    /// One component as `(means, stderrs)` over points.
    pub fn component(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        (
            self.mean.iter().map(|m| m[k]).collect(),
            self.stderr.iter().map(|s| s[k]).collect(),
        )
    }
}

/// Accumulates per-trajectory measurement vectors at a fixed number of points.
struct Collector {
    values: Vec<Vec<Vec<f64>>>,
    samples: Vec<Vec<Bitstring>>,
}

impl Collector {
    fn new(points: usize) -> Self {
        Collector {
            values: vec![Vec::new(); points],
            samples: vec![Vec::new(); points],
        }
    }

    fn finish(self) -> StepStats {
        let mut mean = Vec::with_capacity(self.values.len());
        let mut stderr = Vec::with_capacity(self.values.len());
        for per_traj in &self.values {
            let k = per_traj.first().map_or(0, |v| v.len());
            let (m, s): (Vec<f64>, Vec<f64>) = (0..k)
                .map(|c| mean_stderr(&per_traj.iter().map(|v| v[c]).collect::<Vec<_>>()))
                .unzip();
            mean.push(m);
            stderr.push(s);
        }
        StepStats {
            mean,
            stderr,
            samples: self.samples,
        }
    }
}

/// Measurement applied to each trajectory state.
pub type Measure<'a> = &'a dyn Fn(&Statevector) -> Vec<f64>;

/// Noisy runs of `prep` followed by `n_steps` repetitions of `period`,
/// measured after the preparation and after every period.
#[allow(clippy::too_many_arguments)]
pub fn noisy_step_series(
    prep: &Circuit,
    period: &Circuit,
    n_steps: usize,
    model: &NoiseModel,
    n_traj: usize,
    label: &str,
    shots_per_traj: usize,
    measure: Measure,
) -> Result<StepStats> {
    model.validate()?;
    if n_traj == 0 {
        return param("need at least one trajectory");
    }
    let n = prep.num_qubits();
    let mut col = Collector::new(n_steps + 1);
    for t in 0..n_traj {
        let (_, mut r) = trajectory_rng(model, label, t);
        let mut psi = Statevector::zero(n)?;
        run_trajectory(&mut psi, prep, model, &mut r)?;
        for step in 0..=n_steps {
            if step > 0 {
                run_trajectory(&mut psi, period, model, &mut r)?;
            }
            col.values[step].push(measure(&psi));
            for s in psi.sample_bitstrings(shots_per_traj, &mut r) {
                col.samples[step].push(apply_readout(s, n, model, &mut r));
            }
        }
    }
    Ok(col.finish())
}

/// Noisy echoes: after `prep` and `m` forward periods, a copy of the
/// trajectory runs `m` backward periods and is measured, for
/// `m = 0..=max_m`. The forward part is shared between the `m` values of
/// one trajectory.
#[allow(clippy::too_many_arguments)]
pub fn noisy_echo_series(
    prep: &Circuit,
    forward: &Circuit,
    backward: &Circuit,
    max_m: usize,
    model: &NoiseModel,
    n_traj: usize,
    label: &str,
    measure: Measure,
) -> Result<StepStats> {
    model.validate()?;
    if n_traj == 0 {
        return param("need at least one trajectory");
    }
    let n = prep.num_qubits();
    let mut col = Collector::new(max_m + 1);
    for t in 0..n_traj {
        let (_, mut r) = trajectory_rng(model, label, t);
        let mut psi = Statevector::zero(n)?;
        run_trajectory(&mut psi, prep, model, &mut r)?;
        for m in 0..=max_m {
            if m > 0 {
                run_trajectory(&mut psi, forward, model, &mut r)?;
            }
            let mut echo = psi.clone();
            for _ in 0..m {
                run_trajectory(&mut echo, backward, model, &mut r)?;
            }
            col.values[m].push(measure(&echo));
        }
    }
    Ok(col.finish())
}

/// Noisy imbalance data on the compiled circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyImbalanceRun {
    pub imbalance: TimeSeries,
    /// Per-step site `<Z>` means and errors.
    pub site_z: StepStats,
    /// Imbalance estimated from the sampled shots.
    pub sampled: TimeSeries,
}

/// Components measured per trajectory: the imbalance, then `<Z>` of every site.
pub fn imbalance_and_site_z(layout: &QubitLayout, occupation0: &[bool]) -> impl Fn(&Statevector) -> Vec<f64> {
    let layout = layout.clone();
    let occ = occupation0.to_vec();
    move |psi: &Statevector| {
        let z: Vec<f64> = (1..=layout.sites()).map(|j| psi.expect_z(layout.site_qubit(j))).collect();
        let imb: f64 = occ
            .iter()
            .zip(&z)
            .map(|(&b, zj)| {
                let n = (1.0 - zj) / 2.0;
                if b {
                    n
                } else {
                    -n
                }
            })
            .sum();
        std::iter::once(imb).chain(z).collect()
    }
}

pub fn noisy_imbalance_run(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    model: &NoiseModel,
    n_steps: usize,
    n_traj: usize,
    shots_per_traj: usize,
    backend: CircuitBackend,
) -> Result<NoisyImbalanceRun> {
    let layout = build_layout(spec);
    let prep = build_initial_state_circuit(&layout, init)?;
    let period = build_period_for_backend(spec, &layout, backend)?;
    let measure = imbalance_and_site_z(&layout, &init.occupation);
    let stats = noisy_step_series(&prep, &period, n_steps, model, n_traj, "imbalance", shots_per_traj, &measure)?;
    let times: Vec<f64> = (0..=n_steps).map(|n| n as f64 * spec.period).collect();
    let (m, e) = stats.component(0);
    let imbalance = TimeSeries::new("noisy_imbalance", times.clone(), m, e)?;
    let (sm, se): (Vec<f64>, Vec<f64>) = stats
        .samples
        .iter()
        .map(|shots| {
            let xs: Vec<f64> = shots.iter().map(|&b| shot_imbalance(b, &init.occupation, &layout)).collect();
            if xs.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_stderr(&xs)
            }
        })
        .unzip();
    let sampled = TimeSeries::new("sampled_imbalance", times, sm, se)?;
    Ok(NoisyImbalanceRun {
        imbalance,
        site_z: StepStats {
            mean: stats.mean.iter().map(|v| v[1..].to_vec()).collect(),
            stderr: stats.stderr.iter().map(|v| v[1..].to_vec()).collect(),
            samples: stats.samples,
        },
        sampled,
    })
}

/// Imbalance after every period of the noisy CNOT circuit.
pub fn noisy_imbalance_series(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    model: &NoiseModel,
    n_steps: usize,
    n_traj: usize,
) -> Result<TimeSeries> {
    Ok(noisy_imbalance_run(spec, init, model, n_steps, n_traj, 0, CircuitBackend::Cnot)?.imbalance)
}

//! Error mitigation: symmetry postselection, decay references from
//! shrinking-period runs (strategy A) and from local forward-backward echoes
//! (strategy B), and the full Loschmidt-echo norm.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::floquet::{
    build_initial_state_circuit, build_layout, build_period_for_backend, CircuitBackend,
    InitialStateSpec, LatticeSpec, QubitLayout,
};
use crate::noise::{noisy_echo_series, noisy_step_series, NoiseModel};
use crate::observables::{mean_stderr, shot_imbalance, TimeSeries};
use crate::statevector::{Bitstring, Statevector};

/// Reference floor used when none is given.
pub const DEFAULT_FLOOR: f64 = 0.05;
/// Relative change between successive periods at which strategy A accepts.
pub const DEFAULT_PLATEAU_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationMethod {
    Postselect,
    StrategyA,
    StrategyB,
    FullEcho,
}

/// Whether sites are divided by their own reference or by one shared value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    PerSite,
    #[default]
    Global,
}

/// Local operator whose decay defines the strategy A reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceOperator {
    /// `Z` on the central bond qubit.
    #[default]
    BondZ,
    /// `X` on the central bond qubit.
    BondX,
    /// `Z` on the leftmost site qubit.
    SiteZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub method: MitigationMethod,
    pub raw: TimeSeries,
    pub reference: TimeSeries,
    pub mitigated: TimeSeries,
    pub floor: f64,
    /// Times dropped because the reference fell below the floor.
    pub excluded_times: Vec<f64>,
    /// Per-point fraction of discarded shots (postselection only).
    pub discard_fraction: Option<Vec<f64>>,
}

/// Keeps shots whose site qubits hold `target` fermions.
pub fn postselect(
    bitstrings: &[Bitstring],
    layout: &QubitLayout,
    target: u32,
) -> Result<(Vec<Bitstring>, f64)> {
    if bitstrings.is_empty() {
        return Err(Error::Statistics("no shots to postselect".into()));
    }
    let mask = layout.site_mask() as Bitstring;
    let kept: Vec<Bitstring> = bitstrings
        .iter()
        .copied()
        .filter(|b| (b & mask).count_ones() == target)
        .collect();
    if kept.is_empty() {
        return Err(Error::Statistics("postselection discarded every shot".into()));
    }
    let discard = 1.0 - kept.len() as f64 / bitstrings.len() as f64;
    Ok((kept, discard))
}

/// Raw and postselected sampled imbalance, one point per entry of `samples`.
pub fn postselected_imbalance(
    times: &[f64],
    samples: &[Vec<Bitstring>],
    occupation0: &[bool],
    layout: &QubitLayout,
) -> Result<MitigationReport> {
    if times.len() != samples.len() {
        return param("one shot set per time point required");
    }
    let target = occupation0.iter().filter(|&&b| b).count() as u32;
    let est = |shots: &[Bitstring]| {
        let xs: Vec<f64> = shots.iter().map(|&b| shot_imbalance(b, occupation0, layout)).collect();
        mean_stderr(&xs)
    };
    let mut raw = (Vec::new(), Vec::new());
    let mut post = (Vec::new(), Vec::new());
    let mut kept_frac = (Vec::new(), Vec::new());
    let mut discard = Vec::new();
    for shots in samples {
        if shots.is_empty() {
            return Err(Error::Statistics("time point without shots".into()));
        }
        let (m, e) = est(shots);
        raw.0.push(m);
        raw.1.push(e);
        let (kept, d) = postselect(shots, layout, target)?;
        let (m, e) = est(&kept);
        post.0.push(m);
        post.1.push(e);
        kept_frac.0.push(1.0 - d);
        kept_frac.1.push(0.0);
        discard.push(d);
    }
    Ok(MitigationReport {
        method: MitigationMethod::Postselect,
        raw: TimeSeries::new("raw_sampled_imbalance", times.to_vec(), raw.0, raw.1)?,
        reference: TimeSeries::new("kept_fraction", times.to_vec(), kept_frac.0, kept_frac.1)?,
        mitigated: TimeSeries::new("postselected_imbalance", times.to_vec(), post.0, post.1)?,
        floor: 0.0,
        excluded_times: Vec::new(),
        discard_fraction: Some(discard),
    })
}

/// `x / y` with first-order error propagation for independent estimates.
pub fn ratio(x: f64, sx: f64, y: f64, sy: f64) -> (f64, f64) {
    let r = x / y;
    (r, ((sx / y).powi(2) + (x * sy / (y * y)).powi(2)).sqrt())
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0))
}

/// Divides `raw` by `reference` pointwise; points with reference below
/// `floor` are excluded and listed.
pub fn apply_mitigation(
    raw: &TimeSeries,
    reference: &TimeSeries,
    floor: f64,
    method: MitigationMethod,
) -> Result<MitigationReport> {
    if !(floor > 0.0) {
        return param("reference floor must be positive");
    }
    if !same_grid(&raw.times, &reference.times) {
        return param("raw and reference series are on different time grids");
    }
    let (mut t, mut v, mut e, mut excluded) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..raw.len() {
        let y = reference.values[i];
        if y < floor {
            excluded.push(raw.times[i]);
            continue;
        }
        let (r, s) = ratio(raw.values[i], raw.stderr[i], y, reference.stderr[i]);
        t.push(raw.times[i]);
        v.push(r);
        e.push(s);
    }
    Ok(MitigationReport {
        method,
        raw: raw.clone(),
        reference: reference.clone(),
        mitigated: TimeSeries::new(format!("{}_mitigated", raw.label), t, v, e)?,
        floor,
        excluded_times: excluded,
        discard_fraction: None,
    })
}

/// Per-site mitigation of the imbalance: each site's `<Z>` is divided by its
/// own reference before the imbalance is formed.
#[allow(clippy::too_many_arguments)]
pub fn apply_site_mitigation(
    times: &[f64],
    raw_z: &[Vec<f64>],
    raw_z_err: &[Vec<f64>],
    reference: &SiteReference,
    occupation0: &[bool],
    floor: f64,
    method: MitigationMethod,
    raw: &TimeSeries,
) -> Result<MitigationReport> {
    if !same_grid(times, &reference.times) || !same_grid(times, &raw.times) {
        return param("raw and reference series are on different time grids");
    }
    let (mut t, mut v, mut e, mut excluded) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..times.len() {
        let refs = &reference.per_site[i];
        if refs.iter().any(|&y| y < floor) {
            excluded.push(times[i]);
            continue;
        }
        let (mut imb, mut var) = (0.0, 0.0);
        for (j, &b) in occupation0.iter().enumerate() {
            let (z, sz) = ratio(raw_z[i][j], raw_z_err[i][j], refs[j], reference.per_site_err[i][j]);
            let c = if b { 0.5 } else { -0.5 };
            imb += c * (1.0 - z);
            var += (c * sz).powi(2);
        }
        t.push(times[i]);
        v.push(imb);
        e.push(var.sqrt());
    }
    Ok(MitigationReport {
        method,
        raw: raw.clone(),
        reference: reference.global.clone(),
        mitigated: TimeSeries::new(format!("{}_mitigated_per_site", raw.label), t, v, e)?,
        floor,
        excluded_times: excluded,
        discard_fraction: None,
    })
}

/// Strategy A result: the reference and how it was reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAReference {
    pub reference: TimeSeries,
    /// Period at which the ratios settled.
    pub accepted_period: f64,
    /// `ratios[k][n]` for schedule entry `k`.
    pub ratios: Vec<Vec<f64>>,
    pub schedule: Vec<f64>,
}

fn reference_qubit(layout: &QubitLayout, op: ReferenceOperator) -> usize {
    match op {
        ReferenceOperator::BondZ | ReferenceOperator::BondX => layout.bond_qubit(layout.sites() / 2),
        ReferenceOperator::SiteZ => layout.site_qubit(1),
    }
}

/// Halving schedule `T, T/f, T/f^2, ...` with `len` entries.
pub fn geometric_schedule(period: f64, factor: f64, len: usize) -> Vec<f64> {
    (0..len).map(|k| period / factor.powi(k as i32)).collect()
}

/// Strategy A: the same number of periods is run at each period length of
/// `schedule`. For every step count the ratio of the local observable to its
/// value after preparation is followed down the schedule and accepted once
/// it changes by less than `tolerance` (relative) between successive entries.
#[allow(clippy::too_many_arguments)]
pub fn strategy_a_reference(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    n_steps: usize,
    model: &NoiseModel,
    schedule: &[f64],
    n_traj: usize,
    operator: ReferenceOperator,
    tolerance: f64,
) -> Result<StrategyAReference> {
    if schedule.len() < 2 {
        return param("strategy A needs at least two periods in the schedule");
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return param("strategy A schedule must be strictly decreasing");
    }
    let layout = build_layout(spec);
    let prep = build_initial_state_circuit(&layout, init)?;
    let q = reference_qubit(&layout, operator);
    let measure = move |psi: &Statevector| -> Vec<f64> {
        let v = match operator {
            ReferenceOperator::BondX => {
                let p = crate::pauli::PauliString::new().with(q, crate::pauli::Pauli::X);
                psi.expect_pauli_string(&p).unwrap_or(f64::NAN)
            }
            _ => psi.expect_z(q),
        };
        vec![v]
    };

    let mut ratios = Vec::with_capacity(schedule.len());
    let mut accepted = None;
    for (k, &period) in schedule.iter().enumerate() {
        let s = spec.with_period(period);
        let circuit = build_period_for_backend(&s, &layout, CircuitBackend::Cnot)?;
        // every period length replays the same noise draws, so successive
        // ratios differ only through the ideal dynamics
        let stats = noisy_step_series(&prep, &circuit, n_steps, model, n_traj, "strategy-a", 0, &measure)?;
        let (m, e) = stats.component(0);
        if m[0].abs() < 1e-9 {
            return param("reference operator vanishes in the initial state; choose another operator");
        }
        let (r, re): (Vec<f64>, Vec<f64>) = (0..=n_steps)
            .map(|n| if n == 0 { (1.0, 0.0) } else { ratio(m[n], e[n], m[0], e[0]) })
            .unzip();
        let settled = k > 0
            && r.iter()
                .zip(&ratios[k - 1])
                .all(|(a, b): (&f64, &f64)| (a - b).abs() <= tolerance * b.abs());
        ratios.push(r.clone());
        if settled {
            accepted = Some((r, re, period));
            break;
        }
    }
    let Some((values, errors, period)) = accepted else {
        let worst = (0..=n_steps)
            .max_by(|&a, &b| {
                let d = |n: usize| {
                    let k = ratios.len() - 1;
                    (ratios[k][n] - ratios[k - 1][n]).abs()
                };
                d(a).total_cmp(&d(b))
            })
            .unwrap_or(0);
        let trail: Vec<f64> = ratios.iter().map(|r| r[worst]).collect();
        return Err(Error::Convergence(format!(
            "strategy A reference did not settle within {tolerance}; step {worst} ratios {trail:?} over periods {schedule:?}"
        )));
    };
    let times: Vec<f64> = (0..=n_steps).map(|n| n as f64 * spec.period).collect();
    Ok(StrategyAReference {
        reference: TimeSeries::new("strategy_a_reference", times, values, errors)?,
        accepted_period: period,
        ratios,
        schedule: schedule.to_vec(),
    })
}

/// Per-site and site-averaged references on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteReference {
    pub times: Vec<f64>,
    /// `per_site[point][site]`.
    pub per_site: Vec<Vec<f64>>,
    pub per_site_err: Vec<Vec<f64>>,
    /// Mean over sites.
    pub global: TimeSeries,
}

/// Strategy B: `n/2` forward periods then the inverted circuit for `n/2`
/// periods; each site's `<Z>` divided by its value after preparation.
/// Evaluated at every even step count up to `n_steps`.
pub fn strategy_b_reference(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    n_steps: usize,
    model: &NoiseModel,
    n_traj: usize,
) -> Result<SiteReference> {
    let layout = build_layout(spec);
    let prep = build_initial_state_circuit(&layout, init)?;
    let period = build_period_for_backend(spec, &layout, CircuitBackend::Cnot)?;
    let inverse = period.inverse();
    let sites: Vec<usize> = (1..=spec.sites).map(|j| layout.site_qubit(j)).collect();
    let measure = move |psi: &Statevector| sites.iter().map(|&q| psi.expect_z(q)).collect::<Vec<f64>>();
    let stats = noisy_echo_series(&prep, &period, &inverse, n_steps / 2, model, n_traj, "strategy-b", &measure)?;

    let z0 = &stats.mean[0];
    if z0.iter().any(|z| z.abs() < 1e-9) {
        return param("site magnetization vanishes in the initial state");
    }
    let mut per_site = Vec::new();
    let mut per_site_err = Vec::new();
    let mut global = (Vec::new(), Vec::new());
    for m in 0..stats.mean.len() {
        let (r, e): (Vec<f64>, Vec<f64>) = (0..spec.sites)
            .map(|j| if m == 0 { (1.0, 0.0) } else { ratio(stats.mean[m][j], stats.stderr[m][j], z0[j], stats.stderr[0][j]) })
            .unzip();
        let l = spec.sites as f64;
        global.0.push(r.iter().sum::<f64>() / l);
        global.1.push(e.iter().map(|x| x * x).sum::<f64>().sqrt() / l);
        per_site.push(r);
        per_site_err.push(e);
    }
    let times: Vec<f64> = (0..stats.mean.len()).map(|m| (2 * m) as f64 * spec.period).collect();
    Ok(SiteReference {
        global: TimeSeries::new("strategy_b_reference", times.clone(), global.0, global.1)?,
        times,
        per_site,
        per_site_err,
    })
}

/// Checks that a strategy B evaluation point has an even step count.
pub fn strategy_b_steps(n: usize) -> Result<usize> {
    if n % 2 == 1 {
        return param(format!("strategy B needs an even number of periods, got {n}"));
    }
    Ok(n / 2)
}

/// Noisy Loschmidt-echo norm `N(n) = |<i| U^-1(nT) U(nT) |i>|` after `n`
/// forward and `n` inverted periods, estimated as the square root of the
/// trajectory-averaged return probability to the ideal prepared state.
pub fn loschmidt_echo_norm(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    n_steps: usize,
    model: &NoiseModel,
    n_traj: usize,
) -> Result<TimeSeries> {
    let layout = build_layout(spec);
    let prep = build_initial_state_circuit(&layout, init)?;
    let period = build_period_for_backend(spec, &layout, CircuitBackend::Cnot)?;
    let inverse = period.inverse();
    let mut psi0 = Statevector::zero(layout.total_qubits())?;
    psi0.run_circuit(&prep)?;
    let measure = move |psi: &Statevector| vec![psi0.inner(psi).norm_sqr()];
    let stats = noisy_echo_series(&prep, &period, &inverse, n_steps, model, n_traj, "full-echo", &measure)?;
    let (p, pe) = stats.component(0);
    let values: Vec<f64> = p.iter().map(|x| x.max(0.0).sqrt()).collect();
    let errors: Vec<f64> = values
        .iter()
        .zip(&pe)
        .map(|(v, e)| if *v > 0.0 { e / (2.0 * v) } else { f64::INFINITY })
        .collect();
    let times = (0..=n_steps).map(|n| n as f64 * spec.period).collect();
    TimeSeries::new("loschmidt_echo", times, values, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (LatticeSpec, InitialStateSpec) {
        let spec = LatticeSpec::open(4, 1.0, 1.0, 0.5).unwrap();
        let init = InitialStateSpec::z_up(InitialStateSpec::domain_wall(4), 3);
        (spec, init)
    }

    #[test]
    fn postselection_discards_wrong_magnetization() {
        let layout = build_layout(&setup().0);
        // sites on qubits 0, 2, 4, 6
        let shots = vec![0b0000101, 0b0000101, 0b1000101, 0b0000111];
        let (kept, d) = postselect(&shots, &layout, 2).unwrap();
        assert_eq!(kept, vec![0b0000101, 0b0000101, 0b0000111]);
        assert!((d - 0.25).abs() < 1e-15);
        assert!(matches!(postselect(&shots, &layout, 4), Err(Error::Statistics(_))));
    }

    #[test]
    fn unit_reference_leaves_raw_unchanged() {
        let raw = TimeSeries::new("x", vec![0.0, 1.0], vec![2.0, 1.5], vec![0.0, 0.1]).unwrap();
        let one = TimeSeries::exact("r", vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let rep = apply_mitigation(&raw, &one, DEFAULT_FLOOR, MitigationMethod::StrategyA).unwrap();
        assert_eq!(rep.mitigated.values, raw.values);
        assert_eq!(rep.mitigated.stderr, raw.stderr);
    }

    #[test]
    fn exact_decay_cancels() {
        let ideal = [2.0, 1.8, 1.7];
        let n = [1.0, 0.6, 0.3];
        let raw = TimeSeries::exact("x", vec![0.0, 1.0, 2.0], ideal.iter().zip(n).map(|(a, b)| a * b).collect()).unwrap();
        let r = TimeSeries::exact("r", vec![0.0, 1.0, 2.0], n.to_vec()).unwrap();
        let rep = apply_mitigation(&raw, &r, DEFAULT_FLOOR, MitigationMethod::StrategyB).unwrap();
        for (a, b) in rep.mitigated.values.iter().zip(ideal) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn floor_excludes_points() {
        let raw = TimeSeries::exact("x", vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let r = TimeSeries::exact("r", vec![0.0, 1.0], vec![1.0, 0.01]).unwrap();
        let rep = apply_mitigation(&raw, &r, DEFAULT_FLOOR, MitigationMethod::FullEcho).unwrap();
        assert_eq!(rep.excluded_times, vec![1.0]);
        assert_eq!(rep.mitigated.len(), 1);
        let shifted = TimeSeries::exact("r", vec![0.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!(apply_mitigation(&raw, &shifted, DEFAULT_FLOOR, MitigationMethod::FullEcho).is_err());
    }

    #[test]
    fn noiseless_references() {
        let (spec, init) = setup();
        let model = NoiseModel::ideal(1);
        let b = strategy_b_reference(&spec, &init, 4, &model, 2).unwrap();
        assert!(b.per_site.iter().flatten().all(|r| (r - 1.0).abs() < 1e-10));
        let echo = loschmidt_echo_norm(&spec, &init, 3, &model, 2).unwrap();
        assert!(echo.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let schedule = geometric_schedule(spec.period, 4.0, 6);
        let a = strategy_a_reference(&spec, &init, 3, &model, &schedule, 1, ReferenceOperator::BondZ, DEFAULT_PLATEAU_TOLERANCE)
            .unwrap();
        assert_eq!(a.reference.values[0], 1.0);
        assert!(a.reference.values.iter().all(|v| (v - 1.0).abs() < 0.02), "{:?}", a.reference.values);
    }

    #[test]
    fn odd_echo_points_rejected() {
        assert!(strategy_b_steps(3).is_err());
        assert_eq!(strategy_b_steps(6).unwrap(), 3);
    }

    #[test]
    fn schedule_must_shrink() {
        let (spec, init) = setup();
        let model = NoiseModel::ideal(0);
        assert!(strategy_a_reference(&spec, &init, 2, &model, &[0.5, 0.5], 1, ReferenceOperator::BondZ, 0.02).is_err());
        assert!(strategy_a_reference(&spec, &init, 2, &model, &[0.5], 1, ReferenceOperator::BondZ, 0.02).is_err());
    }
}

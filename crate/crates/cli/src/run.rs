//! Experiment dispatch.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use dfl_core::exact::{
    evolve_continuous, greens_function_ed, sector_averaged_densities, single_sector_densities, ChargeConfig,
    SectorStrategy,
};
use dfl_core::floquet::build_layout;
use dfl_core::mitigation::{
    apply_mitigation, apply_site_mitigation, geometric_schedule, loschmidt_echo_norm, postselected_imbalance,
    strategy_a_reference, strategy_b_reference, MitigationMethod, NormalizationMode,
};
use dfl_core::noise::noisy_imbalance_run;
use dfl_core::observables::{imbalance, imbalance_series, renyi2_half_chain, renyi2_series, CutPolicy, IdealBackend};
use dfl_core::verify::{verify_decompositions, DEFAULT_TOLERANCE};
use dfl_core::{BondPolarization, CircuitBackend, InitialStateSpec, LatticeSpec, NoiseModel, TimeSeries};

use crate::config::{Backend, ExperimentKind, InitConfig, RunConfig};
use crate::error::CliError;
use crate::manifest::{write_atomic, write_manifest, OutputWriter, RunManifest};

/// Results of one experiment before they are written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub series: Vec<TimeSeries>,
    pub summary: BTreeMap<String, String>,
    /// Extra JSON documents, by file name.
    pub documents: Vec<(String, serde_json::Value)>,
    /// Set when a verification check failed.
    pub failure: Option<String>,
}

fn step_times(spec: &LatticeSpec, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|n| n as f64 * spec.period).collect()
}

fn fermions(init: &InitialStateSpec) -> Result<f64, CliError> {
    let n = init.fermion_number();
    if n == 0 {
        return Err(CliError::Config("initial state has no fermions; the imbalance is not normalizable".into()));
    }
    Ok(n as f64)
}

fn noise_model(config: &RunConfig) -> Result<NoiseModel, CliError> {
    let noise = config.noise.as_ref().ok_or_else(|| CliError::Config("missing [noise] section".into()))?;
    let seed = config.seed.ok_or_else(|| CliError::Config("a seed is required for noisy runs".into()))?;
    let model = match noise.p1 {
        Some(p1) => NoiseModel::new(p1, noise.p2, seed)?,
        None => NoiseModel::depolarizing(noise.p2, seed)?,
    };
    Ok(model.with_readout(noise.readout)?)
}

fn sector_strategy(config: &RunConfig) -> Result<SectorStrategy, CliError> {
    Ok(match config.sectors {
        None => SectorStrategy::Enumerate,
        Some(count) => SectorStrategy::Sample {
            count,
            seed: config.seed.ok_or_else(|| CliError::Config("sampled sectors need a seed".into()))?,
        },
    })
}

/// `I(t) / N` from the sector solver.
fn sector_imbalance(
    spec: &LatticeSpec,
    init: &InitialStateSpec,
    times: &[f64],
    strategy: SectorStrategy,
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let n = fermions(init)?;
    let signed = |dens: &[f64]| -> f64 {
        init.occupation.iter().zip(dens).map(|(&b, x)| if b { *x } else { -x }).sum::<f64>() / n
    };
    if init.bonds.iter().all(|&b| b == BondPolarization::ZUp) {
        let avg = sector_averaged_densities(spec, &init.occupation, times, strategy)?;
        let values = avg.densities.iter().map(|d| signed(d)).collect();
        let errors = avg.imbalance_stderr.iter().map(|e| e / n).collect();
        return Ok((values, errors));
    }
    // a product of charge eigenstates lives in one sector
    let layout = build_layout(spec);
    let psi = init.product_state(&layout)?;
    let charges: Vec<i8> = dfl_core::observables::charge_profile(&psi, &layout)?
        .iter()
        .map(|&q| if q > 0.5 { 1 } else if q < -0.5 { -1 } else { 0 })
        .collect();
    if charges.contains(&0) {
        return Err(CliError::Config(
            "the sector backend needs z-up bonds or a charge eigenstate".into(),
        ));
    }
    let dens = single_sector_densities(spec, &ChargeConfig::new(charges)?, &init.occupation, times)?;
    Ok((dens.iter().map(|d| signed(d)).collect(), vec![0.0; times.len()]))
}

fn imbalance_for(config: &RunConfig, spec: &LatticeSpec, init_cfg: &InitConfig, out: &mut Outcome) -> Result<(), CliError> {
    let init = init_cfg.state(spec)?;
    let n = fermions(&init)?;
    let times = step_times(spec, config.n_steps);
    let label = init_cfg.label.clone();
    let series = match config.backend {
        Backend::Circuit => imbalance_series(spec, &init, config.n_steps, IdealBackend::Circuit(config.gates))?.scaled(1.0 / n),
        Backend::FloquetEd => imbalance_series(spec, &init, config.n_steps, IdealBackend::FloquetEd)?.scaled(1.0 / n),
        Backend::Ed => {
            let layout = build_layout(spec);
            let states = evolve_continuous(spec, &init.product_state(&layout)?, &times)?;
            let values = states
                .iter()
                .map(|s| imbalance(s, &init.occupation, &layout).map(|i| i / n))
                .collect::<Result<Vec<f64>, _>>()?;
            TimeSeries::exact(label.clone(), times.clone(), values)?
        }
        Backend::Sector => {
            let (v, e) = sector_imbalance(spec, &init, &times, sector_strategy(config)?)?;
            TimeSeries::new(label.clone(), times.clone(), v, e)?
        }
        Backend::Noisy => {
            let model = noise_model(config)?;
            let run = noisy_imbalance_run(spec, &init, &model, config.n_steps, config.n_traj, config.shots, config.gates)?;
            if config.shots > 0 {
                out.series.push(run.sampled.scaled(1.0 / n).with_label(format!("{label}_sampled")));
            }
            run.imbalance.scaled(1.0 / n)
        }
    };
    out.series.push(
        series
            .with_label(label)
            .with_meta("observable", "imbalance / initial fermion number")
            .with_meta("backend", format!("{:?}", config.backend)),
    );
    Ok(())
}

fn renyi_for(config: &RunConfig, base: &LatticeSpec, init_cfg: &InitConfig, out: &mut Outcome) -> Result<(), CliError> {
    let sizes = if config.sizes.is_empty() { vec![base.sites] } else { config.sizes.clone() };
    for l in sizes {
        let spec = LatticeSpec { sites: l, ..*base };
        spec.validate()?;
        let init = init_cfg.state(&spec)?;
        let series = match config.backend {
            Backend::Circuit => renyi2_series(&spec, &init, config.n_steps, CutPolicy::default(), IdealBackend::Circuit(config.gates))?,
            Backend::FloquetEd => renyi2_series(&spec, &init, config.n_steps, CutPolicy::default(), IdealBackend::FloquetEd)?,
            Backend::Ed => {
                let layout = build_layout(&spec);
                let times = step_times(&spec, config.n_steps);
                let states = evolve_continuous(&spec, &init.product_state(&layout)?, &times)?;
                let values = states
                    .iter()
                    .map(|s| renyi2_half_chain(s, &layout, CutPolicy::default()))
                    .collect::<Result<Vec<f64>, _>>()?;
                TimeSeries::exact("renyi2", times, values)?
            }
            Backend::Noisy | Backend::Sector => {
                return Err(CliError::Config("RENYI runs on the circuit, ed or floquet-ed backend".into()))
            }
        };
        out.series.push(
            series
                .with_label(format!("{}_L{l}", init_cfg.label))
                .with_meta("observable", "half-chain renyi-2 entropy, bits")
                .with_meta("sites", l),
        );
    }
    Ok(())
}

fn greens_for(config: &RunConfig, spec: &LatticeSpec, init_cfg: &InitConfig, out: &mut Outcome) -> Result<(), CliError> {
    let (j, k) = config.greens_sites.ok_or_else(|| CliError::Config("missing greens_sites".into()))?;
    let init = init_cfg.state(spec)?;
    let layout = build_layout(spec);
    let times = step_times(spec, config.n_steps);
    let g = greens_function_ed(spec, &init.product_state(&layout)?, j, k, &times)?;
    for (part, values) in [("re", g.iter().map(|z| z.re).collect()), ("im", g.iter().map(|z| z.im).collect())] {
        out.series.push(
            TimeSeries::exact(format!("{}_G{j}{k}_{part}", init_cfg.label), times.clone(), values)?
                .with_meta("observable", format!("<f+_{j}(t) f_{k}(0)>, {part}")),
        );
    }
    Ok(())
}

fn noisy_mitigated_for(config: &RunConfig, spec: &LatticeSpec, init_cfg: &InitConfig, out: &mut Outcome) -> Result<(), CliError> {
    let init = init_cfg.state(spec)?;
    let n = fermions(&init)?;
    let model = noise_model(config)?;
    let m = &config.mitigation;
    let label = &init_cfg.label;
    let steps = config.n_steps;

    let ideal = imbalance_series(spec, &init, steps, IdealBackend::Circuit(CircuitBackend::Cnot))?;
    out.series.push(ideal.clone().scaled(1.0 / n).with_label(format!("{label}_ideal")));
    let run = noisy_imbalance_run(spec, &init, &model, steps, config.n_traj, config.shots, CircuitBackend::Cnot)?;
    let raw = run.imbalance.clone();
    out.series.push(raw.clone().scaled(1.0 / n).with_label(format!("{label}_raw")));

    let push = |name: &str, rep: dfl_core::mitigation::MitigationReport, out: &mut Outcome| {
        out.summary.insert(format!("{label}.{name}.excluded_times"), format!("{:?}", rep.excluded_times));
        out.series.push(rep.reference.with_label(format!("{label}_{name}_reference")));
        out.series.push(rep.mitigated.scaled(1.0 / n).with_label(format!("{label}_{name}")));
    };
    for method in &m.methods {
        match method {
            MitigationMethod::Postselect => {
                if config.shots == 0 {
                    return Err(CliError::Config("postselection needs shots > 0".into()));
                }
                let layout = build_layout(spec);
                let rep = postselected_imbalance(&raw.times, &run.site_z.samples, &init.occupation, &layout)?;
                out.summary.insert(
                    format!("{label}.postselect.discard_fraction"),
                    format!("{:?}", rep.discard_fraction.clone().unwrap_or_default()),
                );
                push("postselect", rep, out);
            }
            MitigationMethod::StrategyA => {
                let schedule = geometric_schedule(spec.period, 2.0, m.schedule_len);
                let a = strategy_a_reference(spec, &init, steps, &model, &schedule, config.n_traj, m.reference_operator, m.plateau_tolerance)?;
                out.summary.insert(format!("{label}.strategy_a.accepted_period"), a.accepted_period.to_string());
                push("strategy_a", apply_mitigation(&raw, &a.reference, m.floor, *method)?, out);
            }
            MitigationMethod::StrategyB => {
                let b = strategy_b_reference(spec, &init, steps, &model, config.n_traj)?;
                let even: Vec<usize> = (0..=steps).step_by(2).collect();
                let raw_even = raw.select(&even)?;
                let rep = match m.normalization {
                    NormalizationMode::Global => apply_mitigation(&raw_even, &b.global, m.floor, *method)?,
                    NormalizationMode::PerSite => {
                        let z: Vec<Vec<f64>> = even.iter().map(|&i| run.site_z.mean[i].clone()).collect();
                        let ze: Vec<Vec<f64>> = even.iter().map(|&i| run.site_z.stderr[i].clone()).collect();
                        apply_site_mitigation(&b.times, &z, &ze, &b, &init.occupation, m.floor, *method, &raw_even)?
                    }
                };
                push("strategy_b", rep, out);
            }
            MitigationMethod::FullEcho => {
                let echo = loschmidt_echo_norm(spec, &init, steps, &model, config.n_traj)?;
                push("full_echo", apply_mitigation(&raw, &echo, m.floor, *method)?, out);
            }
        }
    }
    Ok(())
}

fn sector_scaling(config: &RunConfig, base: &LatticeSpec, out: &mut Outcome) -> Result<(), CliError> {
    let init_cfg = config.inits.first();
    let strategy = sector_strategy(config)?;
    for &h in &config.h_values {
        let spec = base.with_h(h);
        spec.validate()?;
        let init = match init_cfg {
            Some(c) => c.state(&spec)?,
            None => InitialStateSpec::z_up(InitialStateSpec::domain_wall(spec.sites), spec.bond_count()),
        };
        let times = step_times(&spec, config.n_steps);
        let (v, e) = sector_imbalance(&spec, &init, &times, strategy)?;
        out.series.push(
            TimeSeries::new(format!("h_{h}"), times, v, e)?
                .with_meta("observable", "sector-averaged imbalance / initial fermion number")
                .with_meta("h", h),
        );
    }
    Ok(())
}

fn decomp_verify(config: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let checks = verify_decompositions(config.draws, config.seed.unwrap_or(0), DEFAULT_TOLERANCE)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    for c in &checks {
        out.summary.insert(
            format!("verify.{}", c.name),
            format!("{} max_error={:e} tolerance={:e}", if c.passed { "pass" } else { "FAIL" }, c.max_error, c.tolerance),
        );
    }
    if !failed.is_empty() {
        out.failure = Some(format!("decomposition checks failed: {}", failed.join(", ")));
    }
    out.documents.push((
        "decomp_verify.json".into(),
        serde_json::to_value(&checks).map_err(|e| CliError::Io(std::io::Error::other(e)))?,
    ));
    Ok(())
}

/// Runs the experiment without writing anything.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let spec = config.lattice_spec()?;
    let mut out = Outcome::default();
    match config.kind {
        ExperimentKind::Imbalance => {
            for init in &config.inits {
                imbalance_for(config, &spec, init, &mut out)?;
            }
        }
        ExperimentKind::Renyi => {
            for init in &config.inits {
                renyi_for(config, &spec, init, &mut out)?;
            }
        }
        ExperimentKind::Greens => {
            for init in &config.inits {
                greens_for(config, &spec, init, &mut out)?;
            }
        }
        ExperimentKind::NoisyMitigated => {
            for init in &config.inits {
                noisy_mitigated_for(config, &spec, init, &mut out)?;
            }
        }
        ExperimentKind::SectorScaling => sector_scaling(config, &spec, &mut out)?,
        ExperimentKind::DecompVerify => decomp_verify(config, &mut out)?,
    }
    Ok(out)
}

/// Runs the experiment and writes its series and manifest into `dir`.
pub fn run(config: &RunConfig, dir: &Path) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let outcome = execute(config)?;
    let mut writer = OutputWriter::new(dir)?;
    for s in &outcome.series {
        writer.write(s)?;
    }
    for (name, doc) in &outcome.documents {
        let bytes = serde_json::to_vec_pretty(doc).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        write_atomic(&dir.join(name), &bytes)?;
    }
    let manifest = RunManifest {
        config: config.clone(),
        code_version: crate::CODE_VERSION.to_string(),
        generator: dfl_core::rng::GENERATOR.to_string(),
        qubit_budget: dfl_core::statevector::qubit_budget(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: writer.finish(),
        summary: outcome.summary,
    };
    write_manifest(dir, &manifest)?;
    match outcome.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(manifest),
    }
}

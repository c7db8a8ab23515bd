//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use dfl_core::mitigation::{MitigationMethod, NormalizationMode, ReferenceOperator};
use dfl_core::{Boundary, CircuitBackend, InitialStateSpec, LatticeSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Imbalance,
    Renyi,
    Greens,
    NoisyMitigated,
    SectorScaling,
    DecompVerify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Circuit,
    Noisy,
    Ed,
    FloquetEd,
    Sector,
}

impl Backend {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Backend::Noisy | Backend::Sector)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: usize,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    #[serde(default = "one")]
    pub j: f64,
    pub h: f64,
    pub period: f64,
}

fn default_boundary() -> Boundary {
    Boundary::Open
}

fn one() -> f64 {
    1.0
}

impl LatticeConfig {
    pub fn spec(&self) -> Result<LatticeSpec, CliError> {
        Ok(LatticeSpec::new(self.sites, self.boundary, self.j, self.h, self.period)?)
    }
}

/// Bond preparation of an initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondPreparation {
    ZUp,
    XPlus,
    XMinus,
    /// Bonds chosen so every charge equals `charge`.
    UniformCharge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub label: String,
    /// Occupation string such as `"11110000"`; the domain wall when absent.
    #[serde(default)]
    pub occupation: Option<String>,
    pub bonds: BondPreparation,
    #[serde(default = "plus_one")]
    pub charge: i8,
}

fn plus_one() -> i8 {
    1
}

impl InitConfig {
    pub fn occupation(&self, sites: usize) -> Result<Vec<bool>, CliError> {
        match &self.occupation {
            None => Ok(InitialStateSpec::domain_wall(sites)),
            Some(s) => {
                let occ = InitialStateSpec::parse_occupation(s)?;
                if occ.len() != sites {
                    return Err(CliError::Config(format!(
                        "initial state '{}' has {} sites, lattice has {sites}",
                        self.label,
                        occ.len()
                    )));
                }
                Ok(occ)
            }
        }
    }

    pub fn state(&self, spec: &LatticeSpec) -> Result<InitialStateSpec, CliError> {
        let occ = self.occupation(spec.sites)?;
        let bonds = spec.bond_count();
        let uniform = |p| InitialStateSpec {
            occupation: occ.clone(),
            bonds: vec![p; bonds],
        };
        Ok(match self.bonds {
            BondPreparation::ZUp => InitialStateSpec::z_up(occ.clone(), bonds),
            BondPreparation::XPlus => uniform(dfl_core::BondPolarization::XPlus),
            BondPreparation::XMinus => uniform(dfl_core::BondPolarization::XMinus),
            BondPreparation::UniformCharge => InitialStateSpec::uniform_charge(occ.clone(), spec.boundary, self.charge)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Single-qubit probability; `p2 / 10` when absent.
    #[serde(default)]
    pub p1: Option<f64>,
    #[serde(default)]
    pub readout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    #[serde(default = "default_methods")]
    pub methods: Vec<MitigationMethod>,
    #[serde(default)]
    pub normalization: NormalizationMode,
    #[serde(default)]
    pub reference_operator: ReferenceOperator,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_tolerance")]
    pub plateau_tolerance: f64,
    /// Number of halvings tried by strategy A.
    #[serde(default = "default_schedule")]
    pub schedule_len: usize,
}

fn default_methods() -> Vec<MitigationMethod> {
    vec![MitigationMethod::StrategyA, MitigationMethod::StrategyB, MitigationMethod::FullEcho]
}

fn default_floor() -> f64 {
    dfl_core::mitigation::DEFAULT_FLOOR
}

fn default_tolerance() -> f64 {
    dfl_core::mitigation::DEFAULT_PLATEAU_TOLERANCE
}

fn default_schedule() -> usize {
    14
}

impl Default for MitigationConfig {
    fn default() -> Self {
        MitigationConfig {
            methods: default_methods(),
            normalization: NormalizationMode::default(),
            reference_operator: ReferenceOperator::default(),
            floor: default_floor(),
            plateau_tolerance: default_tolerance(),
            schedule_len: default_schedule(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    /// Entangling gate set of the compiled circuit.
    #[serde(default = "default_gates")]
    pub gates: CircuitBackend,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub inits: Vec<InitConfig>,
    #[serde(default)]
    pub n_steps: usize,
    /// Measurement shots per trajectory; zero records exact expectations only.
    #[serde(default)]
    pub shots: usize,
    #[serde(default)]
    pub n_traj: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Chain lengths for RENYI; the lattice length when empty.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Field values for SECTOR_SCALING.
    #[serde(default)]
    pub h_values: Vec<f64>,
    /// Sampled sectors for the sector solver; every sector when absent.
    #[serde(default)]
    pub sectors: Option<usize>,
    /// Sites `(j, k)` of the Green's function.
    #[serde(default)]
    pub greens_sites: Option<(usize, usize)>,
    /// Random draws for DECOMP_VERIFY.
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub mitigation: MitigationConfig,
}

fn default_backend() -> Backend {
    Backend::Circuit
}

fn default_gates() -> CircuitBackend {
    CircuitBackend::Cnot
}

fn default_draws() -> usize {
    50
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a TOML config, or the config stored in a JSON run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: crate::manifest::RunManifest =
                serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            return Ok(m.config);
        }
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| Err(CliError::Config(m));
        let spec = self.lattice.spec()?;
        let stochastic = self.backend.is_stochastic() && !(self.backend == Backend::Sector && self.sectors.is_none())
            || self.kind == ExperimentKind::NoisyMitigated
            || self.shots > 0;
        if stochastic && self.seed.is_none() {
            return cfg("a seed is required for stochastic runs".into());
        }
        let needs_inits = matches!(
            self.kind,
            ExperimentKind::Imbalance | ExperimentKind::Renyi | ExperimentKind::Greens | ExperimentKind::NoisyMitigated
        );
        if needs_inits && self.inits.is_empty() {
            return cfg(format!("{:?} needs at least one initial state", self.kind));
        }
        for init in &self.inits {
            init.state(&spec)?;
        }
        match self.kind {
            ExperimentKind::Imbalance | ExperimentKind::Renyi => {
                if self.n_steps == 0 {
                    return cfg("n_steps must be positive".into());
                }
                if self.backend == Backend::Noisy && (self.noise.is_none() || self.n_traj == 0) {
                    return cfg("the noisy backend needs [noise] and n_traj".into());
                }
                if self.kind == ExperimentKind::Renyi && matches!(self.backend, Backend::Noisy | Backend::Sector) {
                    return cfg("RENYI runs on the circuit, ed or floquet-ed backend".into());
                }
            }
            ExperimentKind::Greens => {
                if self.backend != Backend::Ed {
                    return cfg("GREENS runs on the ed backend".into());
                }
                if self.greens_sites.is_none() || self.n_steps == 0 {
                    return cfg("GREENS needs greens_sites and n_steps".into());
                }
            }
            ExperimentKind::NoisyMitigated => {
                if self.noise.is_none() || self.n_traj == 0 || self.n_steps == 0 {
                    return cfg("NOISY_MITIGATED needs [noise], n_traj and n_steps".into());
                }
                if self.mitigation.methods.is_empty() {
                    return cfg("no mitigation methods selected".into());
                }
            }
            ExperimentKind::SectorScaling => {
                if self.h_values.is_empty() || self.n_steps == 0 {
                    return cfg("SECTOR_SCALING needs h_values and n_steps".into());
                }
            }
            ExperimentKind::DecompVerify => {
                if self.draws == 0 {
                    return cfg("draws must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec, CliError> {
        self.lattice.spec()
    }
}

//! Experiment runner: configurations, backend dispatch, series files and
//! run manifests.

pub mod compare;
pub mod config;
pub mod error;
pub mod manifest;
pub mod run;

pub use compare::{compare, CompareReport, Metric};
pub use config::{Backend, ExperimentKind, RunConfig};
pub use error::{CliError, ErrorRecord};
pub use manifest::{read_series, RunManifest};
pub use run::{execute, run};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Environment variable holding the statevector memory budget in MiB.
pub const MEMORY_ENV: &str = "DFL_MEMORY_MB";

/// Widest statevector that fits in `mib` MiB at 16 bytes per amplitude.
pub fn qubits_for_memory(mib: u64) -> usize {
    let amps = mib.saturating_mul(1 << 20) / 16;
    if amps == 0 {
        0
    } else {
        63 - amps.leading_zeros() as usize
    }
}

/// Applies the memory budget from the environment, if set.
pub fn apply_memory_budget() -> Result<(), CliError> {
    match std::env::var(MEMORY_ENV) {
        Err(_) => Ok(()),
        Ok(v) => {
            let mib: u64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{MEMORY_ENV} must be a whole number of MiB, got '{v}'")))?;
            dfl_core::statevector::set_qubit_budget(qubits_for_memory(mib));
            Ok(())
        }
    }
}

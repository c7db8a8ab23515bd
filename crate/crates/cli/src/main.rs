use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dfl_bench::config::{ExperimentKind, LatticeConfig};
use dfl_bench::{apply_memory_budget, compare, read_series, run, Backend, CliError, Metric, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dfl-bench", version, about = "Disorder-free localization benchmark runner")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Run configuration (TOML) or a previous run manifest (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// Run the decomposition verification suite.
    #[arg(long)]
    verify: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compares two series files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "max-abs")]
        metric: Metric,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

fn verify_config() -> RunConfig {
    RunConfig {
        kind: ExperimentKind::DecompVerify,
        backend: Backend::Circuit,
        gates: dfl_core::CircuitBackend::Cnot,
        lattice: LatticeConfig {
            sites: 4,
            boundary: dfl_core::Boundary::Open,
            j: 1.0,
            h: 1.0,
            period: 0.25,
        },
        inits: Vec::new(),
        n_steps: 0,
        shots: 0,
        n_traj: 0,
        seed: Some(0),
        output: None,
        sizes: Vec::new(),
        h_values: Vec::new(),
        sectors: None,
        greens_sites: None,
        draws: 50,
        noise: None,
        mitigation: Default::default(),
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    apply_memory_budget()?;
    if let Some(Command::Compare { a, b, metric, tolerance }) = cli.command {
        let report = compare(&read_series(&a)?, &read_series(&b)?, metric, tolerance)?;
        println!("{}", serde_json::to_string(&report).map_err(|e| CliError::Io(std::io::Error::other(e)))?);
        return if report.passed {
            Ok(())
        } else {
            Err(CliError::Verification(format!("{:?} = {:e} exceeds {:e}", metric, report.value, tolerance)))
        };
    }
    let mut config = match (&cli.config, cli.verify) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, true) => verify_config(),
        (None, false) => return Err(CliError::Config("--config is required unless --verify is given".into())),
    };
    if cli.verify {
        config.kind = ExperimentKind::DecompVerify;
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(backend) = cli.backend {
        config.backend = backend;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    let dir = config.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    let manifest = run(&config, &dir)?;
    for f in &manifest.outputs {
        println!("{} {} rows sha256={}", dir.join(&f.file).display(), f.rows, f.sha256);
    }
    for (k, v) in &manifest.summary {
        println!("{k}: {v}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::to_string(&e.record()).unwrap_or_else(|_| format!("{{\"message\":{:?}}}", e.to_string()));
            eprintln!("{record}");
            if let Some(dir) = out {
                // best effort: the directory may be the reason for the failure
                let _ = dfl_bench::manifest::write_atomic(&dir.join("error.json"), record.as_bytes());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

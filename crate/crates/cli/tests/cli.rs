use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dfl_bench::{compare, read_series, Metric, RunManifest};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dfl-bench"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "exit {:?}\nstdout {}\nstderr {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_IMBALANCE: &str = r#"
kind = "imbalance"
n_steps = 12

[lattice]
sites = 4
h = 1.0
period = 0.25

[[inits]]
label = "z_up"
bonds = "z_up"

[[inits]]
label = "x_uniform"
bonds = "uniform_charge"
"#;

#[test]
fn imbalance_run_writes_series_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_IMBALANCE);
    let out = tmp.path().join("out");
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let m = manifest(&out);
    assert_eq!(m.outputs.len(), 2);
    let text = std::fs::read_to_string(out.join("z_up.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,value,stderr,label"));
    assert_eq!(text.lines().count(), 14);
    let s = read_series(&out.join("z_up.csv")).unwrap();
    assert_eq!(s.values[0], 1.0);
}

#[test]
fn circuit_and_floquet_ed_backends_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_IMBALANCE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--backend", "circuit"]);
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--backend", "floquet-ed"]);
    for f in ["z_up.csv", "x_uniform.csv"] {
        let r = compare(&read_series(&a.join(f)).unwrap(), &read_series(&b.join(f)).unwrap(), Metric::MaxAbs, 1e-8).unwrap();
        assert!(r.passed, "{f}: {r:?}");
    }
    let out = run_ok(&[
        "compare",
        a.join("z_up.csv").to_str().unwrap(),
        b.join("z_up.csv").to_str().unwrap(),
        "--tolerance",
        "1e-8",
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"passed\":true"));
}

#[test]
fn sector_backend_matches_exact_evolution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_IMBALANCE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--backend", "ed"]);
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--backend", "sector"]);
    for f in ["z_up.csv", "x_uniform.csv"] {
        let r = compare(&read_series(&a.join(f)).unwrap(), &read_series(&b.join(f)).unwrap(), Metric::MaxAbs, 1e-9).unwrap();
        assert!(r.passed, "{f}: {r:?}");
    }
}

const SMALL_NOISY: &str = r#"
kind = "noisy_mitigated"
n_steps = 4
n_traj = 20
shots = 4
seed = 11

[lattice]
sites = 4
h = 1.0
period = 0.5

[[inits]]
label = "z_up"
bonds = "z_up"

[noise]
p2 = 0.01

[mitigation]
methods = ["postselect", "strategy_b", "full_echo"]
"#;

#[test]
fn stochastic_runs_reproduce_from_their_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_NOISY);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    let replay = a.join("manifest.json");
    run_ok(&["--config", replay.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert!(!ma.outputs.is_empty());
    assert_eq!(ma.outputs, mb.outputs);
    for f in &ma.outputs {
        assert_eq!(std::fs::read(a.join(&f.file)).unwrap(), std::fs::read(b.join(&f.file)).unwrap());
    }

    // another seed changes the noisy data
    let c = tmp.path().join("c");
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", c.to_str().unwrap(), "--seed", "12"]);
    let raw = |d: &Path| std::fs::read(d.join("z_up_raw.csv")).unwrap();
    assert_ne!(raw(&a), raw(&c));
}

fn error_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &SMALL_NOISY.replace("seed = 11\n", ""));
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "config");
    assert!(tmp.path().join("o/error.json").exists());

    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &SMALL_IMBALANCE.replace("sites = 4", "sites = 10").replace("label = \"x_uniform\"", "label = \"x\""));
    let out = bin()
        .env(dfl_bench::MEMORY_ENV, "1")
        .args(["--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_of(&out)["kind"], "capacity");
}

#[test]
fn convergence_errors_exit_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL_NOISY
        .replace("[\"postselect\", \"strategy_b\", \"full_echo\"]", "[\"strategy_a\"]\nschedule_len = 2\nplateau_tolerance = 1e-12");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = bin().args(["--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_of(&out)["kind"], "convergence");
}

#[test]
fn verify_flag_reports_all_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("o");
    let out = run_ok(&["--verify", "--out", o.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches(": pass").count(), 5, "{text}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(o.join("decomp_verify.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 5);
}

#[test]
fn greens_and_renyi_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let greens = r#"
kind = "greens"
backend = "ed"
n_steps = 8
greens_sites = [2, 2]

[lattice]
sites = 4
h = 1.0
period = 0.25

[[inits]]
label = "z_up"
bonds = "z_up"
"#;
    let cfg = write_config(tmp.path(), "g.toml", greens);
    let o = tmp.path().join("g");
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    let re = read_series(&o.join("z_up_G22_re.csv")).unwrap();
    // site 2 starts occupied
    assert!((re.values[0] - 1.0).abs() < 1e-12);

    let renyi = SMALL_IMBALANCE.replace("kind = \"imbalance\"", "kind = \"renyi\"\nsizes = [4, 6]");
    let cfg = write_config(tmp.path(), "r.toml", &renyi);
    let o = tmp.path().join("r");
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap(), "--backend", "floquet-ed"]);
    let m = manifest(&o);
    let files: Vec<&str> = m.outputs.iter().map(|f| f.file.as_str()).collect();
    assert_eq!(files, ["z_up_L4.csv", "z_up_L6.csv", "x_uniform_L4.csv", "x_uniform_L6.csv"]);
}

#[test]
fn sector_scaling_run() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
kind = "sector_scaling"
backend = "sector"
n_steps = 4
sectors = 50
seed = 3
h_values = [0.5, 1.0]

[lattice]
sites = 10
h = 1.0
period = 0.5
"#;
    let cfg = write_config(tmp.path(), "s.toml", text);
    let o = tmp.path().join("s");
    run_ok(&["--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    let s = read_series(&o.join("h_0.5.csv")).unwrap();
    assert!((s.values[0] - 1.0).abs() < 1e-12);
    assert!(s.stderr[3] > 0.0);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = dfl_bench::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            c.validate().unwrap();
            n += 1;
        }
    }
    assert_eq!(n, 6);
}

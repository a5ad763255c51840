use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

const BASE: &str = r#"
[geometry]
nx = 8
ny = 9

[model]
mode = "robin"
k = 0.1

[coupling]
kind = "affine"
alpha = 2.0
eta = 0.5

[initial]
u0 = { kind = "sinusoidal", value = 0.5, amplitude = 0.1 }
phi0 = "compatible"

[run]
dt = 1e-3
t_end = 0.01
sample_every = 5
"#;

fn bsac(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bsac"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn setup(config: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

#[test]
fn run_writes_samples_energy_and_summary() {
    let dir = setup(BASE);
    let (code, err) = bsac(dir.path(), &["run", "--config", "run.toml", "--out", "out"]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    for name in [
        "energy.csv",
        "summary.toml",
        "fields_t0.000000.csv",
        "fields_t0.005000.csv",
        "fields_t0.010000.csv",
        "surface_t0.010000.csv",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    assert_eq!(energy.lines().count(), 1 + 11);
    let fields = fs::read_to_string(out.join("fields_t0.010000.csv")).unwrap();
    assert_eq!(fields.lines().count(), 1 + 8 * 9);
}

#[test]
fn limit_run_reconstructs_phi() {
    let dir = setup(BASE);
    let (code, err) = bsac(
        dir.path(),
        &["run", "--config", "run.toml", "--out", "out", "--mode", "limit"],
    );
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    let header = fs::read_to_string(out.join("fields_t0.010000.csv")).unwrap();
    assert!(header.lines().next().unwrap().contains("phi_reconstructed"));
    assert!(!out.join("surface_t0.010000.csv").exists());
}

#[test]
fn bad_config_exits_with_one() {
    let dir = setup(&BASE.replace("k = 0.1", "k = 0.1\nbogus = 3"));
    let (code, _) = bsac(dir.path(), &["run", "--config", "run.toml", "--out", "out"]);
    assert_eq!(code, 1);
    let dir = setup(BASE);
    let (code, _) = bsac(dir.path(), &["run", "--config", "missing.toml", "--out", "out"]);
    assert_eq!(code, 1);
}

#[test]
fn steady_cap_exits_with_two() {
    let dir = setup(BASE);
    let (code, err) = bsac(
        dir.path(),
        &["steady", "--config", "run.toml", "--out", "out", "--max-iter", "2"],
    );
    assert_eq!(code, 2, "{err}");
}

#[test]
fn steady_converges() {
    let dir = setup(&BASE.replace("dt = 1e-3\nt_end = 0.01", "dt = 5e-2\nt_end = 1.0"));
    let (code, err) = bsac(
        dir.path(),
        &["steady", "--config", "run.toml", "--out", "out", "--tol", "1e-7"],
    );
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("out/fields_steady.csv").exists());
    assert!(dir.path().join("out/fit.toml").exists());
}

#[test]
fn sweep_k_writes_table_and_fit() {
    let dir = setup(BASE);
    let (code, err) = bsac(
        dir.path(),
        &["sweep-k", "--config", "run.toml", "--out", "out", "--ks", "1e-1:1e-3:5log"],
    );
    assert!(code == 0 || code == 2, "{err}");
    let table = fs::read_to_string(dir.path().join("out/table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 5);
    let fit = fs::read_to_string(dir.path().join("out/fit.toml")).unwrap();
    assert!(fit.contains("pass"));
}

#[test]
fn ctsdep_writes_ratios() {
    let dir = setup(BASE);
    let (code, err) = bsac(
        dir.path(),
        &["ctsdep", "--config", "run.toml", "--out", "out", "--which", "fGamma"],
    );
    assert_eq!(code, 0, "{err}");
    let rows = fs::read_to_string(dir.path().join("out/ctsdep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 3);
}

#[test]
fn unknown_datum_exits_with_one() {
    let dir = setup(BASE);
    let (code, _) = bsac(
        dir.path(),
        &["ctsdep", "--config", "run.toml", "--out", "out", "--which", "g"],
    );
    assert_eq!(code, 1);
}

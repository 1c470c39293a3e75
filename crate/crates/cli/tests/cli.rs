use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn hplattice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hplattice"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn verify_series_defaults_exit_zero() {
    let dir = tempdir().unwrap();
    let o = hplattice(&["verify", "--suite", "series", "--seed", "1", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["series.json", "summary.csv", "timings.json", "config.resolved.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("resolved configuration"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("series.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 36);
}

#[test]
fn unknown_verb_is_a_usage_error() {
    let o = hplattice(&["frobnicate"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let o = hplattice(&["verify", "--seed", "1", "--bogus", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none(), "nothing written before parsing");
}

#[test]
fn verify_requires_a_seed() {
    let dir = tempdir().unwrap();
    assert_eq!(code(&hplattice(&["verify", "--suite", "series", "--out", &out_arg(dir.path())])), 2);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let o = hplattice(&["verify", "--suite", "nope", "--seed", "1", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_atom_is_deterministic() {
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    for d in [&a, &b] {
        let o = hplattice(&[
            "gen-atom", "--n", "2", "--p", "1", "--L", "0", "--cube-halfwidth", "1", "--seed", "7", "--out",
            &out_arg(d.path()),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let x = fs::read(a.path().join("atom.json")).unwrap();
    let y = fs::read(b.path().join("atom.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn generated_atom_validates_and_round_trips() {
    let dir = tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = hplattice(&["gen-atom", "--n", "2", "--p", "0.8", "--p0", "2", "--L", "1", "--cube-halfwidth", "2", "--seed", "3", "--out", &out]);
    assert_eq!(code(&o), 0);
    let atom_path = dir.path().join("atom.json");
    let text = fs::read_to_string(&atom_path).unwrap();
    let atom = hplattice::atoms::Atom::from_json(&text).unwrap();
    assert_eq!(atom.to_json().unwrap() + "\n", text);

    let check = tempdir().unwrap();
    let o = hplattice(&["validate-atom", "--input", atom_path.to_str().unwrap(), "--out", &out_arg(check.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(check.path().join("validation.json")).unwrap()).unwrap();
    assert!(v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn scaled_atom_fails_validation_with_exit_one() {
    let dir = tempdir().unwrap();
    let out = out_arg(dir.path());
    hplattice(&["gen-atom", "--n", "1", "--p", "1", "--L", "0", "--cube-halfwidth", "2", "--seed", "1", "--out", &out]);
    let mut atom = hplattice::atoms::Atom::from_json(&fs::read_to_string(dir.path().join("atom.json")).unwrap()).unwrap();
    atom.data = atom.data.scale(2.0);
    atom.exact = None;
    let bad = dir.path().join("bad.json");
    fs::write(&bad, atom.to_json().unwrap()).unwrap();
    let o = hplattice(&["validate-atom", "--input", bad.to_str().unwrap(), "--out", &out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("a2"));
}

#[test]
fn infeasible_atom_is_reported() {
    let dir = tempdir().unwrap();
    let o = hplattice(&["gen-atom", "--n", "2", "--p", "1", "--L", "4", "--cube-halfwidth", "1", "--seed", "1", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn invalid_config_names_the_relation() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"boundedness": {"regimes": [{"name": "low", "n": 2, "p": 0.5, "alpha": 0.5, "L": 1}]}}"#).unwrap();
    let out = dir.path().join("out");
    let o = hplattice(&["verify", "--suite", "series", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("p ≤ (n−1)/n"), "{}", String::from_utf8_lossy(&o.stderr));

    fs::write(&cfg, "{ not json").unwrap();
    let o = hplattice(&["verify", "--suite", "series", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed to parse"));
}

#[test]
fn resolved_config_reloads_as_config() {
    let dir = tempdir().unwrap();
    let o = hplattice(&["verify", "--suite", "series", "--seed", "5", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 0);
    let mut resolved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("config.resolved.json")).unwrap()).unwrap();
    let obj = resolved.as_object_mut().unwrap();
    for k in ["verb", "suites", "seed"] {
        obj.remove(k);
    }
    let cfg = hplattice::verify::ExperimentConfig::from_json(&resolved.to_string()).unwrap();
    assert_eq!(cfg, hplattice::verify::ExperimentConfig::default().normalized().unwrap());
}

#[test]
fn kernel_table_and_operators_write_grid_files() {
    let dir = tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = hplattice(&["kernel-table", "--kernel", "fractional", "--n", "2", "--alpha", "1", "--radius", "4", "--out", &out]);
    assert_eq!(code(&o), 0);
    let table = hplattice::GridFunction::read_json(&dir.path().join("kernel.json")).unwrap();
    assert_eq!(table.get(&[3, 4]), 0.2);
    assert_eq!(table.get(&[0, 0]), 0.0);
    let csv = fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(csv.lines().count(), 82);

    let delta = hplattice::GridFunction::delta(&hplattice::LatticePoint::origin(2));
    let input = dir.path().join("delta.json");
    delta.write_json(&input).unwrap();
    let o = hplattice(&["apply-riesz", "--input", input.to_str().unwrap(), "--axis", "1", "--radius", "3", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = hplattice::GridFunction::read_json(&dir.path().join("riesz.json")).unwrap();
    assert!((r.get(&[1, 0]) - 1.0).abs() < 1e-12);
    let o = hplattice(&["apply-potential", "--input", input.to_str().unwrap(), "--alpha", "1", "--radius", "5", "--backend", "direct", "--out", &out]);
    assert_eq!(code(&o), 0);
    let p = hplattice::GridFunction::read_json(&dir.path().join("potential.json")).unwrap();
    assert_eq!(p.get(&[3, 4]), 0.2);
}

#[test]
fn hp_norm_and_molecule_norm() {
    let dir = tempdir().unwrap();
    let out = out_arg(dir.path());
    let dipole = hplattice::GridFunction::from_points(&[
        (hplattice::LatticePoint::new(vec![0, 0]), 0.5),
        (hplattice::LatticePoint::new(vec![1, 0]), -0.5),
    ])
    .unwrap();
    let input = dir.path().join("dipole.json");
    dipole.write_json(&input).unwrap();
    for ch in ["riesz", "maximal"] {
        let o = hplattice(&["hp-norm", "--input", input.to_str().unwrap(), "--p", "1", "--characterization", ch, "--window", "16", "--out", &out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hp_norm.json")).unwrap()).unwrap();
        assert_eq!(rep["characterization"], ch);
        assert!(rep["total"]["windowed"].as_f64().unwrap() > 0.0);
    }
    let o = hplattice(&["molecule-norm", "--input", input.to_str().unwrap(), "--center", "0,0", "--p", "0.8", "--p0", "2", "--r", "0.875", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("molecule_norm.json")).unwrap()).unwrap();
    assert!(m["norm"].as_f64().unwrap() > 0.0);
    assert!(m["theta"].as_f64().unwrap() > 0.0 && m["theta"].as_f64().unwrap() < 1.0);
}

#[test]
fn hl_threads_must_be_positive() {
    let dir = tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hplattice"))
        .env("HL_THREADS", "0")
        .args(["verify", "--suite", "series", "--seed", "1", "--out", &out_arg(dir.path())])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_hplattice"))
        .env("HL_THREADS", "2")
        .args(["verify", "--suite", "series", "--seed", "1", "--out", &out_arg(dir.path())])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

use std::path::Path;
use std::process::Command;

fn ltbf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ltbf")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, "n_h = 4\nn_v = 2\nN_UE = 3\nn_trials = 2\nseed = 5\nd = [2, 3]\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fit_poly_writes_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = ltbf(&["fit-poly", "--d", "3", "--B", "16", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["d"], 3);
    assert_eq!(v["B"], 16.0);
    assert_eq!(v["beta"].as_array().unwrap().len(), 3);
    assert!(v["minimax_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn run_then_cdf_reproduces_cdf_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = ltbf(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--trials", "3", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["records.csv", "cdf.csv", "flops.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["n_trials"], 3);

    let cdf2 = dir.path().join("cdf2.csv");
    let o = ltbf(&["cdf", "--in", out.join("records.csv").to_str().unwrap(), "--out", cdf2.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(out.join("cdf.csv")).unwrap(), std::fs::read(cdf2).unwrap());
}

#[test]
fn run_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(ltbf(&["run", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]).status.success());
    assert!(ltbf(&["run", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "2"]).status.success());
    assert_eq!(std::fs::read(a.join("records.csv")).unwrap(), std::fs::read(b.join("records.csv")).unwrap());
}

#[test]
fn flops_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("defaults.toml");
    std::fs::write(&cfg, "").unwrap();
    let o = ltbf(&["flops", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["total_instantaneous"].as_f64().unwrap() > v["total_ltbf_exact"].as_f64().unwrap());
}

#[test]
fn bad_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "unknown_key = 3\n").unwrap();
    let o = ltbf(&["flops", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["reference_16x16.toml", "flops_32x32.toml"] {
        let o = ltbf(&["flops", "--config", root.join(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

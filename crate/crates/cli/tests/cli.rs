//! End-to-end checks of the command-line surface: output schemas, manifest
//! replay, config-file precedence, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ampcs"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ampcs-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn minimax_cap_is_exact_and_versioned() {
    let dir = tmpdir("cap");
    let out = dir.join("cap.csv");
    run_ok(&[
        "minimax",
        "--denoiser",
        "cap",
        "--eps",
        "0.0,0.2,1.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out);
    assert_eq!(
        rows[0],
        vec!["denoiser", "epsilon", "M", "tau1", "tau2", "mu_star", "B", "I_upper", "I_lower"]
    );
    assert_eq!(rows[2][2], "0.6");
    assert_eq!(rows[3][2], "1");
    // every run leaves a manifest
    assert!(dir.join("cap.manifest.json").exists());
}

#[test]
fn minimax_firm_emits_thresholds() {
    let dir = tmpdir("firm");
    let out = dir.join("firm.csv");
    run_ok(&["minimax", "--denoiser", "firm", "--eps", "0.05", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out);
    let m: f64 = rows[1][2].parse().unwrap();
    assert!((m - 0.1921).abs() < 2e-3);
    let t1: f64 = rows[1][3].parse().unwrap();
    let t2: f64 = rows[1][4].parse().unwrap();
    assert!(t1 > 0.0 && t2 > t1);
}

#[test]
fn risk_reference_rows() {
    let dir = tmpdir("risk");
    let out = dir.join("mono.csv");
    run_ok(&[
        "risk", "--kind", "mono", "--len", "1,2", "--n-mc", "20000", "--seed", "5", "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out);
    assert_eq!(rows[1][5], "1"); // r(1) = 1 exactly
    let out = dir.join("js.csv");
    run_ok(&["risk", "--kind", "james-stein", "--block", "50", "--mu", "0", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out);
    let r0: f64 = rows[1][5].parse().unwrap();
    assert!((r0 - (1.0 + 0.752 / 48f64.sqrt())).abs() < 0.01);
    let out = dir.join("soft.csv");
    run_ok(&["risk", "--kind", "soft", "--tau", "0", "--mu", "0,3", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out);
    for r in &rows[1..] {
        let v: f64 = r[5].parse().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn se_traces_above_and_below_transition() {
    let dir = tmpdir("se");
    // above the soft transition at eps=0.05 (M ≈ 0.2039): trace → 0
    let out = dir.join("above.csv");
    run_ok(&[
        "se", "--kind", "soft", "--epsilon", "0.05", "--delta", "0.25", "--mu", "inf",
        "--out", out.to_str().unwrap(),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("above.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["hfp"], 0.0);
    assert_eq!(summary["converged"], true);
    // below: bounded away from zero with a positive fixed point
    let out = dir.join("below.csv");
    run_ok(&[
        "se", "--kind", "soft", "--epsilon", "0.05", "--delta", "0.15", "--mu", "inf",
        "--out", out.to_str().unwrap(),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("below.summary.json")).unwrap())
            .unwrap();
    assert!(summary["hfp"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["converged"], false);
    // δ = 1 converges trivially for any ε with M < 1
    let out = dir.join("full.csv");
    run_ok(&[
        "se", "--kind", "soft", "--epsilon", "0.3", "--delta", "1.0", "--out",
        out.to_str().unwrap(),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("full.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["hfp"], 0.0);
}

#[test]
fn pt_rejects_zero_trials_and_is_reproducible() {
    let dir = tmpdir("pt");
    let out = dir.join("grid.csv");
    let status = bin()
        .args([
            "pt", "--kind", "soft", "--epsilon", "0.05", "--n", "200", "--trials", "0",
            "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "zero trials must exit 2");

    let args = [
        "pt",
        "--kind",
        "soft",
        "--epsilon",
        "0.05",
        "--n",
        "200",
        "--trials",
        "6",
        "--delta-grid",
        "0.15,0.30",
        "--t-max",
        "150",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ];
    run_ok(&args);
    let first = fs::read(&out).unwrap();
    run_ok(&args);
    assert_eq!(first, fs::read(&out).unwrap(), "same seed must be bit-identical");
    assert!(dir.join("grid.fit.json").exists());
}

#[test]
fn scaling_gamma_table() {
    let dir = tmpdir("scaling");
    let input = dir.join("offsets.csv");
    let mut text = String::from("label,N,value,se\n");
    for n in [1000u32, 2000, 4000] {
        text.push_str(&format!("a,{n},{},0.0005\n", 2.0 * (n as f64).powf(-1.0 / 3.0)));
    }
    fs::write(&input, text).unwrap();
    let out = dir.join("r2.csv");
    run_ok(&[
        "scaling", "--mode", "offset", "--input", input.to_str().unwrap(), "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out);
    // default exponent list {1/3, 1/2, 2/3, 3/4, 1}
    assert_eq!(rows.len(), 6);
    let r2: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(r2[0] > 0.99999 && r2[0] > r2[4]);
    // empty input is a validation error
    fs::write(&input, "label,N,value,se\n").unwrap();
    let status = bin()
        .args([
            "scaling", "--mode", "offset", "--input", input.to_str().unwrap(), "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn penalty_outputs_and_rejections() {
    let dir = tmpdir("penalty");
    let out = dir.join("soft.csv");
    run_ok(&["penalty", "--kind", "soft", "--tau", "0.8", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out);
    assert_eq!(rows[0], vec!["x", "J"]);
    let (x, j): (f64, f64) = (rows[300][0].parse().unwrap(), rows[300][1].parse().unwrap());
    assert!((j - 0.8 * x).abs() < 5e-3);
    // hard thresholding has no implied penalty: validation failure
    let status = bin()
        .args(["penalty", "--kind", "hard", "--tau", "0.8", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let err = String::from_utf8_lossy(&status.stderr).to_string();
    assert!(err.contains("inverse"), "diagnostic should explain the rejection: {err}");
}

#[test]
fn replay_reproduces_outputs_byte_for_byte() {
    let dir = tmpdir("replay");
    let out = dir.join("curve.csv");
    run_ok(&["minimax", "--denoiser", "soft", "--eps", "0.05,0.1", "--out", out.to_str().unwrap()]);
    let original = fs::read(&out).unwrap();
    fs::remove_file(&out).unwrap();
    run_ok(&["replay", "--manifest", dir.join("curve.manifest.json").to_str().unwrap()]);
    assert_eq!(original, fs::read(&out).unwrap());
}

#[test]
fn config_file_fills_flags_but_does_not_override() {
    let dir = tmpdir("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "denoiser=soft\neps=0.25\n").unwrap();
    let out = dir.join("from_cfg.csv");
    run_ok(&["minimax", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out);
    let m: f64 = rows[1][2].parse().unwrap();
    assert!((m - 0.5829).abs() < 1e-3, "config epsilon should apply");
    // explicit flag wins over the config value
    run_ok(&[
        "minimax", "--config", cfg.to_str().unwrap(), "--eps", "0.05", "--out",
        out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out);
    let m: f64 = rows[1][2].parse().unwrap();
    assert!((m - 0.2039).abs() < 1e-3, "flag must override config");
}

//! Reproducibility acceptance gate: the same config and seed must reproduce
//! a run's metrics and predictions bit for bit. Only wall-clock timings (and
//! the timestamped run id) may differ between executions.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").ok();
}

fn run_once(dir: &Path, out_name: &str) -> PathBuf {
    let out = Command::new(env!("CARGO_BIN_EXE_hpqrc"))
        .args(["run", "--config", "run.toml", "--out", out_name])
        .current_dir(dir)
        .env_remove("HPQRC_OUT_DIR")
        .output()
        .expect("spawn hpqrc");
    assert!(out.status.success(), "{out:?}");
    let root = dir.join(out_name);
    fs::read_dir(&root)
        .expect("out root")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .find(|p| p.is_dir())
        .expect("run directory")
}

/// Bit pattern of a TOML number, however it was serialized.
fn fbits(v: &toml::Value) -> u64 {
    match v {
        toml::Value::Float(f) => f.to_bits(),
        toml::Value::Integer(i) => (*i as f64).to_bits(),
        other => panic!("expected a number, got {other:?}"),
    }
}

#[test]
fn c11_rerun_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.toml"),
        "model = \"hpqrc\"
dataset = \"mackey_glass\"

[protocol]
washout = 500
n_train = 1000
n_test = 200
noise_sigma = 0.1
seed = 42

[hybrid.quantum]
n_qubits = 4
n_layers = 5

[hybrid.photonic]
n_virtual = 20
",
    )
    .unwrap();

    let dir_a = run_once(tmp.path(), "first");
    let dir_b = run_once(tmp.path(), "second");

    let manifest = |d: &Path| -> toml::Value {
        toml::from_str(&fs::read_to_string(d.join("manifest.toml")).expect("manifest"))
            .expect("parse")
    };
    let (a, b) = (manifest(&dir_a), manifest(&dir_b));

    let metric_bits = |m: &toml::Value| -> Vec<u64> {
        let t = &m["metrics"];
        vec![
            fbits(&t["nmse"]),
            fbits(&t["accuracy_pct"]),
            t["n_test"].as_integer().expect("n_test") as u64,
            t["feature_dim"].as_integer().expect("feature_dim") as u64,
        ]
    };
    let metrics_equal = metric_bits(&a) == metric_bits(&b);

    let bytes = |d: &Path, name: &str| fs::read(d.join(name)).expect("artifact");
    let preds_equal = bytes(&dir_a, "predictions.csv") == bytes(&dir_b, "predictions.csv");
    let config_equal = bytes(&dir_a, "config.toml") == bytes(&dir_b, "config.toml");

    // Timings are excluded from the guarantee but must be recorded.
    let timed = a["timings"]["total_s"].as_float().unwrap_or(0.0) > 0.0
        && b["timings"]["total_s"].as_float().unwrap_or(0.0) > 0.0;

    let ok = metrics_equal && preds_equal && config_equal && timed;
    let line = format!(
        "[acceptance] c11 rerun reproducibility: {} — metrics bitwise equal: {}, \
         predictions byte-equal: {}, config snapshot byte-equal: {}, timings recorded: {} \
         (nmse {:.6e})",
        if ok { "PASS" } else { "FAIL" },
        metrics_equal,
        preds_equal,
        config_equal,
        timed,
        f64::from_bits(metric_bits(&a)[0]),
    );
    report(&line);
    assert!(ok, "{line}");
}

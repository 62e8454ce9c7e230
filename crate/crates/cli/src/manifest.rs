//! Run manifests and the per-run output directory layout.
//!
//! Every run gets its own directory under the output root:
//!
//! ```text
//! <out>/<run_id>/manifest.toml     full record: config + metrics + timings
//! <out>/<run_id>/config.toml       config snapshot, directly re-runnable
//! <out>/<run_id>/predictions.csv   index,target,prediction
//! <out>/index.csv                  one summary row per run
//! ```
//!
//! The manifest embeds the complete config, so re-running it reproduces the
//! metrics bitwise (timings and timestamps aside). Floats are written in
//! shortest round-trip form and parse back to identical bits.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use hpqrc_core::experiment::{CellResult, DatasetKind};
use hpqrc_core::timing::ThroughputReport;

use crate::config::RunConfig;

pub const INDEX_FILE: &str = "index.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Unique within its output root (directory name of the run).
    pub run_id: String,
    pub timestamp_utc: String,
    pub toolkit_version: String,
    pub config: RunConfig,
    pub metrics: Metrics,
    pub timings: Timings,
    pub artifacts: Artifacts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metrics {
    pub nmse: f64,
    pub accuracy_pct: f64,
    pub n_test: usize,
    pub feature_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ar_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub throughput: Option<ThroughputReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    /// Wall-clock seconds for train + evaluate (excluded from
    /// reproducibility comparisons).
    pub total_s: f64,
}

/// Paths relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifacts {
    pub config_snapshot: String,
    pub predictions: String,
}

fn dataset_slug(dataset: &DatasetKind) -> String {
    match dataset {
        DatasetKind::Csv(path) => {
            let stem = Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "data".into());
            format!("csv-{stem}")
        }
        other => other.to_string(),
    }
}

/// `<model>-<dataset>-s<seed>-sig<sigma>-<timestamp>`, bumped with a counter
/// if that directory already exists.
fn make_run_id(cfg: &RunConfig, out_root: &Path, stamp: &str) -> String {
    let base = format!(
        "{}-{}-s{}-sig{}-{stamp}",
        cfg.model,
        dataset_slug(&cfg.dataset),
        cfg.protocol.seed,
        cfg.protocol.noise_sigma,
    );
    let mut id = base.clone();
    let mut k = 1;
    while out_root.join(&id).exists() {
        k += 1;
        id = format!("{base}-{k}");
    }
    id
}

fn write_predictions(path: &Path, targets: &[f64], preds: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["index", "target", "prediction"])?;
    for (i, (t, p)) in targets.iter().zip(preds).enumerate() {
        w.write_record([i.to_string(), t.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn append_index(out_root: &Path, m: &RunManifest) -> Result<()> {
    let path = out_root.join(INDEX_FILE);
    let fresh = !path.exists();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record([
            "run_id",
            "model",
            "dataset",
            "sigma",
            "seed",
            "nmse",
            "accuracy_pct",
            "path",
        ])?;
    }
    w.write_record([
        m.run_id.clone(),
        m.config.model.to_string(),
        m.config.dataset.to_string(),
        m.config.protocol.noise_sigma.to_string(),
        m.config.protocol.seed.to_string(),
        m.metrics.nmse.to_string(),
        m.metrics.accuracy_pct.to_string(),
        m.run_id.clone(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Persists one completed cell: run directory, config snapshot, predictions,
/// manifest, and an index row.
pub fn write_run(
    out_root: &Path,
    cfg: &RunConfig,
    cell: &CellResult,
    total_s: f64,
) -> Result<RunManifest> {
    fs::create_dir_all(out_root)
        .with_context(|| format!("creating {}", out_root.display()))?;
    let now = Utc::now();
    let run_id = make_run_id(cfg, out_root, &now.format("%Y%m%dT%H%M%SZ").to_string());
    let dir = out_root.join(&run_id);
    fs::create_dir(&dir).with_context(|| format!("creating {}", dir.display()))?;

    fs::write(dir.join("config.toml"), toml::to_string_pretty(cfg)?)
        .with_context(|| "writing config snapshot")?;
    write_predictions(&dir.join("predictions.csv"), &cell.targets, &cell.predictions)?;

    let manifest = RunManifest {
        run_id,
        timestamp_utc: now.to_rfc3339_opts(SecondsFormat::Secs, true),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        metrics: Metrics {
            nmse: cell.nmse,
            accuracy_pct: cell.accuracy_pct,
            n_test: cell.predictions.len(),
            feature_dim: cell.feature_dim,
            ar_order: cell.ar_order,
            throughput: cell.throughput,
        },
        timings: Timings { total_s },
        artifacts: Artifacts {
            config_snapshot: "config.toml".into(),
            predictions: "predictions.csv".into(),
        },
    };
    fs::write(dir.join(MANIFEST_FILE), toml::to_string_pretty(&manifest)?)
        .with_context(|| "writing manifest")?;
    append_index(out_root, &manifest)?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let m: RunManifest = toml::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(m)
}

/// Loads every `<dir>/*/manifest.toml`, sorted by run_id. Errors when the
/// directory holds no manifests at all.
pub fn scan_manifests(dir: &Path) -> Result<Vec<RunManifest>> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry?.path().join(MANIFEST_FILE);
        if path.is_file() {
            found.push(load_manifest(&path)?);
        }
    }
    if found.is_empty() {
        bail!("no run manifests found under {}", dir.display());
    }
    found.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(found)
}

/// Output root precedence: `--out` flag, then `HPQRC_OUT_DIR`, then `runs`.
pub fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HPQRC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

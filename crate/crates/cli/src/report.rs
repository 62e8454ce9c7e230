//! `report`: plot-ready CSV tables distilled from run manifests.
//!
//! Emits four files, each consumable by any plotting tool:
//! - `nmse_bars.csv`: per (model, dataset) mean NMSE with bootstrap 95% CI,
//!   taken at the lowest noise level present for that pair;
//! - `accuracy_vs_sigma.csv`: noise-robustness curves;
//! - `time_vs_accuracy.csv`: scatter of cell wall time against accuracy;
//! - `accuracy_vs_epoch.csv`: iterative-readout training curve, recomputed
//!   deterministically from the first hybrid manifest's config snapshot.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};

use hpqrc_core::data::make_supervised;
use hpqrc_core::experiment::{build_series, hpqrc_learning_curve, ModelKind};
use hpqrc_core::metrics::{bootstrap_ci, mean, sample_std};
use hpqrc_core::readout::IterConfig;

use crate::manifest::{scan_manifests, RunManifest};
use crate::{CmdError, CmdResult};

const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 1730;

/// (model, dataset, sigma-as-text) -> per-run metric triples.
type Groups = BTreeMap<(String, String, String), Vec<(f64, f64, f64)>>;

fn group(manifests: &[RunManifest]) -> Groups {
    let mut out: Groups = BTreeMap::new();
    for m in manifests {
        out.entry((
            m.config.model.to_string(),
            m.config.dataset.to_string(),
            m.config.protocol.noise_sigma.to_string(),
        ))
        .or_default()
        .push((m.metrics.nmse, m.metrics.accuracy_pct, m.timings.total_s));
    }
    out
}

fn write_nmse_bars(out: &Path, groups: &Groups) -> Result<()> {
    // Lowest sigma per (model, dataset); sigma text sorts "0" < "0.1" < "0.3".
    let mut best: BTreeMap<(String, String), (String, &Vec<(f64, f64, f64)>)> = BTreeMap::new();
    for ((model, dataset, sigma), rows) in groups {
        let key = (model.clone(), dataset.clone());
        match best.get(&key) {
            Some((s, _)) if s <= sigma => {}
            _ => {
                best.insert(key, (sigma.clone(), rows));
            }
        }
    }
    let path = out.join("nmse_bars.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["model", "dataset", "nmse_mean", "ci95_low", "ci95_high"])?;
    for ((model, dataset), (_, rows)) in &best {
        let nmses: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let m = mean(&nmses);
        let (lo, hi) = if nmses.len() >= 2 {
            let ci = bootstrap_ci(&nmses, BOOTSTRAP_RESAMPLES, 0.95, BOOTSTRAP_SEED)?;
            (ci.ci_low, ci.ci_high)
        } else {
            (m, m)
        };
        w.write_record([
            model.clone(),
            dataset.clone(),
            m.to_string(),
            lo.to_string(),
            hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_accuracy_vs_sigma(out: &Path, groups: &Groups) -> Result<()> {
    let path = out.join("accuracy_vs_sigma.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["model", "dataset", "sigma", "accuracy_mean", "accuracy_std", "n"])?;
    for ((model, dataset, sigma), rows) in groups {
        let accs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        w.write_record([
            model.clone(),
            dataset.clone(),
            sigma.clone(),
            mean(&accs).to_string(),
            sample_std(&accs).to_string(),
            rows.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_time_vs_accuracy(out: &Path, groups: &Groups) -> Result<()> {
    let path = out.join("time_vs_accuracy.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["model", "dataset", "sigma", "time_mean_s", "accuracy_mean", "n"])?;
    for ((model, dataset, sigma), rows) in groups {
        let accs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let times: Vec<f64> = rows.iter().map(|r| r.2).collect();
        w.write_record([
            model.clone(),
            dataset.clone(),
            sigma.clone(),
            mean(&times).to_string(),
            mean(&accs).to_string(),
            rows.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Re-runs the iterative ridge trainer for the first hybrid manifest and
/// converts its per-epoch loss to train-split accuracy. Deterministic given
/// the manifest (config snapshot + fixed trainer settings).
fn write_accuracy_vs_epoch(out: &Path, manifests: &[RunManifest]) -> Result<bool> {
    let Some(m) = manifests
        .iter()
        .find(|m| m.config.model == ModelKind::Hpqrc)
    else {
        return Ok(false);
    };
    let bench = m.config.bench();
    let proto = &bench.protocol;
    let (_, history) =
        hpqrc_learning_curve(&m.config.dataset, &bench, &IterConfig::default())?;
    // Loss -> NMSE needs the train-target scale from the same split.
    let series = build_series(&m.config.dataset, proto)?;
    let (train, _) = make_supervised(&series, proto.horizon, proto.washout, proto.split())?;
    let t = train.targets.len() as f64;
    let mu = mean(&train.targets);
    let var = train.targets.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / t;

    let path = out.join("accuracy_vs_epoch.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["epoch", "train_loss", "train_accuracy_pct"])?;
    for (epoch, loss) in history.epoch_loss.iter().enumerate() {
        let nmse = loss / (t * var);
        let acc = (100.0 * (1.0 - nmse)).max(0.0);
        w.write_record([(epoch + 1).to_string(), loss.to_string(), acc.to_string()])?;
    }
    w.flush()?;
    Ok(true)
}

pub fn cmd_report(dir: &Path, out_dir: Option<&Path>) -> CmdResult {
    let manifests = scan_manifests(dir).map_err(CmdError::Validation)?;
    let out = out_dir.unwrap_or(dir);
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(CmdError::Runtime)?;
    let groups = group(&manifests);

    (|| -> Result<bool> {
        write_nmse_bars(out, &groups)?;
        write_accuracy_vs_sigma(out, &groups)?;
        write_time_vs_accuracy(out, &groups)?;
        write_accuracy_vs_epoch(out, &manifests)
    })()
    .map(|with_epochs| {
        let n = if with_epochs { 4 } else { 3 };
        println!(
            "wrote {n} plot-data files to {} (from {} manifests){}",
            out.display(),
            manifests.len(),
            if with_epochs {
                ""
            } else {
                "; no hybrid runs, skipped accuracy_vs_epoch.csv"
            },
        );
    })
    .map_err(CmdError::Runtime)
}

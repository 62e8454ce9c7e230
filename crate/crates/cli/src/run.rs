//! `run`: one configured model trained and scored, persisted as a manifest.

use std::path::Path;
use std::time::Instant;

use anyhow::anyhow;

use hpqrc_core::experiment::run_cell;

use crate::config::{load_run_config, Overrides};
use crate::manifest::write_run;
use crate::{CmdError, CmdResult};

pub fn cmd_run(config_path: &Path, out_root: &Path, ov: &Overrides) -> CmdResult {
    let mut cfg = load_run_config(config_path).map_err(CmdError::Validation)?;
    cfg.apply(ov);
    cfg.validate()
        .map_err(|e| CmdError::Validation(e.into()))?;

    let bench = cfg.bench();
    let t0 = Instant::now();
    let cell = run_cell(cfg.model, &cfg.dataset, &bench, true)
        .map_err(|e| CmdError::Runtime(e.into()))?;
    let total_s = t0.elapsed().as_secs_f64();
    if !cell.nmse.is_finite() {
        return Err(CmdError::Runtime(anyhow!(
            "run produced non-finite NMSE (unstable configuration)"
        )));
    }

    let manifest = write_run(out_root, &cfg, &cell, total_s).map_err(CmdError::Runtime)?;
    println!(
        "{} on {}: nmse {:.6e}, accuracy {:.2}%, dim {}{} ({:.2}s)",
        cfg.model,
        cfg.dataset,
        cell.nmse,
        cell.accuracy_pct,
        cell.feature_dim,
        cell.ar_order
            .map(|p| format!(", ar order {p}"))
            .unwrap_or_default(),
        total_s,
    );
    if let Some(tp) = &cell.throughput {
        println!(
            "throughput: {:.0} points/sec (cv {:.3}, {} batches of ~{} points)",
            tp.points_per_sec,
            tp.cv,
            tp.n_batches,
            tp.n_points / tp.n_batches.max(1),
        );
    }
    println!("manifest: {}", out_root.join(&manifest.run_id).display());
    Ok(())
}

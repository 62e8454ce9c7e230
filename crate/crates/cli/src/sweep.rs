//! `sweep`: run a model x dataset x noise x seed grid across worker threads.
//!
//! Cells are independent, so a fixed pool of workers pulls jobs from a shared
//! queue and streams results to the main thread over a channel; only the
//! collector touches the output directory. A failing cell is recorded and the
//! sweep continues.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};

use hpqrc_core::experiment::run_cell;
use hpqrc_core::metrics::{mean, sample_std};

use crate::config::{load_sweep_config, RunConfig};
use crate::manifest::write_run;
use crate::{CmdError, CmdResult};

pub const RESULTS_FILE: &str = "sweep_results.csv";
pub const SUMMARY_FILE: &str = "sweep_summary.csv";
pub const FAILURES_FILE: &str = "sweep_failures.csv";

struct Row {
    model: String,
    dataset: String,
    sigma: f64,
    seed: u64,
    nmse: f64,
    accuracy: f64,
    time_s: f64,
}

struct Failure {
    model: String,
    dataset: String,
    sigma: f64,
    seed: u64,
    error: String,
}

pub fn cmd_sweep(
    config_path: &Path,
    out_root: &Path,
    workers: usize,
    seed_override: Option<u64>,
) -> CmdResult {
    let mut sweep = load_sweep_config(config_path).map_err(CmdError::Validation)?;
    if let Some(seed) = seed_override {
        sweep.grid.seeds = vec![seed];
    }
    sweep.grid.validate().map_err(CmdError::Validation)?;
    let cells = sweep.cells();
    for cfg in &cells {
        cfg.validate().map_err(|e| CmdError::Validation(e.into()))?;
    }

    let n = cells.len();
    let workers = workers.clamp(1, n);
    eprintln!("sweep: {n} cells on {workers} worker(s)");

    let queue: Arc<Mutex<VecDeque<RunConfig>>> =
        Arc::new(Mutex::new(cells.into_iter().collect()));
    let (tx, rx) = mpsc::channel::<(RunConfig, Result<(hpqrc_core::experiment::CellResult, f64)>)>();

    let mut handles = Vec::with_capacity(workers);
    for _ in 0..workers {
        let queue = Arc::clone(&queue);
        let tx = tx.clone();
        handles.push(thread::spawn(move || loop {
            let job = queue.lock().expect("queue lock").pop_front();
            let Some(cfg) = job else { break };
            let t0 = Instant::now();
            let res = run_cell(cfg.model, &cfg.dataset, &cfg.bench(), false)
                .map_err(anyhow::Error::from)
                .and_then(|cell| {
                    if cell.nmse.is_finite() {
                        Ok((cell, t0.elapsed().as_secs_f64()))
                    } else {
                        Err(anyhow!("non-finite NMSE (unstable configuration)"))
                    }
                });
            if tx.send((cfg, res)).is_err() {
                break;
            }
        }));
    }
    drop(tx);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut done = 0usize;
    for (cfg, res) in rx {
        done += 1;
        match res {
            Ok((cell, time_s)) => {
                write_run(out_root, &cfg, &cell, time_s).map_err(CmdError::Runtime)?;
                eprintln!(
                    "[{done}/{n}] {} {} sigma {} seed {}: nmse {:.4e}",
                    cfg.model, cfg.dataset, cfg.protocol.noise_sigma, cfg.protocol.seed, cell.nmse,
                );
                rows.push(Row {
                    model: cfg.model.to_string(),
                    dataset: cfg.dataset.to_string(),
                    sigma: cfg.protocol.noise_sigma,
                    seed: cfg.protocol.seed,
                    nmse: cell.nmse,
                    accuracy: cell.accuracy_pct,
                    time_s,
                });
            }
            Err(e) => {
                eprintln!(
                    "[{done}/{n}] {} {} sigma {} seed {}: FAILED: {e:#}",
                    cfg.model, cfg.dataset, cfg.protocol.noise_sigma, cfg.protocol.seed,
                );
                failures.push(Failure {
                    model: cfg.model.to_string(),
                    dataset: cfg.dataset.to_string(),
                    sigma: cfg.protocol.noise_sigma,
                    seed: cfg.protocol.seed,
                    error: format!("{e:#}"),
                });
            }
        }
    }
    for h in handles {
        h.join().map_err(|_| CmdError::Runtime(anyhow!("worker thread panicked")))?;
    }

    if rows.is_empty() {
        return Err(CmdError::Runtime(anyhow!("all {n} sweep cells failed")));
    }
    let key = |r: &Row| (r.model.clone(), r.dataset.clone(), r.sigma.to_string(), r.seed);
    rows.sort_by_key(key);
    failures.sort_by_key(|f| (f.model.clone(), f.dataset.clone(), f.sigma.to_string(), f.seed));
    write_tables(out_root, &rows, &failures).map_err(CmdError::Runtime)?;

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CmdError::Partial(format!(
            "{} of {n} sweep cells failed; see {}",
            failures.len(),
            out_root.join(FAILURES_FILE).display(),
        )))
    }
}

fn write_tables(out_root: &Path, rows: &[Row], failures: &[Failure]) -> Result<()> {
    let path = out_root.join(RESULTS_FILE);
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["model", "dataset", "sigma", "seed", "nmse", "accuracy", "time"])?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.dataset.clone(),
            r.sigma.to_string(),
            r.seed.to_string(),
            r.nmse.to_string(),
            r.accuracy.to_string(),
            r.time_s.to_string(),
        ])?;
    }
    w.flush()?;

    // Pivot: aggregate trials per (model, dataset, sigma) in row order.
    let path = out_root.join(SUMMARY_FILE);
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "model",
        "dataset",
        "sigma",
        "n",
        "nmse_mean",
        "nmse_std",
        "accuracy_mean",
        "accuracy_std",
        "time_mean",
    ])?;
    let mut i = 0;
    while i < rows.len() {
        let cell = (&rows[i].model, &rows[i].dataset, rows[i].sigma);
        let mut j = i;
        while j < rows.len()
            && (&rows[j].model, &rows[j].dataset, rows[j].sigma) == cell
        {
            j += 1;
        }
        let group = &rows[i..j];
        let nmses: Vec<f64> = group.iter().map(|r| r.nmse).collect();
        let accs: Vec<f64> = group.iter().map(|r| r.accuracy).collect();
        let times: Vec<f64> = group.iter().map(|r| r.time_s).collect();
        w.write_record([
            cell.0.clone(),
            cell.1.clone(),
            cell.2.to_string(),
            group.len().to_string(),
            mean(&nmses).to_string(),
            sample_std(&nmses).to_string(),
            mean(&accs).to_string(),
            sample_std(&accs).to_string(),
            mean(&times).to_string(),
        ])?;
        i = j;
    }
    w.flush()?;

    if !failures.is_empty() {
        let path = out_root.join(FAILURES_FILE);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["model", "dataset", "sigma", "seed", "error"])?;
        for f in failures {
            w.write_record([
                f.model.clone(),
                f.dataset.clone(),
                f.sigma.to_string(),
                f.seed.to_string(),
                f.error.clone(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

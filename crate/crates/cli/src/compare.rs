//! `compare`: paired statistics between two models over matched sweep cells.
//!
//! Cells are matched on (dataset, sigma, seed); the pair must cover exactly
//! the same cells or the command refuses with the missing keys. Within each
//! (dataset, sigma) group the paired t-test and a bootstrap CI are computed
//! over the per-seed NMSE differences, plus accuracy ROI and time savings on
//! the group means.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use hpqrc_core::metrics::{bootstrap_ci, mean, paired_t_test, roi, time_saving_pct};
use hpqrc_core::Error as CoreError;

use crate::manifest::{scan_manifests, RunManifest};
use crate::{CmdError, CmdResult};

pub const COMPARE_FILE: &str = "compare.csv";
const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 1730;

/// (dataset, sigma rendered as text, seed); sigma as text keeps the key Ord
/// without losing distinct float values.
type CellKey = (String, String, u64);

#[derive(Debug, Clone)]
struct CellStats {
    nmse: f64,
    accuracy: f64,
    time_s: f64,
}

fn group_by_model(
    manifests: &[RunManifest],
) -> BTreeMap<String, BTreeMap<CellKey, CellStats>> {
    let mut out: BTreeMap<String, BTreeMap<CellKey, CellStats>> = BTreeMap::new();
    for m in manifests {
        let key = (
            m.config.dataset.to_string(),
            m.config.protocol.noise_sigma.to_string(),
            m.config.protocol.seed,
        );
        // Last run wins on duplicate cells, matching index order.
        out.entry(m.config.model.to_string()).or_default().insert(
            key,
            CellStats {
                nmse: m.metrics.nmse,
                accuracy: m.metrics.accuracy_pct,
                time_s: m.timings.total_s,
            },
        );
    }
    out
}

fn check_pairing(
    a: &str,
    cells_a: &BTreeMap<CellKey, CellStats>,
    b: &str,
    cells_b: &BTreeMap<CellKey, CellStats>,
) -> Result<()> {
    let keys_a: BTreeSet<&CellKey> = cells_a.keys().collect();
    let keys_b: BTreeSet<&CellKey> = cells_b.keys().collect();
    if keys_a == keys_b {
        return Ok(());
    }
    let fmt = |keys: Vec<&&CellKey>| {
        let shown: Vec<String> = keys
            .iter()
            .take(10)
            .map(|(d, s, seed)| format!("({d}, sigma {s}, seed {seed})"))
            .collect();
        let extra = keys.len().saturating_sub(10);
        if extra > 0 {
            format!("{} and {extra} more", shown.join(", "))
        } else {
            shown.join(", ")
        }
    };
    let missing_b: Vec<&&CellKey> = keys_a.difference(&keys_b).collect();
    let missing_a: Vec<&&CellKey> = keys_b.difference(&keys_a).collect();
    let mut msg = format!("pairing error: cell sets for `{a}` and `{b}` differ.");
    if !missing_b.is_empty() {
        msg.push_str(&format!(" missing for {b}: {}.", fmt(missing_b)));
    }
    if !missing_a.is_empty() {
        msg.push_str(&format!(" missing for {a}: {}.", fmt(missing_a)));
    }
    bail!(msg)
}

#[derive(Debug)]
struct PairRow {
    model_a: String,
    model_b: String,
    dataset: String,
    sigma: String,
    n: usize,
    nmse_mean_a: f64,
    nmse_mean_b: f64,
    zero_variance: bool,
    t_stat: Option<f64>,
    p_value: Option<f64>,
    df: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    roi_accuracy: f64,
    time_saving: Option<f64>,
}

/// One comparison row per (dataset, sigma) group of the matched cells.
fn compare_pair(
    a: &str,
    cells_a: &BTreeMap<CellKey, CellStats>,
    b: &str,
    cells_b: &BTreeMap<CellKey, CellStats>,
) -> Result<Vec<PairRow>> {
    check_pairing(a, cells_a, b, cells_b)?;
    // Group the matched keys by (dataset, sigma); keys are sorted already.
    let mut rows = Vec::new();
    let keys: Vec<&CellKey> = cells_a.keys().collect();
    let mut i = 0;
    while i < keys.len() {
        let group = (&keys[i].0, &keys[i].1);
        let mut j = i;
        while j < keys.len() && (&keys[j].0, &keys[j].1) == group {
            j += 1;
        }
        let gkeys = &keys[i..j];
        let va: Vec<&CellStats> = gkeys.iter().map(|k| &cells_a[*k]).collect();
        let vb: Vec<&CellStats> = gkeys.iter().map(|k| &cells_b[*k]).collect();
        let nmse_a: Vec<f64> = va.iter().map(|c| c.nmse).collect();
        let nmse_b: Vec<f64> = vb.iter().map(|c| c.nmse).collect();
        let acc_a = mean(&va.iter().map(|c| c.accuracy).collect::<Vec<_>>());
        let acc_b = mean(&vb.iter().map(|c| c.accuracy).collect::<Vec<_>>());
        let time_a = mean(&va.iter().map(|c| c.time_s).collect::<Vec<_>>());
        let time_b = mean(&vb.iter().map(|c| c.time_s).collect::<Vec<_>>());

        let mut row = PairRow {
            model_a: a.to_string(),
            model_b: b.to_string(),
            dataset: group.0.clone(),
            sigma: group.1.clone(),
            n: gkeys.len(),
            nmse_mean_a: mean(&nmse_a),
            nmse_mean_b: mean(&nmse_b),
            zero_variance: false,
            t_stat: None,
            p_value: None,
            df: None,
            ci_low: None,
            ci_high: None,
            // Identical result sets give roi(x, x) = 0 exactly.
            roi_accuracy: roi(acc_a, acc_b)?,
            time_saving: if time_b > 0.0 {
                Some(time_saving_pct(time_b, time_a)?)
            } else {
                None
            },
        };
        match paired_t_test(&nmse_a, &nmse_b) {
            Ok(t) => {
                row.t_stat = Some(t.statistic);
                row.p_value = Some(t.p_value);
                row.df = Some(t.df);
            }
            Err(CoreError::Degenerate(_)) => row.zero_variance = true,
            Err(e) => return Err(e.into()),
        }
        if !row.zero_variance && gkeys.len() >= 2 {
            let diffs: Vec<f64> =
                nmse_a.iter().zip(&nmse_b).map(|(x, y)| x - y).collect();
            let ci = bootstrap_ci(&diffs, BOOTSTRAP_RESAMPLES, 0.95, BOOTSTRAP_SEED)?;
            row.ci_low = Some(ci.ci_low);
            row.ci_high = Some(ci.ci_high);
        }
        rows.push(row);
        i = j;
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cmd_compare(dir: &Path, pair: Option<&str>, out_dir: Option<&Path>) -> CmdResult {
    let manifests = scan_manifests(dir).map_err(CmdError::Validation)?;
    let by_model = group_by_model(&manifests);

    let pairs: Vec<(String, String)> = match pair {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            let [a, b] = parts.as_slice() else {
                return Err(CmdError::Validation(anyhow!(
                    "--pair expects `candidate,baseline`, got `{spec}`"
                )));
            };
            for name in [a, b] {
                if !by_model.contains_key(*name) {
                    return Err(CmdError::Validation(anyhow!(
                        "no runs for model `{name}` under {}; available: {}",
                        dir.display(),
                        by_model.keys().cloned().collect::<Vec<_>>().join(", "),
                    )));
                }
            }
            vec![(a.to_string(), b.to_string())]
        }
        None => {
            let names: Vec<&String> = by_model.keys().collect();
            if names.len() < 2 {
                return Err(CmdError::Validation(anyhow!(
                    "compare needs at least two models; found {}",
                    names.len()
                )));
            }
            let mut out = Vec::new();
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    out.push((names[i].clone(), names[j].clone()));
                }
            }
            out
        }
    };

    let mut rows = Vec::new();
    for (a, b) in &pairs {
        rows.extend(
            compare_pair(a, &by_model[a], b, &by_model[b])
                .map_err(CmdError::Validation)?,
        );
    }

    let out = out_dir.unwrap_or(dir);
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(CmdError::Runtime)?;
    let path = out.join(COMPARE_FILE);
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(CmdError::Runtime)?;
    (|| -> Result<()> {
        w.write_record([
            "model_a",
            "model_b",
            "dataset",
            "sigma",
            "n",
            "nmse_mean_a",
            "nmse_mean_b",
            "zero_variance",
            "t_stat",
            "p_value",
            "df",
            "diff_ci95_low",
            "diff_ci95_high",
            "roi_accuracy_pct",
            "time_saving_pct",
        ])?;
        for r in &rows {
            w.write_record([
                r.model_a.clone(),
                r.model_b.clone(),
                r.dataset.clone(),
                r.sigma.clone(),
                r.n.to_string(),
                r.nmse_mean_a.to_string(),
                r.nmse_mean_b.to_string(),
                r.zero_variance.to_string(),
                opt(r.t_stat),
                opt(r.p_value),
                opt(r.df),
                opt(r.ci_low),
                opt(r.ci_high),
                r.roi_accuracy.to_string(),
                opt(r.time_saving),
            ])?;
        }
        w.flush()?;
        Ok(())
    })()
    .map_err(CmdError::Runtime)?;

    for r in &rows {
        if r.zero_variance {
            println!(
                "{} vs {} on {} sigma {}: identical results over n={} cells \
                 (zero-variance differences); t undefined, ROI 0",
                r.model_a, r.model_b, r.dataset, r.sigma, r.n,
            );
        } else {
            println!(
                "{} vs {} on {} sigma {}: n={}, nmse {:.4e} vs {:.4e}, t={:.3}, p={:.2e}, \
                 diff CI95 [{:.3e}, {:.3e}], accuracy ROI {:.2}%{}",
                r.model_a,
                r.model_b,
                r.dataset,
                r.sigma,
                r.n,
                r.nmse_mean_a,
                r.nmse_mean_b,
                r.t_stat.unwrap_or(f64::NAN),
                r.p_value.unwrap_or(f64::NAN),
                r.ci_low.unwrap_or(f64::NAN),
                r.ci_high.unwrap_or(f64::NAN),
                r.roi_accuracy,
                r.time_saving
                    .map(|t| format!(", time saving {t:.1}%"))
                    .unwrap_or_default(),
            );
        }
    }
    println!("report: {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(pairs: &[((&str, &str, u64), (f64, f64, f64))]) -> BTreeMap<CellKey, CellStats> {
        pairs
            .iter()
            .map(|((d, s, seed), (nmse, accuracy, time_s))| {
                (
                    (d.to_string(), s.to_string(), *seed),
                    CellStats {
                        nmse: *nmse,
                        accuracy: *accuracy,
                        time_s: *time_s,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn identical_sets_report_zero_variance_and_zero_roi() {
        let a = cells(&[
            (("mg", "0", 1), (0.01, 99.0, 1.0)),
            (("mg", "0", 2), (0.02, 98.0, 1.0)),
            (("mg", "0", 3), (0.03, 97.0, 1.0)),
        ]);
        let rows = compare_pair("x", &a, "y", &a.clone()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].zero_variance);
        assert_eq!(rows[0].roi_accuracy, 0.0);
        assert!(rows[0].t_stat.is_none());
    }

    #[test]
    fn distinct_sets_get_t_and_bootstrap_ci() {
        let a = cells(&[
            (("mg", "0", 1), (0.010, 99.0, 2.0)),
            (("mg", "0", 2), (0.012, 98.8, 2.0)),
            (("mg", "0", 3), (0.011, 98.9, 2.0)),
            (("mg", "0", 4), (0.013, 98.7, 2.0)),
        ]);
        let b = cells(&[
            (("mg", "0", 1), (0.020, 98.0, 1.0)),
            (("mg", "0", 2), (0.021, 97.9, 1.0)),
            (("mg", "0", 3), (0.022, 97.8, 1.0)),
            (("mg", "0", 4), (0.023, 97.7, 1.0)),
        ]);
        let rows = compare_pair("x", &a, "y", &b).unwrap();
        let r = &rows[0];
        assert!(!r.zero_variance);
        assert!(r.t_stat.unwrap() < 0.0, "a has smaller nmse");
        assert!(r.p_value.unwrap() < 0.01);
        assert!(r.ci_high.unwrap() < 0.0);
        assert!(r.roi_accuracy > 0.0);
        // b (baseline) is slower: positive saving going from b to a... the
        // other way here: a took longer, so the saving is negative.
        assert!(r.time_saving.unwrap() < 0.0);
    }

    #[test]
    fn unmatched_cells_list_missing_keys() {
        let a = cells(&[(("mg", "0", 1), (0.01, 99.0, 1.0)), (("mg", "0", 2), (0.02, 98.0, 1.0))]);
        let b = cells(&[(("mg", "0", 1), (0.01, 99.0, 1.0)), (("lorenz", "0.1", 7), (0.02, 98.0, 1.0))]);
        let err = compare_pair("x", &a, "y", &b).unwrap_err().to_string();
        assert!(err.contains("pairing error"), "{err}");
        assert!(err.contains("(mg, sigma 0, seed 2)"), "{err}");
        assert!(err.contains("(lorenz, sigma 0.1, seed 7)"), "{err}");
    }

    #[test]
    fn groups_split_by_dataset_and_sigma() {
        let a = cells(&[
            (("mg", "0", 1), (0.01, 99.0, 1.0)),
            (("mg", "0", 2), (0.015, 98.5, 1.0)),
            (("mg", "0.1", 1), (0.05, 95.0, 1.0)),
            (("mg", "0.1", 2), (0.055, 94.5, 1.0)),
        ]);
        let mut b = a.clone();
        for stats in b.values_mut() {
            stats.nmse *= 2.0;
        }
        let rows = compare_pair("x", &a, "y", &b).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].sigma, "0");
        assert_eq!(rows[1].sigma, "0.1");
        assert_eq!(rows[0].n, 2);
    }
}

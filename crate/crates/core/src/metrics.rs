//! Evaluation metrics and statistics: NMSE/accuracy, ROI, Mann-Whitney AUC,
//! paired t-test, coefficient of variation, and bootstrap confidence
//! intervals.
//!
//! A note on accuracy: for forecasting tasks it is defined here as
//! `100 * max(0, 1 - NMSE)`. Reports that surface the figure carry the
//! definition in their header. t-distribution tail probabilities are computed
//! internally via the regularized incomplete beta function (Lanczos
//! log-gamma plus a continued-fraction expansion); no tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Forecast quality for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub nmse: f64,
    pub accuracy_pct: f64,
    pub n: usize,
}

impl MetricReport {
    pub fn from_predictions(y: &[f64], yhat: &[f64]) -> Result<Self> {
        Ok(MetricReport {
            nmse: nmse(y, yhat)?,
            accuracy_pct: accuracy_pct(y, yhat)?,
            n: y.len(),
        })
    }
}

/// Outcome of a significance test or interval estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn check_paired(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch(format!(
            "targets have {} samples, predictions {}",
            y.len(),
            yhat.len()
        )));
    }
    Ok(())
}

/// Normalized mean square error: sum((y - yhat)^2) / sum((y - mean(y))^2).
/// The mean predictor scores exactly 1.
pub fn nmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_paired(y, yhat)?;
    let ybar = mean(y);
    let denom: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if denom == 0.0 {
        return Err(Error::Degenerate(
            "targets are constant; NMSE undefined".into(),
        ));
    }
    let num: f64 = y
        .iter()
        .zip(yhat)
        .map(|(v, p)| (v - p) * (v - p))
        .sum();
    Ok(num / denom)
}

/// 100 * max(0, 1 - NMSE), in [0, 100].
pub fn accuracy_pct(y: &[f64], yhat: &[f64]) -> Result<f64> {
    Ok(100.0 * (1.0 - nmse(y, yhat)?).max(0.0))
}

/// Relative improvement of `gain` over `baseline`, in percent.
pub fn roi(gain: f64, baseline: f64) -> Result<f64> {
    if baseline == 0.0 || !baseline.is_finite() || !gain.is_finite() {
        return Err(Error::invalid("baseline", baseline, "must be finite and non-zero"));
    }
    Ok((gain - baseline) / baseline * 100.0)
}

/// Time variant of [`roi`]: percent reduction from `old` to `new`,
/// (old - new) / old * 100.
pub fn time_saving_pct(old: f64, new: f64) -> Result<f64> {
    if old == 0.0 || !old.is_finite() || !new.is_finite() {
        return Err(Error::invalid("old", old, "must be finite and non-zero"));
    }
    Ok((old - new) / old * 100.0)
}

/// Mann-Whitney AUC with midrank tie handling: the probability that a random
/// positive-label score outranks a random negative-label one.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Degenerate(
            "AUC needs both classes present".into(),
        ));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores", "non-finite", "must be finite"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks: runs of equal scores share the average of their 1-based ranks.
    let mut ranks = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    let r_pos: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let u = r_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Two-sided paired t-test on matched samples, with a 95% confidence
/// interval for the mean difference.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<StatResult> {
    check_paired(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let d_mean = mean(&d);
    let d_std = sample_std(&d);
    if d_std == 0.0 {
        return Err(Error::Degenerate(
            "paired differences have zero variance".into(),
        ));
    }
    let se = d_std / (n as f64).sqrt();
    let t = d_mean / se;
    let df = (n - 1) as f64;
    let p = t_two_sided_p(t, df);
    let t_crit = t_critical(df, 0.05);
    Ok(StatResult {
        statistic: t,
        p_value: p,
        df,
        ci_low: d_mean - t_crit * se,
        ci_high: d_mean + t_crit * se,
    })
}

/// Sample std over mean; scale invariant.
pub fn coeff_variation(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: xs.len(),
        });
    }
    let m = mean(xs);
    if m == 0.0 || !m.is_finite() {
        return Err(Error::Degenerate("zero or non-finite mean; CV undefined".into()));
    }
    Ok(sample_std(xs) / m)
}

/// Percentile bootstrap CI for the mean: seeded with-replacement resamples,
/// nearest-rank percentiles. `statistic` is the sample mean; `p_value` is the
/// two-sided resampling significance of mean != 0
/// (2 * min(frac <= 0, frac >= 0), capped at 1).
pub fn bootstrap_ci(xs: &[f64], n_resamples: usize, level: f64, seed: u64) -> Result<StatResult> {
    if xs.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: xs.len(),
        });
    }
    if n_resamples == 0 {
        return Err(Error::invalid("n_resamples", 0, "must be at least 1"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", level, "must lie strictly in (0, 1)"));
    }
    let n = xs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut s = 0.0;
        for _ in 0..n {
            s += xs[rng.gen_range(0..n)];
        }
        means.push(s / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let pick = |p: f64| means[((n_resamples - 1) as f64 * p).round() as usize];
    let tail = (1.0 - level) / 2.0;
    let le = means.iter().filter(|&&m| m <= 0.0).count() as f64 / n_resamples as f64;
    let ge = means.iter().filter(|&&m| m >= 0.0).count() as f64 / n_resamples as f64;
    Ok(StatResult {
        statistic: mean(xs),
        p_value: (2.0 * le.min(ge)).min(1.0),
        df: (n - 1) as f64,
        ci_low: pick(tail),
        ci_high: pick(1.0 - tail),
    })
}

// --- t-distribution internals ---

/// Lanczos approximation (g = 7, 9 terms), |rel err| < 1e-13 for z > 0.
fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Continued-fraction kernel of the regularized incomplete beta function
/// (modified Lentz iteration).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 3e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
fn betai(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let bt = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * x.ln()
        + b * (1.0 - x).ln())
    .exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * betacf(a, b, x) / a
    } else {
        1.0 - bt * betacf(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom:
/// I_{df/(df+t^2)}(df/2, 1/2).
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    betai(0.5 * df, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Critical value t* with two-sided tail probability `alpha`, by bisection.
pub fn t_critical(df: f64, alpha: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1e6f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_two_sided_p(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

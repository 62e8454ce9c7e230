//! Time-series containers and dataset preparation.
//!
//! Chaotic benchmark generators live in [`mackey_glass`] and [`lorenz`];
//! CSV ingestion and export in [`io`]. This module holds the shared
//! [`TimeSeries`] container plus normalization, Gaussian noise injection,
//! and conversion to supervised one-step-ahead pairs.

mod io;
mod lorenz;
mod mackey_glass;

pub use io::{load_csv, write_series_csv, ColumnSelector};
pub use lorenz::{gen_lorenz, LorenzParams};
pub use mackey_glass::{gen_mackey_glass, MackeyGlassParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled series, scalar or vector valued.
///
/// Samples are stored flattened row-major: sample `t` occupies
/// `values[t * dim .. (t + 1) * dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub dim: usize,
    /// Sample spacing in the generator's native time unit.
    pub dt: f64,
    pub name: String,
    /// Seed used to produce the series, when one was involved.
    pub seed: Option<u64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dim: usize, dt: f64, name: impl Into<String>) -> Result<Self> {
        let s = TimeSeries {
            values,
            dim,
            dt,
            name: name.into(),
            seed: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn scalar(values: Vec<f64>, dt: f64, name: impl Into<String>) -> Result<Self> {
        Self::new(values, 1, dt, name)
    }

    /// Number of samples (not scalar entries).
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks structural consistency: positive `dim` and `dt`, length a
    /// multiple of `dim`, every value finite.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dim", self.dim, "must be at least 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", self.dt, "must be finite and positive"));
        }
        if self.values.len() % self.dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "value count {} is not a multiple of dim {}",
                self.values.len(),
                self.dim
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: i / self.dim,
                what: format!("non-finite value in series `{}`", self.name),
            });
        }
        Ok(())
    }

    /// Extracts one component of a vector series as a scalar series.
    pub fn component(&self, idx: usize) -> Result<TimeSeries> {
        if idx >= self.dim {
            return Err(Error::invalid(
                "idx",
                idx,
                format!("series `{}` has dim {}", self.name, self.dim),
            ));
        }
        let values = self
            .values
            .chunks_exact(self.dim)
            .map(|row| row[idx])
            .collect();
        Ok(TimeSeries {
            values,
            dim: 1,
            dt: self.dt,
            name: format!("{}[{}]", self.name, idx),
            seed: self.seed,
        })
    }

    fn require_scalar(&self, op: &str) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch(format!(
                "{op} requires a scalar series; `{}` has dim {}",
                self.name, self.dim
            )));
        }
        Ok(())
    }
}

/// Affine map fitted by [`normalize`]; kept so predictions can be mapped back
/// to the original scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub src_min: f64,
    pub src_max: f64,
    pub dst_lo: f64,
    pub dst_hi: f64,
}

impl NormParams {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.src_min) / (self.src_max - self.src_min) * (self.dst_hi - self.dst_lo)
            + self.dst_lo
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.dst_lo) / (self.dst_hi - self.dst_lo) * (self.src_max - self.src_min)
            + self.src_min
    }
}

/// Rescales a scalar series affinely so its observed min/max land on
/// `[lo, hi]`. Fails on constant series, where the map is undefined.
pub fn normalize(series: &TimeSeries, lo: f64, hi: f64) -> Result<(TimeSeries, NormParams)> {
    series.validate()?;
    series.require_scalar("normalize")?;
    if series.is_empty() {
        return Err(Error::TooShort { needed: 2, got: 0 });
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("lo..hi", format!("{lo}..{hi}"), "need finite lo < hi"));
    }
    let src_min = series.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let src_max = series.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if src_min == src_max {
        return Err(Error::Degenerate(format!(
            "series `{}` is constant at {src_min}; normalization undefined",
            series.name
        )));
    }
    let params = NormParams {
        src_min,
        src_max,
        dst_lo: lo,
        dst_hi: hi,
    };
    let values = series.values.iter().map(|&x| params.apply(x)).collect();
    let out = TimeSeries {
        values,
        dim: 1,
        dt: series.dt,
        name: series.name.clone(),
        seed: series.seed,
    };
    Ok((out, params))
}

/// Deterministic stream of `n` Gaussian draws with standard deviation
/// `sigma`, generated by `ChaCha8` from `seed`. Exposed so the exact noise
/// realization of [`add_gaussian_noise`] can be reproduced.
pub fn seeded_gaussian(n: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", sigma, "must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::invalid("sigma", sigma, e.to_string()))?;
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Additive measurement noise on a `[0, 1]`-normalized copy of the series.
///
/// The input is first normalized to `[0, 1]`, one Gaussian draw per sample is
/// added, and the result is re-normalized to `[0, 1]` so downstream encoders
/// keep a fixed input range. `sigma = 0` returns the normalized series
/// unchanged. The noisy values are relative to full scale: `sigma = 0.1`
/// perturbs by 10% of the signal range per sample.
pub fn add_gaussian_noise(series: &TimeSeries, sigma: f64, seed: u64) -> Result<TimeSeries> {
    let (normed, _) = normalize(series, 0.0, 1.0)?;
    let draws = seeded_gaussian(normed.len(), sigma, seed)?;
    let noisy: Vec<f64> = normed
        .values
        .iter()
        .zip(&draws)
        .map(|(&x, &n)| x + n)
        .collect();
    let noisy = TimeSeries {
        values: noisy,
        dim: 1,
        dt: series.dt,
        name: series.name.clone(),
        seed: Some(seed),
    };
    let (mut out, _) = normalize(&noisy, 0.0, 1.0)?;
    out.name = format!("{}+n{sigma}", series.name);
    out.seed = Some(seed);
    Ok(out)
}

/// Input/target pairs for supervised one-step training, in chronological
/// order. `inputs[i]` is the sample at some time `t`, `targets[i]` the sample
/// at `t + horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub horizon: usize,
}

impl SupervisedSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Windows a scalar series into chronological train/test supervised pairs.
///
/// The first `washout` samples are discarded as transient. Each remaining
/// time `t` with `t + horizon` in range yields the pair
/// `(x[t], x[t + horizon])`. The first `round(split * n_pairs)` pairs become
/// the training set, the rest the test set; no shuffling.
pub fn make_supervised(
    series: &TimeSeries,
    horizon: usize,
    washout: usize,
    split: f64,
) -> Result<(SupervisedSet, SupervisedSet)> {
    series.validate()?;
    series.require_scalar("make_supervised")?;
    if horizon == 0 {
        return Err(Error::invalid("horizon", horizon, "must be at least 1"));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::invalid("split", split, "must lie strictly in (0, 1)"));
    }
    let needed = washout + horizon + 10;
    if series.len() <= needed {
        return Err(Error::TooShort {
            needed: needed + 1,
            got: series.len(),
        });
    }
    let n_pairs = series.len() - horizon - washout;
    let n_train = ((split * n_pairs as f64).round() as usize).clamp(1, n_pairs - 1);
    let make = |range: std::ops::Range<usize>| SupervisedSet {
        inputs: range.clone().map(|i| series.values[washout + i]).collect(),
        targets: range.map(|i| series.values[washout + i + horizon]).collect(),
        horizon,
    };
    Ok((make(0..n_train), make(n_train..n_pairs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ramp(n: usize) -> TimeSeries {
        TimeSeries::scalar((1..=n).map(|i| i as f64).collect(), 1.0, "ramp").unwrap()
    }

    #[test]
    fn normalize_maps_endpoints_exactly() {
        let s = TimeSeries::scalar(vec![2.0, 4.0, 3.0], 1.0, "s").unwrap();
        let (out, p) = normalize(&s, 0.0, 1.0).unwrap();
        assert_eq!(out.values, vec![0.0, 1.0, 0.5]);
        assert_eq!(p.src_min, 2.0);
        assert_eq!(p.src_max, 4.0);
        assert_abs_diff_eq!(p.invert(out.values[2]), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_rejects_constant_series() {
        let s = TimeSeries::scalar(vec![5.0; 8], 1.0, "flat").unwrap();
        assert!(matches!(normalize(&s, 0.0, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn normalize_arbitrary_range() {
        let s = TimeSeries::scalar(vec![0.0, 10.0], 1.0, "s").unwrap();
        let (out, _) = normalize(&s, -1.0, 1.0).unwrap();
        assert_eq!(out.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn noise_sigma_zero_is_identity_on_unit_range() {
        let s = TimeSeries::scalar(vec![0.0, 0.5, 1.0], 1.0, "s").unwrap();
        let out = add_gaussian_noise(&s, 0.0, 99).unwrap();
        assert_eq!(out.values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn noise_output_spans_unit_interval() {
        let s = ramp(500);
        let out = add_gaussian_noise(&s, 0.25, 7).unwrap();
        let min = out.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = out.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 1.0);
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let s = ramp(200);
        let a = add_gaussian_noise(&s, 0.1, 42).unwrap();
        let b = add_gaussian_noise(&s, 0.1, 42).unwrap();
        let c = add_gaussian_noise(&s, 0.1, 43).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn noise_rejects_negative_sigma() {
        let s = ramp(50);
        assert!(add_gaussian_noise(&s, -0.1, 0).is_err());
    }

    // Relative to full scale, the injected noise before re-normalization has
    // peak signal power / mean noise power of -20 log10(sigma) dB. Checked by
    // reconstructing the exact draw stream.
    #[test]
    fn noise_snr_matches_sigma() {
        for (sigma, expect_db) in [(0.1, 20.0), (0.3, 10.46)] {
            let s = ramp(20_000);
            let (normed, _) = normalize(&s, 0.0, 1.0).unwrap();
            let draws = seeded_gaussian(normed.len(), sigma, 5).unwrap();
            let peak_sig = normed.values.iter().map(|x| x * x).fold(0.0, f64::max);
            let mean_noise =
                draws.iter().map(|n| n * n).sum::<f64>() / draws.len() as f64;
            let snr_db = 10.0 * (peak_sig / mean_noise).log10();
            assert_abs_diff_eq!(snr_db, expect_db, epsilon = 0.2);
        }
    }

    #[test]
    fn supervised_counts_and_alignment() {
        let s = ramp(100);
        let (train, test) = make_supervised(&s, 1, 0, 0.8).unwrap();
        assert_eq!(train.len(), 79);
        assert_eq!(test.len(), 20);
        assert_eq!((train.inputs[0], train.targets[0]), (1.0, 2.0));
        assert_eq!(*test.targets.last().unwrap(), 100.0);
        // Chronological: last train target precedes first test input's target.
        assert_eq!(train.inputs.last().unwrap() + 1.0, *test.inputs.first().unwrap());
    }

    #[test]
    fn supervised_respects_washout_and_horizon() {
        let s = ramp(100);
        let (train, test) = make_supervised(&s, 5, 10, 0.5).unwrap();
        assert_eq!(train.len() + test.len(), 100 - 5 - 10);
        assert_eq!(train.inputs[0], 11.0);
        assert_eq!(train.targets[0], 16.0);
    }

    #[test]
    fn supervised_rejects_short_series() {
        let s = ramp(20);
        assert!(matches!(
            make_supervised(&s, 1, 10, 0.8),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn supervised_rejects_bad_split() {
        let s = ramp(100);
        assert!(make_supervised(&s, 1, 0, 0.0).is_err());
        assert!(make_supervised(&s, 1, 0, 1.0).is_err());
    }

    #[test]
    fn component_extraction() {
        let v = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, 0.5, "v").unwrap();
        let y = v.component(1).unwrap();
        assert_eq!(y.values, vec![2.0, 5.0]);
        assert_eq!(y.dim, 1);
        assert!(v.component(3).is_err());
    }

    #[test]
    fn validate_catches_non_finite() {
        let s = TimeSeries {
            values: vec![1.0, f64::NAN],
            dim: 1,
            dt: 1.0,
            name: "bad".into(),
            seed: None,
        };
        assert!(matches!(s.validate(), Err(Error::Divergence { step: 1, .. })));
    }
}

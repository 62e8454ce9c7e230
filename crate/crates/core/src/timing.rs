//! Wall-clock throughput measurement.
//!
//! Timings are the one quantity explicitly excluded from the toolkit's
//! determinism guarantee: consecutive measurements differ. The harness runs
//! one untimed warm-up batch, then times `n_batches` equal batches on the
//! calling thread and reports per-batch stability alongside the headline
//! throughput.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub points_per_sec: f64,
    /// Mean wall-clock seconds per processed point.
    pub latency_s: f64,
    pub batch_mean_s: f64,
    pub batch_std_s: f64,
    /// Coefficient of variation of per-batch timings.
    pub cv: f64,
    /// Points actually processed in the timed phase.
    pub n_points: usize,
    pub n_batches: usize,
}

/// Times `runner` over `n_batches` batches totalling about `n_points` calls.
/// `runner(k)` must process `k` points. One warm-up batch runs untimed first.
pub fn measure_throughput(
    mut runner: impl FnMut(usize),
    n_points: usize,
    n_batches: usize,
) -> Result<ThroughputReport> {
    if n_points < 100 {
        return Err(Error::invalid("n_points", n_points, "need at least 100 for a stable measurement"));
    }
    if n_batches < 2 {
        return Err(Error::invalid("n_batches", n_batches, "need at least 2 batches"));
    }
    let batch = (n_points / n_batches).max(1);
    runner(batch); // warm-up, excluded
    let mut times = Vec::with_capacity(n_batches);
    for _ in 0..n_batches {
        let t0 = Instant::now();
        runner(batch);
        times.push(t0.elapsed().as_secs_f64());
    }
    let total: f64 = times.iter().sum();
    let n_done = batch * n_batches;
    let mean = total / n_batches as f64;
    let std = crate::metrics::sample_std(&times);
    Ok(ThroughputReport {
        points_per_sec: n_done as f64 / total,
        latency_s: total / n_done as f64,
        batch_mean_s: mean,
        batch_std_s: std,
        cv: if mean > 0.0 { std / mean } else { 0.0 },
        n_points: n_done,
        n_batches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_runner_exceeds_sanity_floor() {
        let mut sink = 0u64;
        let r = measure_throughput(
            |k| {
                for i in 0..k {
                    sink = sink.wrapping_add(i as u64);
                }
            },
            100_000,
            10,
        )
        .unwrap();
        assert!(sink != u64::MAX);
        assert!(r.points_per_sec > 1e6, "throughput {} too low", r.points_per_sec);
        assert!(r.latency_s > 0.0 && r.latency_s.is_finite());
        assert!(r.cv.is_finite() && r.cv >= 0.0);
        assert_eq!(r.n_points, 100_000);
        assert_eq!(r.n_batches, 10);
    }

    #[test]
    fn latency_inverts_throughput() {
        let r = measure_throughput(
            |k| {
                std::hint::black_box((k as f64).sqrt());
            },
            1000,
            4,
        )
        .unwrap();
        let product = r.points_per_sec * r.latency_s;
        assert!((product - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_small_workloads() {
        assert!(measure_throughput(|_| {}, 99, 10).is_err());
        assert!(measure_throughput(|_| {}, 1000, 1).is_err());
    }
}

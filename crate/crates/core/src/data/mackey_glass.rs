//! Mackey-Glass delay differential equation.
//!
//! dx/dt = a x(t - tau) / (1 + x(t - tau)^n) - b x(t), integrated with
//! fixed-step RK4. The delay `tau` must be an integer multiple of `dt` so
//! delayed values at full steps are exact grid samples; mid-step stage values
//! use linear interpolation between the two bracketing samples.

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MackeyGlassParams {
    pub a: f64,
    pub b: f64,
    /// Nonlinearity exponent.
    pub n: f64,
    pub tau: f64,
    pub dt: f64,
    /// Constant history x(t) for t <= 0, also the initial value.
    pub history: f64,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        MackeyGlassParams {
            a: 0.2,
            b: 0.1,
            n: 10.0,
            tau: 17.0,
            dt: 0.1,
            history: 1.2,
        }
    }
}

impl MackeyGlassParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("n", self.n),
            ("history", self.history),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "must be finite"));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", self.dt, "must be finite and positive"));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid("tau", self.tau, "must be finite and positive"));
        }
        let ratio = self.tau / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::invalid(
                "tau",
                self.tau,
                format!("must be a positive integer multiple of dt = {}", self.dt),
            ));
        }
        Ok(())
    }

    fn lag_steps(&self) -> usize {
        (self.tau / self.dt).round() as usize
    }
}

/// Integrates the equation for `n_steps - 1` steps and returns the
/// `n_steps`-sample trajectory starting at `x(0) = history`.
pub fn gen_mackey_glass(params: &MackeyGlassParams, n_steps: usize) -> Result<TimeSeries> {
    params.validate()?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", n_steps, "must be at least 1"));
    }
    let lag = params.lag_steps() as isize;
    let f = |x: f64, xd: f64| {
        params.a * xd / (1.0 + xd.powf(params.n)) - params.b * x
    };
    let mut xs = Vec::with_capacity(n_steps);
    xs.push(params.history);
    for i in 0..n_steps - 1 {
        let at = |j: isize| -> f64 {
            if j < 0 {
                params.history
            } else {
                xs[j as usize]
            }
        };
        let i = i as isize;
        let d0 = at(i - lag);
        let d1 = at(i + 1 - lag);
        let dh = 0.5 * (d0 + d1);
        let x = xs[i as usize];
        let dt = params.dt;
        let k1 = f(x, d0);
        let k2 = f(x + 0.5 * dt * k1, dh);
        let k3 = f(x + 0.5 * dt * k2, dh);
        let k4 = f(x + dt * k3, d1);
        let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::Divergence {
                step: i as usize + 1,
                what: "Mackey-Glass state became non-finite".into(),
            });
        }
        xs.push(next);
    }
    let mut out = TimeSeries::scalar(xs, params.dt, "mackey_glass")?;
    out.seed = None;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference integrator for cross-checking: forward Euler at a much finer
    // step, with the delayed value linearly interpolated on the fine grid.
    fn euler_oracle(p: &MackeyGlassParams, n_steps: usize, refine: usize) -> Vec<f64> {
        let h = p.dt / refine as f64;
        let lag_f = p.tau / h;
        let total = (n_steps - 1) * refine;
        let mut xs = Vec::with_capacity(total + 1);
        xs.push(p.history);
        for i in 0..total {
            let t_d = i as f64 - lag_f;
            let xd = if t_d <= 0.0 {
                p.history
            } else {
                let j = t_d.floor() as usize;
                let frac = t_d - j as f64;
                xs[j] * (1.0 - frac) + xs[(j + 1).min(xs.len() - 1)] * frac
            };
            let x = xs[i];
            let dx = p.a * xd / (1.0 + xd.powf(p.n)) - p.b * x;
            xs.push(x + h * dx);
        }
        xs.iter().step_by(refine).cloned().collect()
    }

    #[test]
    fn matches_fine_step_euler_reference() {
        let p = MackeyGlassParams::default();
        let n = 800;
        let rk4 = gen_mackey_glass(&p, n).unwrap();
        let oracle = euler_oracle(&p, n, 200);
        for (a, b) in rk4.values.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 2e-3);
        }
    }

    // With a = 0.2, b = 0.1, n = 10 the equation has the fixed point x = 1:
    // a * 1 / (1 + 1) - b * 1 = 0.
    #[test]
    fn fixed_point_is_preserved_exactly() {
        let p = MackeyGlassParams {
            history: 1.0,
            ..Default::default()
        };
        let out = gen_mackey_glass(&p, 10_001).unwrap();
        for &v in &out.values {
            assert!((v - 1.0).abs() < 1e-9, "drifted to {v}");
        }
    }

    #[test]
    fn default_trajectory_is_bounded_and_oscillates() {
        let out = gen_mackey_glass(&MackeyGlassParams::default(), 12_000).unwrap();
        let tail = &out.values[2000..];
        let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(min > 0.2 && max < 1.6, "attractor range [{min}, {max}]");
        assert!(max - min > 0.4, "trajectory collapsed to range {}", max - min);
    }

    #[test]
    fn is_deterministic() {
        let p = MackeyGlassParams::default();
        let a = gen_mackey_glass(&p, 3000).unwrap();
        let b = gen_mackey_glass(&p, 3000).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn rejects_non_integer_lag() {
        let p = MackeyGlassParams {
            tau: 17.05,
            ..Default::default()
        };
        assert!(gen_mackey_glass(&p, 100).is_err());
    }

    #[test]
    fn rejects_zero_steps() {
        assert!(gen_mackey_glass(&MackeyGlassParams::default(), 0).is_err());
    }

    #[test]
    fn single_sample_is_history() {
        let out = gen_mackey_glass(&MackeyGlassParams::default(), 1).unwrap();
        assert_eq!(out.values, vec![1.2]);
    }
}

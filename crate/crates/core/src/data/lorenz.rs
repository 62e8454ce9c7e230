//! Lorenz-63 system integrated with fixed-step RK4.
//!
//! dx/dt = sigma (y - x), dy/dt = x (rho - z) - y, dz/dt = x y - beta z.

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub dt: f64,
    pub init: [f64; 3],
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            dt: 0.01,
            init: [1.0, 1.0, 1.0],
        }
    }
}

impl LorenzParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma", self.sigma), ("rho", self.rho), ("beta", self.beta)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "must be finite"));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", self.dt, "must be finite and positive"));
        }
        if self.init.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "init",
                format!("{:?}", self.init),
                "must be finite",
            ));
        }
        Ok(())
    }
}

fn deriv(p: &LorenzParams, s: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = s;
    [
        p.sigma * (y - x),
        x * (p.rho - z) - y,
        x * y - p.beta * z,
    ]
}

/// Integrates for `n_steps - 1` steps; returns a dim-3 series whose first
/// sample is the initial condition.
pub fn gen_lorenz(params: &LorenzParams, n_steps: usize) -> Result<TimeSeries> {
    params.validate()?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", n_steps, "must be at least 1"));
    }
    let mut values = Vec::with_capacity(3 * n_steps);
    let mut s = params.init;
    values.extend_from_slice(&s);
    let dt = params.dt;
    for step in 1..n_steps {
        let k1 = deriv(params, s);
        let mid1 = [s[0] + 0.5 * dt * k1[0], s[1] + 0.5 * dt * k1[1], s[2] + 0.5 * dt * k1[2]];
        let k2 = deriv(params, mid1);
        let mid2 = [s[0] + 0.5 * dt * k2[0], s[1] + 0.5 * dt * k2[1], s[2] + 0.5 * dt * k2[2]];
        let k3 = deriv(params, mid2);
        let end = [s[0] + dt * k3[0], s[1] + dt * k3[1], s[2] + dt * k3[2]];
        let k4 = deriv(params, end);
        for i in 0..3 {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step,
                what: "Lorenz state became non-finite".into(),
            });
        }
        values.extend_from_slice(&s);
    }
    TimeSeries::new(values, 3, params.dt, "lorenz")
}

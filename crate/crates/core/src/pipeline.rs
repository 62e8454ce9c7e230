//! The hybrid pipeline: quantum reservoir, precision-bounded bridge,
//! photonic reservoir, feature fusion, and the closed-loop forecast drivers.
//!
//! Parallel topology (the default) drives both reservoirs from the raw
//! input; sequential topology routes the quantum features through the bridge
//! into the photonic drive. In either topology the fused row is the quantum
//! block followed by the photonic intensities. The PID controller supplies a
//! global phase shift to the photonic stage; its error input is zero while
//! features are harvested under teacher forcing and becomes the realized
//! one-step prediction error during closed-loop forecasting.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::data::SupervisedSet;
use crate::error::{Error, Result};
use crate::photonic::{self, PhotonicConfig, PhotonicFeatures, PhotonicState, PidController};
use crate::quantum::{self, DensityMatrix, QuantumConfig, QuantumFeatures};
use crate::readout::{FeatureMatrix, ReadoutModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BridgePrecision {
    /// Clamp bridge values to the nearest binary32, mirroring a 32-bit link.
    #[default]
    Single,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FusionRule {
    #[default]
    Concat,
    /// Concat plus elementwise products of the leading
    /// min(|quantum|, |photonic|) feature pairs.
    ConcatPlusProducts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct HybridConfig {
    pub topology: Topology,
    pub quantum: QuantumConfig,
    pub photonic: PhotonicConfig,
    pub pid_enabled: bool,
    pub bridge_precision: BridgePrecision,
    pub fusion: FusionRule,
    /// Controller gains/rate; actuator limits are taken from
    /// `photonic.actuator_limit` when a run state is initialized.
    pub pid: PidController,
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        self.quantum.validate()?;
        self.photonic.validate()?;
        self.pid.validate()
    }

    /// Fused feature count per row (before the readout's bias column).
    pub fn fused_dim(&self) -> usize {
        let q = self.quantum.feature_dim();
        let p = self.photonic.n_virtual;
        match self.fusion {
            FusionRule::Concat => q + p,
            FusionRule::ConcatPlusProducts => q + p + q.min(p),
        }
    }
}

/// Everything that evolves across pipeline steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub rho: DensityMatrix,
    pub photonic: PhotonicState,
    pub pid: PidController,
    /// Error fed to the PID at the most recent step.
    pub last_error: f64,
    /// Forecast horizon carried from feature harvesting, used to align
    /// realized prediction errors.
    pub horizon: usize,
    /// Predictions awaiting their realized targets (closed-loop mode).
    pending: VecDeque<f64>,
}

/// Fresh state for a config: ground-state qubits, dark delay line, reset
/// controller bounded by the photonic actuator limit.
pub fn init_state(cfg: &HybridConfig) -> Result<RunState> {
    cfg.validate()?;
    let mut pid = cfg.pid.clone();
    pid.out_min = -cfg.photonic.actuator_limit;
    pid.out_max = cfg.photonic.actuator_limit;
    pid.reset();
    Ok(RunState {
        rho: DensityMatrix::ground(cfg.quantum.n_qubits)?,
        photonic: PhotonicState::new(&cfg.photonic),
        pid,
        last_error: 0.0,
        horizon: 1,
        pending: VecDeque::new(),
    })
}

/// Maps quantum expectations from [-1, 1] to photonic drive amplitudes in
/// [0, 1]; under single precision each value is rounded to the nearest
/// binary32 at the boundary.
pub fn bridge_convert(qf: &QuantumFeatures, precision: BridgePrecision) -> Vec<f64> {
    qf.to_vec()
        .into_iter()
        .map(|v| {
            let d = 0.5 * (v + 1.0);
            match precision {
                BridgePrecision::Double => d,
                BridgePrecision::Single => d as f32 as f64,
            }
        })
        .collect()
}

/// Deterministic fusion: quantum block first, then photonic intensities,
/// then (optionally) leading elementwise products.
pub fn combine_features(
    qf: &QuantumFeatures,
    pf: &PhotonicFeatures,
    fusion: FusionRule,
) -> Result<Vec<f64>> {
    if qf.is_empty() || pf.intensities.is_empty() {
        return Err(Error::Degenerate(
            "feature fusion needs non-empty quantum and photonic blocks".into(),
        ));
    }
    let q = qf.to_vec();
    let mut out = Vec::with_capacity(q.len() + pf.intensities.len());
    out.extend_from_slice(&q);
    out.extend_from_slice(&pf.intensities);
    if fusion == FusionRule::ConcatPlusProducts {
        let k = q.len().min(pf.intensities.len());
        for i in 0..k {
            out.push(q[i] * pf.intensities[i]);
        }
    }
    Ok(out)
}

/// One synchronized step of both reservoirs. `error` is the PID input for
/// this step (zero under teacher forcing). Returns the fused feature row.
pub fn pipeline_step(
    state: &mut RunState,
    x: f64,
    error: f64,
    cfg: &HybridConfig,
) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::Divergence {
            step: state.photonic.step_index as usize,
            what: "pipeline input became non-finite".into(),
        });
    }
    let phase = if cfg.pid_enabled {
        state.last_error = error;
        state.pid.update(error)
    } else {
        0.0
    };
    let theta = std::f64::consts::PI * x;
    let qf = quantum::q_step(&mut state.rho, theta, &cfg.quantum)?;
    let pf = match cfg.topology {
        Topology::Parallel => photonic::p_step(&mut state.photonic, x, phase, &cfg.photonic)?,
        Topology::Sequential => {
            let drives = bridge_convert(&qf, cfg.bridge_precision);
            photonic::p_step_drives(&mut state.photonic, &drives, phase, &cfg.photonic)?
        }
    };
    combine_features(&qf, &pf, cfg.fusion)
}

/// Teacher-forced feature harvest over a supervised set: one fused row per
/// input, PID error held at zero. Returns the rows (with bias column) and
/// the evolved state, ready for closed-loop forecasting.
pub fn run_pipeline(set: &SupervisedSet, cfg: &HybridConfig) -> Result<(FeatureMatrix, RunState)> {
    if set.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let mut state = init_state(cfg)?;
    state.horizon = set.horizon;
    let mut rows = Vec::with_capacity(set.len());
    for &x in &set.inputs {
        rows.push(pipeline_step(&mut state, x, 0.0, cfg)?);
    }
    Ok((FeatureMatrix::from_rows(&rows)?, state))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMode {
    /// Feed true inputs; the PID sees each prediction's realized error once
    /// its target arrives (`horizon` steps later).
    OneStep,
    /// Feed predictions back as inputs; the PID error stays zero.
    FreeRun,
}

/// Rolls the pipeline forward `n_steps`, applying the readout each step.
/// `test_inputs` supplies all inputs in one_step mode and the seed input in
/// free_run mode. May be called repeatedly on the same state; the pending
/// error queue carries across calls.
pub fn forecast(
    model: &ReadoutModel,
    state: &mut RunState,
    cfg: &HybridConfig,
    n_steps: usize,
    mode: ForecastMode,
    test_inputs: &[f64],
) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Ok(Vec::new());
    }
    match mode {
        ForecastMode::OneStep => {
            if test_inputs.len() < n_steps {
                return Err(Error::TooShort {
                    needed: n_steps,
                    got: test_inputs.len(),
                });
            }
        }
        ForecastMode::FreeRun => {
            if test_inputs.is_empty() {
                return Err(Error::TooShort { needed: 1, got: 0 });
            }
        }
    }
    let h = state.horizon.max(1);
    let mut preds: Vec<f64> = Vec::with_capacity(n_steps);
    for t in 0..n_steps {
        let x = match mode {
            ForecastMode::OneStep => test_inputs[t],
            ForecastMode::FreeRun => {
                if t == 0 {
                    test_inputs[0]
                } else {
                    preds[t - 1]
                }
            }
        };
        if !x.is_finite() {
            return Err(Error::Divergence {
                step: t,
                what: "free-run prediction fed back a non-finite input".into(),
            });
        }
        let error = match mode {
            ForecastMode::OneStep => {
                if state.pending.len() >= h {
                    let settled = state.pending.pop_front().expect("queue non-empty");
                    photonic::control_error(settled, x)
                } else {
                    0.0
                }
            }
            ForecastMode::FreeRun => 0.0,
        };
        let row = pipeline_step(state, x, error, cfg)?;
        let p = model.predict_one(&row)?;
        if mode == ForecastMode::OneStep {
            state.pending.push_back(p);
        }
        preds.push(p);
    }
    Ok(preds)
}

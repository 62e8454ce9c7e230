//! Driven, dissipative spin-chain reservoir simulated at the density-matrix
//! level.
//!
//! One reservoir step encodes a scalar input as identical Ry rotations,
//! evolves through `n_layers` of transverse-field Rx rotations plus
//! nearest-neighbor ZZ couplings, applies amplitude damping (T1) and pure
//! dephasing (T2) after every layer, then performs a weak Z measurement. The
//! measurement emits single-qubit `<Z_i>` and neighbor `<Z_i Z_{i+1}>`
//! expectations and scales all coherences by `1 - meas_strength` as
//! back-action. Fading memory comes from that back-action plus decoherence:
//! the state is never reset between inputs.

mod density;

pub use density::{rx, ry, DensityMatrix};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumConfig {
    pub n_qubits: usize,
    /// Evolution layers per input.
    pub n_layers: usize,
    /// ZZ coupling angle per layer (radians).
    pub coupling_j: f64,
    /// Transverse-field Rx angle per layer (radians).
    pub field_h: f64,
    /// Wall-clock duration of one layer, for decoherence strength.
    pub layer_dt_us: f64,
    /// Amplitude-damping time constant.
    pub t1_us: f64,
    /// Total coherence time; must satisfy t2 <= 2 t1.
    pub t2_us: f64,
    /// Weak-measurement strength g in [0, 1]; g = 1 is projective.
    pub meas_strength: f64,
    /// When set, encoding rotation signs are modulated per qubit by a
    /// seed-derived +-1 mask.
    pub per_qubit_mask: bool,
    pub seed: u64,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        QuantumConfig {
            n_qubits: 5,
            n_layers: 10,
            coupling_j: 1.2,
            field_h: 0.1,
            layer_dt_us: 1.0,
            t1_us: 50.0,
            t2_us: 35.0,
            meas_strength: 0.02,
            per_qubit_mask: false,
            seed: 0,
        }
    }
}

impl QuantumConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > 10 {
            return Err(Error::Config(format!(
                "n_qubits = {} outside supported range 1..=10",
                self.n_qubits
            )));
        }
        if self.n_layers == 0 {
            return Err(Error::Config("n_layers must be at least 1".into()));
        }
        for (name, v) in [("coupling_j", self.coupling_j), ("field_h", self.field_h)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.layer_dt_us >= 0.0) || !self.layer_dt_us.is_finite() {
            return Err(Error::Config(format!(
                "layer_dt_us must be finite and non-negative, got {}",
                self.layer_dt_us
            )));
        }
        if !(self.t1_us > 0.0) || !self.t1_us.is_finite() {
            return Err(Error::Config(format!("t1_us must be positive, got {}", self.t1_us)));
        }
        if !(self.t2_us > 0.0) || !self.t2_us.is_finite() {
            return Err(Error::Config(format!("t2_us must be positive, got {}", self.t2_us)));
        }
        if self.t2_us > 2.0 * self.t1_us {
            return Err(Error::Config(format!(
                "t2_us = {} exceeds the physical bound 2 t1_us = {}",
                self.t2_us,
                2.0 * self.t1_us
            )));
        }
        if !(0.0..=1.0).contains(&self.meas_strength) {
            return Err(Error::Config(format!(
                "meas_strength = {} outside [0, 1]",
                self.meas_strength
            )));
        }
        Ok(())
    }

    /// Feature count per step: n single-qubit plus n-1 neighbor correlators.
    pub fn feature_dim(&self) -> usize {
        2 * self.n_qubits - 1
    }

    /// The +-1 encoding mask; all +1 unless `per_qubit_mask` is set.
    pub fn encoding_mask(&self) -> Vec<f64> {
        if !self.per_qubit_mask {
            return vec![1.0; self.n_qubits];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_qubits)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect()
    }
}

/// Features emitted by one weak measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumFeatures {
    /// <Z_i> for each qubit.
    pub z: Vec<f64>,
    /// <Z_i Z_{i+1}> for each neighbor pair.
    pub zz: Vec<f64>,
}

impl QuantumFeatures {
    pub fn len(&self) -> usize {
        self.z.len() + self.zz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty() && self.zz.is_empty()
    }

    /// Concatenated [z..., zz...] layout.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.z);
        out.extend_from_slice(&self.zz);
        out
    }
}

/// Writes a scalar input into the state as Ry(theta) on every qubit
/// (sign-modulated when the config's per-qubit mask is enabled).
pub fn encode_input(rho: &mut DensityMatrix, theta: f64, cfg: &QuantumConfig) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::invalid("theta", theta, "must be finite"));
    }
    for (q, sign) in cfg.encoding_mask().into_iter().enumerate() {
        rho.apply_single_qubit(q, &ry(sign * theta));
    }
    Ok(())
}

/// One unitary evolution layer: Rx(field_h) on every qubit, then
/// exp(-i coupling_j Z Z / 2) on each nearest-neighbor pair of the open chain.
pub fn apply_layer(rho: &mut DensityMatrix, cfg: &QuantumConfig) {
    let gate = rx(cfg.field_h);
    for q in 0..cfg.n_qubits {
        rho.apply_single_qubit(q, &gate);
    }
    for q in 0..cfg.n_qubits.saturating_sub(1) {
        rho.apply_zz_phase(q, q + 1, cfg.coupling_j);
    }
}

/// Amplitude damping and pure dephasing on every qubit for a duration
/// `dt_us`, with p1 = 1 - exp(-dt/t1) and
/// p_phi = 1 - exp(-dt (1/t2 - 1/(2 t1))). Composed with the damping's own
/// coherence loss, off-diagonals decay by exactly exp(-dt/t2).
pub fn apply_decoherence(rho: &mut DensityMatrix, dt_us: f64, cfg: &QuantumConfig) -> Result<()> {
    if !(dt_us >= 0.0) || !dt_us.is_finite() {
        return Err(Error::invalid("dt_us", dt_us, "must be finite and non-negative"));
    }
    let p1 = 1.0 - (-dt_us / cfg.t1_us).exp();
    let phi_rate = 1.0 / cfg.t2_us - 0.5 / cfg.t1_us;
    let p_phi = 1.0 - (-dt_us * phi_rate).exp();
    for q in 0..rho.n_qubits() {
        rho.apply_amplitude_damping(q, p1);
        rho.apply_dephasing(q, p_phi);
    }
    Ok(())
}

/// Weak Z measurement: reports exact Z/ZZ expectations and, as back-action,
/// scales every coherence by `1 - meas_strength`. Populations (and therefore
/// the reported features) are unaffected by the back-action.
pub fn weak_measure(rho: &mut DensityMatrix, cfg: &QuantumConfig) -> QuantumFeatures {
    let n = rho.n_qubits();
    let z = (0..n).map(|q| rho.z_expectation(q)).collect();
    let zz = (0..n.saturating_sub(1))
        .map(|q| rho.zz_expectation(q, q + 1))
        .collect();
    rho.scale_off_diagonal(1.0 - cfg.meas_strength);
    QuantumFeatures { z, zz }
}

/// One full reservoir step: encode, evolve `n_layers` layers with
/// decoherence after each, measure weakly.
pub fn q_step(rho: &mut DensityMatrix, theta: f64, cfg: &QuantumConfig) -> Result<QuantumFeatures> {
    cfg.validate()?;
    if rho.n_qubits() != cfg.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "state has {} qubits, config expects {}",
            rho.n_qubits(),
            cfg.n_qubits
        )));
    }
    encode_input(rho, theta, cfg)?;
    for _ in 0..cfg.n_layers {
        apply_layer(rho, cfg);
        apply_decoherence(rho, cfg.layer_dt_us, cfg)?;
    }
    Ok(weak_measure(rho, cfg))
}

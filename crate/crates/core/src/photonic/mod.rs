//! Time-multiplexed photonic delay-line reservoir.
//!
//! A lumped Ikeda-style recurrence stands in for the physical waveguide loop:
//! the delay line holds `n_virtual` complex node amplitudes, each input is
//! broadcast to all nodes through a fixed +-1 mask, and one step sends every
//! amplitude around the loop once, through propagation loss, the Kerr phase,
//! and an externally supplied phase shift. Virtual nodes are chained in a
//! one-delay ring: node k is updated against the previous amplitude of node
//! k-1 (node 0 wraps to node n-1), which is what desynchronized masking in a
//! delay-line reservoir produces and what makes the per-node intensities
//! carry distinct information. Read-out is the intensity |E|^2 of each node.
//!
//! The [`pid`] submodule holds the phase-stabilization controller that
//! supplies `phase_shift` when the reservoir runs closed-loop.

pub mod pid;

pub use pid::{control_error, PidController};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotonicConfig {
    pub n_virtual: usize,
    pub mask_seed: u64,
    /// Feedback gain alpha in [0, 1); alpha * loss_factor must stay < 1.
    pub feedback_gain: f64,
    /// Input gain beta.
    pub input_gain: f64,
    /// Kerr coefficient gamma, radians per unit power.
    pub kerr_coeff: f64,
    pub loss_db_per_cm: f64,
    pub length_cm: f64,
    /// Static bias phase phi0.
    pub bias_phase: f64,
    /// Max |phase_shift| the actuator can apply.
    pub actuator_limit: f64,
}

impl Default for PhotonicConfig {
    fn default() -> Self {
        PhotonicConfig {
            n_virtual: 50,
            mask_seed: 7,
            feedback_gain: 0.75,
            input_gain: 0.8,
            kerr_coeff: 0.2,
            loss_db_per_cm: 0.5,
            length_cm: 0.1,
            bias_phase: 0.1,
            actuator_limit: std::f64::consts::PI,
        }
    }
}

impl PhotonicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_virtual == 0 {
            return Err(Error::Config("n_virtual must be at least 1".into()));
        }
        if !(self.loss_db_per_cm >= 0.0) || !self.loss_db_per_cm.is_finite() {
            return Err(Error::Config(format!(
                "loss_db_per_cm must be finite and non-negative, got {}",
                self.loss_db_per_cm
            )));
        }
        if !(self.length_cm >= 0.0) || !self.length_cm.is_finite() {
            return Err(Error::Config(format!(
                "length_cm must be finite and non-negative, got {}",
                self.length_cm
            )));
        }
        if !(0.0..1.0).contains(&self.feedback_gain) {
            return Err(Error::Config(format!(
                "feedback_gain = {} outside [0, 1)",
                self.feedback_gain
            )));
        }
        let round_trip = self.feedback_gain * self.loss_factor();
        if round_trip >= 1.0 {
            return Err(Error::Config(format!(
                "feedback_gain * loss_factor = {round_trip} breaks the contraction condition"
            )));
        }
        for (name, v) in [
            ("input_gain", self.input_gain),
            ("kerr_coeff", self.kerr_coeff),
            ("bias_phase", self.bias_phase),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.actuator_limit > 0.0) || !self.actuator_limit.is_finite() {
            return Err(Error::Config(format!(
                "actuator_limit must be positive, got {}",
                self.actuator_limit
            )));
        }
        Ok(())
    }

    pub fn loss_factor(&self) -> f64 {
        loss_factor(self.loss_db_per_cm, self.length_cm)
    }

    /// Safe amplitude bound for inputs with |x| <= max_input:
    /// (beta * max_input) / (1 - alpha * loss_factor).
    pub fn field_bound(&self, max_input: f64) -> f64 {
        self.input_gain.abs() * max_input / (1.0 - self.feedback_gain * self.loss_factor())
    }
}

/// Amplitude transmission of a waveguide: 10^(-dB_per_cm * cm / 20).
/// (Power transmission is the square.)
pub fn loss_factor(loss_db_per_cm: f64, length_cm: f64) -> f64 {
    10f64.powf(-loss_db_per_cm * length_cm / 20.0)
}

/// The +-1 input mask derived from `mask_seed`; a pure function of the
/// config.
pub fn input_mask(cfg: &PhotonicConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.mask_seed);
    (0..cfg.n_virtual)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// One pass of a field amplitude around the loop:
/// e_new = loss * [alpha * e_prev * exp(i(phi0 + phase_shift + gamma |e_prev|^2)) + beta * drive].
pub fn node_update(
    e_prev: Complex64,
    drive: f64,
    phase_shift: f64,
    cfg: &PhotonicConfig,
) -> Complex64 {
    let phase = cfg.bias_phase + phase_shift + cfg.kerr_coeff * e_prev.norm_sqr();
    let fed_back = cfg.feedback_gain * e_prev * Complex64::from_polar(1.0, phase);
    cfg.loss_factor() * (fed_back + cfg.input_gain * drive)
}

/// Delay-line contents plus a step counter for error reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    pub fields: Vec<Complex64>,
    pub step_index: u64,
}

impl PhotonicState {
    pub fn new(cfg: &PhotonicConfig) -> Self {
        PhotonicState {
            fields: vec![Complex64::ZERO; cfg.n_virtual],
            step_index: 0,
        }
    }
}

/// Per-node intensities |E_k|^2 after a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonicFeatures {
    pub intensities: Vec<f64>,
}

/// Advances every virtual node one loop round trip with a scalar input
/// broadcast through the mask: node k is driven by mask(k) * x_t and fed by
/// the delayed amplitude of node k-1 (ring wraparound at node 0).
pub fn p_step(
    state: &mut PhotonicState,
    x_t: f64,
    phase_shift: f64,
    cfg: &PhotonicConfig,
) -> Result<PhotonicFeatures> {
    let mask = input_mask(cfg);
    p_step_masked_drives(state, &mask.iter().map(|m| m * x_t).collect::<Vec<_>>(), phase_shift, cfg)
}

/// Generalized step with an explicit per-node drive vector: node k receives
/// mask(k) * drives[k mod drives.len()]. Used when an upstream stage supplies
/// a feature vector instead of a scalar sample.
pub fn p_step_drives(
    state: &mut PhotonicState,
    drives: &[f64],
    phase_shift: f64,
    cfg: &PhotonicConfig,
) -> Result<PhotonicFeatures> {
    if drives.is_empty() {
        return Err(Error::invalid("drives", 0, "need at least one drive value"));
    }
    let mask = input_mask(cfg);
    let per_node: Vec<f64> = (0..cfg.n_virtual)
        .map(|k| mask[k] * drives[k % drives.len()])
        .collect();
    p_step_masked_drives(state, &per_node, phase_shift, cfg)
}

fn p_step_masked_drives(
    state: &mut PhotonicState,
    per_node_drive: &[f64],
    phase_shift: f64,
    cfg: &PhotonicConfig,
) -> Result<PhotonicFeatures> {
    if state.fields.len() != cfg.n_virtual || per_node_drive.len() != cfg.n_virtual {
        return Err(Error::DimensionMismatch(format!(
            "state holds {} nodes, drives {}, config expects {}",
            state.fields.len(),
            per_node_drive.len(),
            cfg.n_virtual
        )));
    }
    let n = cfg.n_virtual;
    let mut next = Vec::with_capacity(n);
    let mut intensities = Vec::with_capacity(n);
    for k in 0..n {
        let delayed = state.fields[(k + n - 1) % n];
        let e = node_update(delayed, per_node_drive[k], phase_shift, cfg);
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::Divergence {
                step: state.step_index as usize,
                what: format!("photonic node {k} amplitude became non-finite"),
            });
        }
        intensities.push(e.norm_sqr());
        next.push(e);
    }
    state.fields = next;
    state.step_index += 1;
    Ok(PhotonicFeatures { intensities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn loss_factor_reference_points() {
        assert_eq!(loss_factor(0.0, 1.0), 1.0);
        assert_abs_diff_eq!(loss_factor(0.5, 0.1), 0.9942601, epsilon = 1e-7);
        assert_abs_diff_eq!(loss_factor(20.0, 1.0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn node_update_reference_points() {
        let zero_cfg = PhotonicConfig::default();
        assert_eq!(
            node_update(Complex64::ZERO, 0.0, 0.0, &zero_cfg),
            Complex64::ZERO
        );
        let linear = PhotonicConfig {
            kerr_coeff: 0.0,
            bias_phase: 0.0,
            feedback_gain: 0.5,
            input_gain: 1.0,
            loss_db_per_cm: 0.0,
            ..Default::default()
        };
        let e = node_update(Complex64::ONE, 1.0, 0.0, &linear);
        assert_abs_diff_eq!(e.re, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-15);
        let kerr = PhotonicConfig {
            kerr_coeff: std::f64::consts::PI,
            bias_phase: 0.0,
            feedback_gain: 0.999,
            input_gain: 0.0,
            loss_db_per_cm: 0.0,
            ..Default::default()
        };
        // Unit power picks up exactly pi of Kerr phase.
        let e = node_update(Complex64::ONE, 0.0, 0.0, &kerr);
        assert_abs_diff_eq!(e.re, -0.999, epsilon = 1e-12);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_input_zero_state_stays_zero() {
        let cfg = PhotonicConfig::default();
        let mut state = PhotonicState::new(&cfg);
        let f = p_step(&mut state, 0.0, 0.0, &cfg).unwrap();
        assert!(f.intensities.iter().all(|&i| i == 0.0));
        assert!(state.fields.iter().all(|e| *e == Complex64::ZERO));
        assert_eq!(state.step_index, 1);
    }

    #[test]
    fn trajectories_are_deterministic() {
        let cfg = PhotonicConfig::default();
        let run = || {
            let mut state = PhotonicState::new(&cfg);
            let mut out = Vec::new();
            for i in 0..200 {
                let x = (i as f64 * 0.1).sin() * 0.5 + 0.5;
                out.push(p_step(&mut state, x, 0.1, &cfg).unwrap());
            }
            (state, out)
        };
        let (s1, f1) = run();
        let (s2, f2) = run();
        assert_eq!(s1, s2);
        assert_eq!(f1, f2);
    }

    #[test]
    fn memoryless_limit_reproduces_squared_input() {
        let cfg = PhotonicConfig {
            feedback_gain: 0.0,
            input_gain: 1.0,
            loss_db_per_cm: 0.0,
            ..Default::default()
        };
        let mut state = PhotonicState::new(&cfg);
        p_step(&mut state, 0.9, 0.4, &cfg).unwrap();
        let f = p_step(&mut state, 0.7, -0.2, &cfg).unwrap();
        for &i in &f.intensities {
            assert_abs_diff_eq!(i, 0.49, epsilon = 1e-15);
        }
    }

    // With feedback on, ring chaining must give the virtual nodes distinct
    // intensities; a reservoir whose nodes all agree carries one feature.
    #[test]
    fn nodes_decorrelate_under_feedback()  {
        let cfg = PhotonicConfig::default();
        let mut state = PhotonicState::new(&cfg);
        let mut last = None;
        for i in 0..100 {
            let x = (i as f64 * 0.37).sin() * 0.5 + 0.5;
            last = Some(p_step(&mut state, x, 0.0, &cfg).unwrap());
        }
        let ints = last.unwrap().intensities;
        let distinct = {
            let mut sorted = ints.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            sorted.len()
        };
        assert!(distinct > 40, "only {distinct} distinct intensities of {}", ints.len());
    }

    #[test]
    fn mask_is_pure_and_seeded() {
        let a = input_mask(&PhotonicConfig::default());
        let b = input_mask(&PhotonicConfig::default());
        assert_eq!(a, b);
        assert!(a.iter().all(|&m| m == 1.0 || m == -1.0));
        let c = input_mask(&PhotonicConfig {
            mask_seed: 8,
            ..Default::default()
        });
        assert_ne!(a, c);
    }

    #[test]
    fn contraction_bound_holds_for_random_configs() {
        use rand::Rng as _;
        use rand::SeedableRng as _;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..100 {
            let cfg = PhotonicConfig {
                n_virtual: rng.gen_range(1..=12),
                mask_seed: rng.gen(),
                feedback_gain: rng.gen_range(0.0..0.99),
                input_gain: rng.gen_range(-2.0..2.0),
                kerr_coeff: rng.gen_range(-3.0..3.0),
                loss_db_per_cm: rng.gen_range(0.0..5.0),
                length_cm: rng.gen_range(0.0..1.0),
                bias_phase: rng.gen_range(-3.0..3.0),
                ..Default::default()
            };
            cfg.validate().unwrap();
            let bound = cfg.field_bound(1.0) + 1e-12;
            let mut state = PhotonicState::new(&cfg);
            for i in 0..100_000 {
                let x = (i as f64 * 0.11 + trial as f64).sin();
                let u = (i as f64 * 0.03).cos();
                p_step(&mut state, x, u, &cfg).unwrap();
            }
            for e in &state.fields {
                assert!(
                    e.norm() <= bound,
                    "trial {trial}: |E| = {} exceeds bound {bound}",
                    e.norm()
                );
            }
        }
    }

    #[test]
    fn validates_config() {
        assert!(PhotonicConfig { n_virtual: 0, ..Default::default() }.validate().is_err());
        assert!(PhotonicConfig { feedback_gain: 1.0, ..Default::default() }.validate().is_err());
        assert!(PhotonicConfig { loss_db_per_cm: -0.5, ..Default::default() }.validate().is_err());
        PhotonicConfig::default().validate().unwrap();
    }

    #[test]
    fn drive_vector_is_tiled_cyclically() {
        let cfg = PhotonicConfig {
            n_virtual: 5,
            feedback_gain: 0.0,
            input_gain: 1.0,
            loss_db_per_cm: 0.0,
            ..Default::default()
        };
        let mut state = PhotonicState::new(&cfg);
        let f = p_step_drives(&mut state, &[0.5, 0.25], 0.0, &cfg).unwrap();
        // Intensities square away the mask: tiling pattern [.5, .25, .5, .25, .5].
        let expect = [0.25, 0.0625, 0.25, 0.0625, 0.25];
        for (got, want) in f.intensities.iter().zip(expect) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-15);
        }
    }
}

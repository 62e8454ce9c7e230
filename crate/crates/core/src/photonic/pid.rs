//! Discrete PID controller for the reservoir's phase actuator.
//!
//! Runs at a fixed sample rate (1 kHz by default). The integral term uses the
//! trapezoidal rule with clamping anti-windup: the stored integral is limited
//! so that `ki * integ` always lies inside the actuator range. The derivative
//! is the backward difference passed through a backward-Euler first-order
//! low-pass filter (`tau = 1/(2 pi f_c)`, `alpha = tau / (tau + dt)`) before
//! the `kd` gain, which keeps sample-to-sample noise out of the actuator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signed prediction error fed to the controller: `y_pred - y_true`.
pub fn control_error(y_pred: f64, y_true: f64) -> f64 {
    y_pred - y_true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidController {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Sample period in seconds.
    pub dt_s: f64,
    /// Derivative low-pass cutoff in Hz.
    pub lpf_cutoff_hz: f64,
    pub out_min: f64,
    pub out_max: f64,
    #[serde(skip)]
    integ: f64,
    #[serde(skip)]
    deriv_filtered: f64,
    #[serde(skip)]
    prev_error: f64,
}

impl Default for PidController {
    fn default() -> Self {
        PidController {
            kp: 0.45,
            ki: 0.12,
            kd: 0.08,
            dt_s: 1e-3,
            lpf_cutoff_hz: 50.0,
            out_min: -std::f64::consts::PI,
            out_max: std::f64::consts::PI,
            integ: 0.0,
            deriv_filtered: 0.0,
            prev_error: 0.0,
        }
    }
}

impl PidController {
    /// Controller with given gains and symmetric actuator limit, default
    /// sample rate and filter.
    pub fn new(kp: f64, ki: f64, kd: f64, limit: f64) -> Self {
        PidController {
            kp,
            ki,
            kd,
            out_min: -limit,
            out_max: limit,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || !self.dt_s.is_finite() {
            return Err(Error::Config(format!("pid dt_s must be positive, got {}", self.dt_s)));
        }
        if !(self.lpf_cutoff_hz > 0.0) || !self.lpf_cutoff_hz.is_finite() {
            return Err(Error::Config(format!(
                "pid lpf_cutoff_hz must be positive, got {}",
                self.lpf_cutoff_hz
            )));
        }
        if !(self.out_min < self.out_max) {
            return Err(Error::Config(format!(
                "pid limits [{}, {}] are not an interval",
                self.out_min, self.out_max
            )));
        }
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("pid {name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Forgets accumulated state, keeping gains and limits.
    pub fn reset(&mut self) {
        self.integ = 0.0;
        self.deriv_filtered = 0.0;
        self.prev_error = 0.0;
    }

    /// Clamped integral contribution `ki * integ`, exposed for anti-windup
    /// checks.
    pub fn integral_term(&self) -> f64 {
        self.ki * self.integ
    }

    /// One controller sample. Returns the actuator command.
    pub fn update(&mut self, error: f64) -> f64 {
        let p = self.kp * error;

        self.integ += 0.5 * (error + self.prev_error) * self.dt_s;
        let mut i_term = self.ki * self.integ;
        if i_term > self.out_max {
            i_term = self.out_max;
        } else if i_term < self.out_min {
            i_term = self.out_min;
        }
        if self.ki != 0.0 {
            self.integ = i_term / self.ki;
        }

        let raw_deriv = (error - self.prev_error) / self.dt_s;
        let tau = 1.0 / (2.0 * std::f64::consts::PI * self.lpf_cutoff_hz);
        let alpha = tau / (tau + self.dt_s);
        self.deriv_filtered = alpha * self.deriv_filtered + (1.0 - alpha) * raw_deriv;
        let d = self.kd * self.deriv_filtered;

        self.prev_error = error;
        (p + i_term + d).clamp(self.out_min, self.out_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_error_gives_zero_output() {
        let mut pid = PidController::default();
        for _ in 0..100 {
            assert_eq!(pid.update(0.0), 0.0);
        }
    }

    #[test]
    fn zero_gains_give_zero_output() {
        let mut pid = PidController::new(0.0, 0.0, 0.0, 10.0);
        for i in 0..500 {
            let e = ((i * 37) % 11) as f64 - 5.0;
            assert_eq!(pid.update(e), 0.0);
        }
    }

    #[test]
    fn pure_p_response() {
        let mut pid = PidController::new(0.45, 0.0, 0.0, 10.0);
        assert_abs_diff_eq!(pid.update(1.0), 0.45, epsilon = 1e-15);
    }

    #[test]
    fn control_error_is_signed_difference() {
        assert_eq!(control_error(1.0, 1.0), 0.0);
        assert_eq!(control_error(2.0, 0.5), 1.5);
        assert_eq!(control_error(0.0, 1.0), -1.0);
    }

    // Independent transcription of the same discrete recurrence, written
    // directly from the controller definition.
    fn reference_trajectory(errors: &[f64], limit: f64) -> Vec<f64> {
        let (kp, ki, kd) = (0.45, 0.12, 0.08);
        let dt = 1e-3;
        let tau = 1.0 / (2.0 * std::f64::consts::PI * 50.0);
        let a = tau / (tau + dt);
        let mut integ = 0.0f64;
        let mut df = 0.0f64;
        let mut prev = 0.0f64;
        let mut out = Vec::with_capacity(errors.len());
        for &e in errors {
            integ += 0.5 * (e + prev) * dt;
            integ = integ.clamp(-limit / ki, limit / ki);
            df = a * df + (1.0 - a) * (e - prev) / dt;
            prev = e;
            let u = kp * e + ki * integ + kd * df;
            out.push(u.clamp(-limit, limit));
        }
        out
    }

    #[test]
    fn matches_reference_recurrence_on_step_error() {
        let errors = vec![1.0; 1000];
        let expect = reference_trajectory(&errors, std::f64::consts::PI);
        let mut pid = PidController::default();
        for (i, &e) in errors.iter().enumerate() {
            let u = pid.update(e);
            assert!(
                (u - expect[i]).abs() < 1e-9,
                "sample {i}: {u} vs {}",
                expect[i]
            );
        }
        // Constant error: the filtered derivative settles back to zero.
        let tail = {
            let mut pid = PidController::new(0.0, 0.0, 0.08, 10.0);
            let mut last = 0.0;
            for _ in 0..1000 {
                last = pid.update(1.0);
            }
            last
        };
        assert_abs_diff_eq!(tail, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_reference_on_mixed_waveform() {
        let errors: Vec<f64> = (0..2000)
            .map(|i| {
                let t = i as f64 * 1e-3;
                (2.0 * std::f64::consts::PI * 3.0 * t).sin() + 0.3 * (71.0 * t).cos()
            })
            .collect();
        let expect = reference_trajectory(&errors, std::f64::consts::PI);
        let mut pid = PidController::default();
        for (i, &e) in errors.iter().enumerate() {
            assert!((pid.update(e) - expect[i]).abs() < 1e-9, "sample {i}");
        }
    }

    #[test]
    fn anti_windup_clamps_integral_and_recovers_fast() {
        let mut pid = PidController {
            out_min: -1.0,
            out_max: 1.0,
            ..Default::default()
        };
        for _ in 0..5000 {
            pid.update(10.0);
            assert!(pid.integral_term().abs() <= 1.0 + 1e-12);
        }
        // Error flips sign; with no windup the output must leave the +1 rail
        // within 10 samples.
        let mut left = None;
        for i in 0..10 {
            let u = pid.update(-10.0);
            if u < 1.0 - 1e-9 {
                left = Some(i);
                break;
            }
        }
        assert!(left.is_some(), "output stuck at saturation after sign flip");
    }

    // A 200 Hz sinusoid at 1 kHz sampling: the filtered derivative amplitude
    // over the raw discrete derivative amplitude should be near the analog
    // attenuation 1/sqrt(1 + (200/50)^2) = 0.2425.
    #[test]
    fn derivative_filter_attenuation_at_200hz() {
        let f = 200.0;
        let dt = 1e-3;
        let mut pid = PidController::new(0.0, 0.0, 1.0, 1e9);
        let mut amp = 0.0f64;
        for i in 0..4000 {
            let e = (2.0 * std::f64::consts::PI * f * i as f64 * dt).sin();
            let u = pid.update(e);
            if i >= 2000 {
                amp = amp.max(u.abs());
            }
        }
        // Raw backward-difference amplitude of sin(2 pi f t): 2 sin(pi f dt) / dt.
        let raw_amp = 2.0 * (std::f64::consts::PI * f * dt).sin() / dt;
        let ratio = amp / raw_amp;
        assert!(
            (ratio - 0.2425).abs() < 0.1 * 0.2425,
            "attenuation {ratio} outside 0.2425 +- 10%"
        );
    }

    #[test]
    fn reset_clears_state() {
        let mut pid = PidController::default();
        for _ in 0..100 {
            pid.update(2.0);
        }
        pid.reset();
        assert_eq!(pid.update(0.0), 0.0);
        assert_eq!(pid.integral_term(), 0.0);
    }

    #[test]
    fn validate_rejects_bad_fields() {
        assert!(PidController { dt_s: 0.0, ..Default::default() }.validate().is_err());
        assert!(PidController { lpf_cutoff_hz: -1.0, ..Default::default() }.validate().is_err());
        assert!(
            PidController { out_min: 1.0, out_max: -1.0, ..Default::default() }
                .validate()
                .is_err()
        );
        PidController::default().validate().unwrap();
    }
}

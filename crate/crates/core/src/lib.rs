//! Simulation toolkit for hybrid photonic-quantum reservoir computing.
//!
//! The crate is organized around a benchmark pipeline for one-step and
//! free-running forecasting of chaotic time series:
//!
//! - [`data`]: Mackey-Glass and Lorenz generators, CSV ingestion,
//!   normalization, noise injection, supervised windowing.
//! - [`quantum`]: density-matrix simulation of a small driven spin chain with
//!   amplitude damping, dephasing, and weak measurement.
//! - [`photonic`]: time-multiplexed Kerr delay-line reservoir with a PID
//!   phase-stabilization loop.
//! - [`readout`]: ridge regression (closed-form and iterative) with
//!   chronological cross-validation and model serialization.
//! - [`pipeline`]: couples the two reservoirs, fuses their features, and runs
//!   training/forecast loops.
//! - [`baselines`]: echo state network, quantum-only reservoir, and AR(p)
//!   reference models.
//! - [`metrics`]: NMSE/accuracy, ROI helpers, rank and t statistics,
//!   bootstrap intervals.
//! - [`timing`]: throughput measurement with warm-up and stability checks.
//! - [`experiment`]: one benchmark cell (model x dataset x noise x seed) run
//!   end to end; shared by the CLI and the test suites.
//!
//! Every stochastic component takes an explicit seed and the whole pipeline
//! is deterministic: identical inputs and seeds produce bitwise-identical
//! features, weights, and predictions on a given platform.

pub mod baselines;
pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod photonic;
pub mod pipeline;
pub mod quantum;
pub mod readout;
pub mod timing;

pub use error::{Error, Result};

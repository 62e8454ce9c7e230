//! The shared benchmark protocol: dataset construction, per-cell training
//! and one-step evaluation, trial seeding, and inference timing. The CLI and
//! the integration suites both run cells through this module so a benchmark
//! cell means exactly one thing everywhere.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::baselines::{self, EsnConfig};
use crate::data::{
    add_gaussian_noise, gen_lorenz, gen_mackey_glass, load_csv, make_supervised, ColumnSelector,
    LorenzParams, MackeyGlassParams, SupervisedSet, TimeSeries,
};
use crate::error::{Error, Result};
use crate::metrics;
use crate::pipeline::{self, ForecastMode, HybridConfig};
use crate::quantum::QuantumConfig;
use crate::readout::{fit_ridge, FeatureMatrix, ReadoutModel};
use crate::timing::{measure_throughput, ThroughputReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Hpqrc,
    QuantumOnly,
    Esn,
    Ar,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Hpqrc,
        ModelKind::QuantumOnly,
        ModelKind::Esn,
        ModelKind::Ar,
    ];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Hpqrc => "hpqrc",
            ModelKind::QuantumOnly => "quantum_only",
            ModelKind::Esn => "esn",
            ModelKind::Ar => "ar",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hpqrc" => Ok(ModelKind::Hpqrc),
            "quantum_only" => Ok(ModelKind::QuantumOnly),
            "esn" => Ok(ModelKind::Esn),
            "ar" => Ok(ModelKind::Ar),
            other => Err(Error::Config(format!(
                "unknown model '{other}'; expected hpqrc | quantum_only | esn | ar"
            ))),
        }
    }
}

/// Benchmark data source; external series are addressed as `csv:<path>`
/// (first value column, i.e. column index 1 after the index column).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DatasetKind {
    MackeyGlass,
    Lorenz,
    Csv(String),
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetKind::MackeyGlass => f.write_str("mackey_glass"),
            DatasetKind::Lorenz => f.write_str("lorenz"),
            DatasetKind::Csv(path) => write!(f, "csv:{path}"),
        }
    }
}

impl From<DatasetKind> for String {
    fn from(d: DatasetKind) -> String {
        d.to_string()
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mackey_glass" => Ok(DatasetKind::MackeyGlass),
            "lorenz" => Ok(DatasetKind::Lorenz),
            other => match other.strip_prefix("csv:") {
                Some(path) if !path.is_empty() => Ok(DatasetKind::Csv(path.to_string())),
                _ => Err(Error::Config(format!(
                    "unknown dataset '{other}'; expected mackey_glass | lorenz | csv:<path>"
                ))),
            },
        }
    }
}

impl TryFrom<String> for DatasetKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Split sizes, horizon, noise level, and seeding for one benchmark cell.
/// Generated series are sized so the washout/train/test counts come out
/// exactly; CSV series keep their file length and use the same train
/// fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub washout: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub horizon: usize,
    pub lambda: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Highest autoregressive order offered to the order search.
    pub ar_p_max: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            washout: 1000,
            n_train: 4000,
            n_test: 1000,
            horizon: 1,
            lambda: 0.01,
            noise_sigma: 0.0,
            seed: 42,
            ar_p_max: 12,
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::Config(
                "n_train and n_test must both be positive".into(),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!(
                "noise_sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        if self.ar_p_max == 0 {
            return Err(Error::Config("ar_p_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Generated-series length giving exactly n_train/n_test pairs.
    pub fn series_len(&self) -> usize {
        self.washout + self.horizon + self.n_train + self.n_test
    }

    pub fn split(&self) -> f64 {
        self.n_train as f64 / (self.n_train + self.n_test) as f64
    }
}

/// Every model's configuration for a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub protocol: Protocol,
    pub hybrid: HybridConfig,
    pub quantum_only: QuantumConfig,
    pub esn: EsnConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            protocol: Protocol::default(),
            hybrid: HybridConfig::default(),
            quantum_only: QuantumConfig {
                n_qubits: 8,
                ..Default::default()
            },
            esn: EsnConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        self.hybrid.validate()?;
        self.quantum_only.validate()?;
        self.esn.validate()
    }

    /// Copy of the config with every seed replaced by `seed` — noise
    /// injection, photonic mask, quantum mask, and ESN draw all follow one
    /// trial seed so a cell is a single reproducible unit.
    pub fn with_seed(&self, seed: u64) -> BenchConfig {
        let mut out = self.clone();
        out.protocol.seed = seed;
        out.hybrid.quantum.seed = seed;
        out.hybrid.photonic.mask_seed = seed;
        out.quantum_only.seed = seed;
        out.esn.seed = seed;
        out
    }
}

/// Generates (or loads) the cell's series and applies noise injection,
/// which also leaves the series normalized to [0, 1].
pub fn build_series(dataset: &DatasetKind, proto: &Protocol) -> Result<TimeSeries> {
    let raw = match dataset {
        DatasetKind::MackeyGlass => {
            gen_mackey_glass(&MackeyGlassParams::default(), proto.series_len())?
        }
        DatasetKind::Lorenz => {
            gen_lorenz(&LorenzParams::default(), proto.series_len())?.component(0)?
        }
        DatasetKind::Csv(path) => load_csv(path, &ColumnSelector::Index(1), 1.0)?,
    };
    add_gaussian_noise(&raw, proto.noise_sigma, proto.seed)
}

/// Outcome of one (model, dataset, sigma, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub model: ModelKind,
    pub dataset: DatasetKind,
    pub noise_sigma: f64,
    pub seed: u64,
    pub nmse: f64,
    pub accuracy_pct: f64,
    /// Feature count per row (AR reports its chosen order).
    pub feature_dim: usize,
    pub ar_order: Option<usize>,
    pub predictions: Vec<f64>,
    pub targets: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub throughput: Option<ThroughputReport>,
}

fn score(
    model: ModelKind,
    dataset: &DatasetKind,
    proto: &Protocol,
    preds: Vec<f64>,
    targets: &[f64],
    feature_dim: usize,
    ar_order: Option<usize>,
    throughput: Option<ThroughputReport>,
) -> Result<CellResult> {
    let nmse = metrics::nmse(targets, &preds)?;
    Ok(CellResult {
        model,
        dataset: dataset.clone(),
        noise_sigma: proto.noise_sigma,
        seed: proto.seed,
        nmse,
        accuracy_pct: metrics::accuracy_pct(targets, &preds)?,
        feature_dim,
        ar_order,
        predictions: preds,
        targets: targets.to_vec(),
        throughput,
    })
}

/// Trains the requested model on the cell's train split and scores one-step
/// predictions over the test split. With `timed`, one-step inference
/// throughput is measured over the test inputs after scoring.
pub fn run_cell(
    model: ModelKind,
    dataset: &DatasetKind,
    cfg: &BenchConfig,
    timed: bool,
) -> Result<CellResult> {
    cfg.validate()?;
    let proto = &cfg.protocol;
    let series = build_series(dataset, proto)?;
    let (train, test) = make_supervised(&series, proto.horizon, proto.washout, proto.split())?;
    match model {
        ModelKind::Hpqrc => {
            let (x, state) = pipeline::run_pipeline(&train, &cfg.hybrid)?;
            let w = fit_ridge(&x, &train.targets, proto.lambda)?;
            let mut fstate = state.clone();
            let preds = pipeline::forecast(
                &w,
                &mut fstate,
                &cfg.hybrid,
                test.len(),
                ForecastMode::OneStep,
                &test.inputs,
            )?;
            let throughput = if timed {
                let hybrid = cfg.hybrid.clone();
                let inputs = test.inputs.clone();
                let mut tstate = state.clone();
                let mut t = 0usize;
                Some(measure_throughput(
                    |k| {
                        for _ in 0..k {
                            let x_t = inputs[t % inputs.len()];
                            let row = pipeline::pipeline_step(&mut tstate, x_t, 0.0, &hybrid)
                                .expect("timed step");
                            std::hint::black_box(w.predict_one(&row).expect("timed predict"));
                            t += 1;
                        }
                    },
                    500,
                    5,
                )?)
            } else {
                None
            };
            score(
                model,
                dataset,
                proto,
                preds,
                &test.targets,
                cfg.hybrid.fused_dim(),
                None,
                throughput,
            )
        }
        ModelKind::QuantumOnly => {
            let (x, rho) = baselines::quantum_only_run(&train, &cfg.quantum_only)?;
            let w = fit_ridge(&x, &train.targets, proto.lambda)?;
            let mut frho = rho.clone();
            let preds = baselines::quantum_only_forecast(
                &w,
                &mut frho,
                &cfg.quantum_only,
                test.len(),
                &test.inputs,
            )?;
            let throughput = if timed {
                let qcfg = cfg.quantum_only.clone();
                let inputs = test.inputs.clone();
                let mut trho = rho.clone();
                let mut t = 0usize;
                Some(measure_throughput(
                    |k| {
                        for _ in 0..k {
                            let theta = std::f64::consts::PI * inputs[t % inputs.len()];
                            let row = crate::quantum::q_step(&mut trho, theta, &qcfg)
                                .expect("timed step")
                                .to_vec();
                            std::hint::black_box(w.predict_one(&row).expect("timed predict"));
                            t += 1;
                        }
                    },
                    500,
                    5,
                )?)
            } else {
                None
            };
            score(
                model,
                dataset,
                proto,
                preds,
                &test.targets,
                cfg.quantum_only.feature_dim(),
                None,
                throughput,
            )
        }
        ModelKind::Esn => {
            let (x, esn) = baselines::esn_run(&train, &cfg.esn)?;
            let w = fit_ridge(&x, &train.targets, proto.lambda)?;
            let mut fesn = esn.clone();
            let preds = baselines::esn_forecast(&w, &mut fesn, test.len(), &test.inputs)?;
            let throughput = if timed {
                let inputs = test.inputs.clone();
                let mut tesn = esn.clone();
                let mut t = 0usize;
                Some(measure_throughput(
                    |k| {
                        for _ in 0..k {
                            let row = tesn.step(inputs[t % inputs.len()]).to_vec();
                            std::hint::black_box(w.predict_one(&row).expect("timed predict"));
                            t += 1;
                        }
                    },
                    2000,
                    5,
                )?)
            } else {
                None
            };
            score(
                model,
                dataset,
                proto,
                preds,
                &test.targets,
                cfg.esn.n_nodes,
                None,
                throughput,
            )
        }
        ModelKind::Ar => run_ar_cell(dataset, cfg, &series, &train, &test, timed),
    }
}

fn run_ar_cell(
    dataset: &DatasetKind,
    cfg: &BenchConfig,
    series: &TimeSeries,
    train: &SupervisedSet,
    test: &SupervisedSet,
    timed: bool,
) -> Result<CellResult> {
    let proto = &cfg.protocol;
    let values = &series.values;
    let h = proto.horizon;
    // Training sample: every value underlying the train pairs.
    let train_end = proto.washout + train.len() + h;
    let ar = baselines::fit_ar_aic(&values[proto.washout..train_end], proto.ar_p_max)?;
    // Recursive h-step forecast from each test input's position.
    let mut preds = Vec::with_capacity(test.len());
    for i in 0..test.len() {
        let t_i = proto.washout + train.len() + i;
        let mut window: Vec<f64> = values[..=t_i].to_vec();
        for _ in 0..h {
            let p = ar.predict_next(&window)?;
            window.push(p);
        }
        preds.push(*window.last().expect("window non-empty"));
    }
    let throughput = if timed {
        let inputs = test.inputs.clone();
        let order = ar.order_p.max(1);
        let mut window: Vec<f64> = values[..train_end].to_vec();
        let mut t = 0usize;
        let ar_t = ar.clone();
        Some(measure_throughput(
            |k| {
                for _ in 0..k {
                    std::hint::black_box(ar_t.predict_next(&window).expect("timed predict"));
                    window.push(inputs[t % inputs.len()]);
                    if window.len() > 4 * order {
                        window.drain(..window.len() - 2 * order);
                    }
                    t += 1;
                }
            },
            2000,
            5,
        )?)
    } else {
        None
    };
    score(
        ModelKind::Ar,
        dataset,
        proto,
        preds,
        &test.targets,
        ar.order_p,
        Some(ar.order_p),
        throughput,
    )
}

/// Runs `trials` cells with seeds base, base+1, ... and returns the results.
pub fn run_trials(
    model: ModelKind,
    dataset: &DatasetKind,
    cfg: &BenchConfig,
    trials: usize,
) -> Result<Vec<CellResult>> {
    (0..trials as u64)
        .map(|t| run_cell(model, dataset, &cfg.with_seed(cfg.protocol.seed + t), false))
        .collect()
}

/// Iterative-trainer learning curve for one hybrid cell, for plot emission.
pub fn hpqrc_learning_curve(
    dataset: &DatasetKind,
    cfg: &BenchConfig,
    iter: &crate::readout::IterConfig,
) -> Result<(ReadoutModel, crate::readout::TrainHistory)> {
    cfg.validate()?;
    let proto = &cfg.protocol;
    let series = build_series(dataset, proto)?;
    let (train, _) = make_supervised(&series, proto.horizon, proto.washout, proto.split())?;
    let (x, _) = pipeline::run_pipeline(&train, &cfg.hybrid)?;
    crate::readout::fit_iterative(&x, &train.targets, proto.lambda, iter)
}

/// Harvested training features for one cell, exposed for cross-validation
/// workflows.
pub fn training_features(
    model: ModelKind,
    dataset: &DatasetKind,
    cfg: &BenchConfig,
) -> Result<(FeatureMatrix, Vec<f64>)> {
    cfg.validate()?;
    let proto = &cfg.protocol;
    let series = build_series(dataset, proto)?;
    let (train, _) = make_supervised(&series, proto.horizon, proto.washout, proto.split())?;
    let x = match model {
        ModelKind::Hpqrc => pipeline::run_pipeline(&train, &cfg.hybrid)?.0,
        ModelKind::QuantumOnly => baselines::quantum_only_run(&train, &cfg.quantum_only)?.0,
        ModelKind::Esn => baselines::esn_run(&train, &cfg.esn)?.0,
        ModelKind::Ar => {
            return Err(Error::Config(
                "the autoregressive baseline has no feature matrix".into(),
            ))
        }
    };
    Ok((x, train.targets))
}

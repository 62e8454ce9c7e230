//! Config file schemas for `run` and `sweep`.
//!
//! Configs are TOML with every field optional (defaults fill the rest) and
//! unknown keys rejected by name, so typos fail loudly instead of silently
//! running a default.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hpqrc_core::baselines::EsnConfig;
use hpqrc_core::experiment::{BenchConfig, DatasetKind, ModelKind, Protocol};
use hpqrc_core::pipeline::{HybridConfig, Topology};
use hpqrc_core::quantum::QuantumConfig;

/// One benchmark cell: which model on which dataset, plus every module
/// config. This is both the `run` config file schema and the snapshot
/// embedded in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub dataset: DatasetKind,
    pub protocol: Protocol,
    pub hybrid: HybridConfig,
    pub quantum_only: QuantumConfig,
    pub esn: EsnConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_bench(ModelKind::Hpqrc, DatasetKind::MackeyGlass, &BenchConfig::default())
    }
}

impl RunConfig {
    pub fn from_bench(model: ModelKind, dataset: DatasetKind, bench: &BenchConfig) -> Self {
        RunConfig {
            model,
            dataset,
            protocol: bench.protocol.clone(),
            hybrid: bench.hybrid.clone(),
            quantum_only: bench.quantum_only.clone(),
            esn: bench.esn.clone(),
        }
    }

    pub fn bench(&self) -> BenchConfig {
        BenchConfig {
            protocol: self.protocol.clone(),
            hybrid: self.hybrid.clone(),
            quantum_only: self.quantum_only.clone(),
            esn: self.esn.clone(),
        }
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            let bench = self.bench().with_seed(seed);
            *self = RunConfig::from_bench(self.model, self.dataset.clone(), &bench);
        }
        if let Some(sigma) = ov.sigma {
            self.protocol.noise_sigma = sigma;
        }
        if let Some(topology) = ov.topology {
            self.hybrid.topology = topology;
        }
    }

    pub fn validate(&self) -> hpqrc_core::Result<()> {
        self.bench().validate()
    }
}

/// Command-line overrides layered on top of a config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub topology: Option<Topology>,
}

pub fn parse_topology(s: &str) -> Result<Topology> {
    match s {
        "parallel" => Ok(Topology::Parallel),
        "sequential" => Ok(Topology::Sequential),
        other => bail!("unknown topology `{other}`; expected `parallel` or `sequential`"),
    }
}

/// `sweep` config: a grid plus the module configs shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: GridConfig,
    pub protocol: Protocol,
    pub hybrid: HybridConfig,
    pub quantum_only: QuantumConfig,
    pub esn: EsnConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub models: Vec<ModelKind>,
    pub datasets: Vec<DatasetKind>,
    pub noise_sigmas: Vec<f64>,
    /// Base seeds; each fans out into `trials` consecutive trial seeds.
    pub seeds: Vec<u64>,
    pub trials: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            models: vec![ModelKind::Hpqrc, ModelKind::Esn],
            datasets: vec![DatasetKind::MackeyGlass],
            noise_sigmas: vec![0.0, 0.1, 0.3],
            seeds: vec![42],
            trials: 10,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            bail!("grid.models must not be empty");
        }
        if self.datasets.is_empty() {
            bail!("grid.datasets must not be empty");
        }
        if self.noise_sigmas.is_empty() {
            bail!("grid.noise_sigmas must not be empty");
        }
        if self.seeds.is_empty() {
            bail!("grid.seeds must not be empty");
        }
        if self.trials == 0 {
            bail!("grid.trials must be at least 1");
        }
        for &s in &self.noise_sigmas {
            if !s.is_finite() || s < 0.0 {
                bail!("grid.noise_sigmas entries must be finite and non-negative, got {s}");
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.models.len() * self.datasets.len() * self.noise_sigmas.len() * self.seeds.len()
            * self.trials
    }
}

impl SweepConfig {
    /// Expands the grid into one `RunConfig` per cell, in deterministic
    /// model -> dataset -> sigma -> seed -> trial order.
    pub fn cells(&self) -> Vec<RunConfig> {
        let mut out = Vec::with_capacity(self.grid.n_cells());
        for &model in &self.grid.models {
            for dataset in &self.grid.datasets {
                for &sigma in &self.grid.noise_sigmas {
                    for &base in &self.grid.seeds {
                        for trial in 0..self.grid.trials {
                            let bench = BenchConfig {
                                protocol: self.protocol.clone(),
                                hybrid: self.hybrid.clone(),
                                quantum_only: self.quantum_only.clone(),
                                esn: self.esn.clone(),
                            }
                            .with_seed(base + trial as u64);
                            let mut cfg =
                                RunConfig::from_bench(model, dataset.clone(), &bench);
                            cfg.protocol.noise_sigma = sigma;
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: RunConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(cfg)
}

pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: SweepConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = toml::from_str::<RunConfig>("mdoel = \"esn\"\n").unwrap_err();
        assert!(err.to_string().contains("mdoel"), "{err}");
        let err =
            toml::from_str::<RunConfig>("[protocol]\nwashout_steps = 3\n").unwrap_err();
        assert!(err.to_string().contains("washout_steps"), "{err}");
    }

    #[test]
    fn empty_config_file_is_all_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.hybrid.fused_dim(), 59);
    }

    #[test]
    fn grid_expansion_counts_and_seeds() {
        let mut sweep = SweepConfig::default();
        sweep.grid.models = vec![ModelKind::Esn, ModelKind::Ar];
        sweep.grid.noise_sigmas = vec![0.0, 0.1, 0.3];
        sweep.grid.seeds = vec![42];
        sweep.grid.trials = 10;
        let cells = sweep.cells();
        assert_eq!(cells.len(), 60);
        assert_eq!(cells.len(), sweep.grid.n_cells());
        // Trials fan out from the base seed; every module seed follows.
        let seeds: Vec<u64> = cells[..10].iter().map(|c| c.protocol.seed).collect();
        assert_eq!(seeds, (42..52).collect::<Vec<u64>>());
        assert_eq!(cells[3].esn.seed, 45);
        assert_eq!(cells[3].hybrid.photonic.mask_seed, 45);
    }

    #[test]
    fn empty_grid_axis_is_rejected() {
        let mut grid = GridConfig::default();
        grid.datasets.clear();
        assert!(grid.validate().is_err());
        let mut grid = GridConfig::default();
        grid.trials = 0;
        assert!(grid.validate().is_err());
    }

    #[test]
    fn overrides_change_seed_sigma_topology() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            seed: Some(7),
            sigma: Some(0.3),
            topology: Some(Topology::Sequential),
        });
        assert_eq!(cfg.protocol.seed, 7);
        assert_eq!(cfg.hybrid.quantum.seed, 7);
        assert_eq!(cfg.protocol.noise_sigma, 0.3);
        assert_eq!(cfg.hybrid.topology, Topology::Sequential);
    }
}

//! Experiment configuration files (TOML).
//!
//! One file describes a set of datasets, the algorithms to compare on each,
//! restart count, base seeds and strategy parameters. Every field not given
//! takes its documented default; the fully resolved form serializes back
//! for manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acquisition::{AlgorithmKind, Strategy, TypiClustParams};
use crate::data::{load_tabular, DivergingSinParams, ThreeClustGeometry, TabularSource};
use crate::error::{Error, Result};
use crate::model::{OptimizerConfig, Protocol, TrainConfig};
use crate::oracle::OracleConfig;
use crate::runner::{Acquirer, BudgetRule, DataSource, RunConfig};
use crate::rng::Seeds;

fn default_restarts() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    pub algorithms: Vec<AlgorithmKind>,
    /// Worker threads; 0 means one per available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub seeds: SeedsConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub strategies: StrategyParams,
    #[serde(default)]
    pub budget_rule: BudgetRule,
    pub datasets: Vec<DatasetConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedsConfig {
    pub omega: u64,
    pub data: u64,
    pub model: u64,
}

impl Default for SeedsConfig {
    fn default() -> Self {
        let s = Seeds::default();
        SeedsConfig {
            omega: s.omega,
            data: s.data,
            model: s.model,
        }
    }
}

impl From<SeedsConfig> for Seeds {
    fn from(s: SeedsConfig) -> Seeds {
        Seeds::new(s.omega, s.data, s.model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategyParams {
    pub margin_subsample: usize,
    pub entropy_subsample: usize,
    pub bald_trials: usize,
    pub bald_subsample: usize,
    pub badge_subsample: usize,
    pub coreset_subsample: usize,
    pub typiclust: TypiClustParams,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            margin_subsample: 8000,
            entropy_subsample: 8000,
            bald_trials: 5,
            bald_subsample: 100,
            badge_subsample: 100,
            coreset_subsample: 8000,
            typiclust: TypiClustParams::default(),
        }
    }
}

impl StrategyParams {
    pub fn acquirer(&self, kind: AlgorithmKind, oracle: &OracleConfig) -> Acquirer {
        let s = match kind {
            AlgorithmKind::Oracle => return Acquirer::Oracle(oracle.clone()),
            AlgorithmKind::Random => Strategy::Random,
            AlgorithmKind::Margin => Strategy::Margin {
                subsample: self.margin_subsample,
            },
            AlgorithmKind::Entropy => Strategy::Entropy {
                subsample: self.entropy_subsample,
            },
            AlgorithmKind::Bald => Strategy::Bald {
                trials: self.bald_trials,
                subsample: self.bald_subsample,
            },
            AlgorithmKind::Badge => Strategy::Badge {
                subsample: self.badge_subsample,
            },
            AlgorithmKind::Coreset => Strategy::Coreset {
                subsample: self.coreset_subsample,
            },
            AlgorithmKind::TypiClust => Strategy::TypiClust(self.typiclust.clone()),
        };
        Acquirer::Strategy(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeClustSource {
    pub n_per_cluster: usize,
    pub separation: f64,
    pub clean_std: f64,
    pub poison_std: f64,
    pub poison_offset: f64,
}

impl Default for ThreeClustSource {
    fn default() -> Self {
        let g = ThreeClustGeometry::default();
        ThreeClustSource {
            n_per_cluster: 150,
            separation: g.separation,
            clean_std: g.clean_std,
            poison_std: g.poison_std,
            poison_offset: g.poison_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceConfig {
    ThreeClust(ThreeClustSource),
    DivergingSin(DivergingSinParams),
    Tabular(TabularSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierConfig {
    /// Hidden layer widths; empty for a linear model.
    pub hidden: Vec<usize>,
    pub dropout: f64,
}

fn default_seed_per_class() -> usize {
    1
}

fn default_domain() -> String {
    "default".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    #[serde(default = "default_domain")]
    pub domain: String,
    pub budget: usize,
    /// Pilot length used when determining the budget; defaults to `budget`.
    #[serde(default)]
    pub pilot_budget: Option<usize>,
    #[serde(default = "default_seed_per_class")]
    pub seed_per_class: usize,
    pub val_fraction: f64,
    pub protocol: Protocol,
    pub source: SourceConfig,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    pub optimizer: OptimizerConfig,
    pub training: TrainConfig,
}

impl DatasetConfig {
    pub fn pilot_budget(&self) -> usize {
        self.pilot_budget.unwrap_or(self.budget)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::config(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text, path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        for ds in &mut cfg.datasets {
            if let SourceConfig::Tabular(t) = &mut ds.source {
                *t = t.rebased(&base);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::config("restarts: must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms: list is empty"));
        }
        if self.datasets.is_empty() {
            return Err(Error::config("datasets: at least one [[datasets]] entry is required"));
        }
        self.oracle.validate()?;
        let mut names = std::collections::BTreeSet::new();
        for ds in &self.datasets {
            let field = |f: &str| format!("datasets.{}.{f}", ds.name);
            if !names.insert(ds.name.as_str()) {
                return Err(Error::config(format!("datasets: duplicate name '{}'", ds.name)));
            }
            if ds.name.is_empty() || ds.name.contains(['/', '\\']) {
                return Err(Error::config(format!("datasets.name: invalid '{}'", ds.name)));
            }
            if ds.budget == 0 || ds.pilot_budget() == 0 {
                return Err(Error::config(format!("{}: must be at least 1", field("budget"))));
            }
            if ds.seed_per_class == 0 {
                return Err(Error::config(format!("{}: must be at least 1", field("seed_per_class"))));
            }
            if !(ds.val_fraction > 0.0 && ds.val_fraction < 1.0) {
                return Err(Error::config(format!("{}: must lie in (0, 1)", field("val_fraction"))));
            }
            if ds.training.batch_size == 0 || ds.training.e_max == 0 {
                return Err(Error::config(format!("{}: batch_size and e_max must be at least 1", field("training"))));
            }
            if !(ds.optimizer.lr >= 0.0) {
                return Err(Error::config(format!("{}: must be non-negative", field("optimizer.lr"))));
            }
            if !(0.0..1.0).contains(&ds.classifier.dropout) || ds.classifier.hidden.contains(&0) {
                return Err(Error::config(format!("{}: dropout in [0, 1) and widths >= 1", field("classifier"))));
            }
        }
        Ok(())
    }

    pub fn base_seeds(&self) -> Seeds {
        self.seeds.into()
    }

    pub fn dataset(&self, name: &str) -> Result<&DatasetConfig> {
        self.datasets
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::config(format!("dataset '{name}' is not in the config")))
    }

    /// Fully resolved config, defaults included.
    pub fn resolved_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Turns a dataset's source section into a [`DataSource`], loading tabular
/// files once.
pub fn resolve_source(ds: &DatasetConfig) -> Result<DataSource> {
    Ok(match &ds.source {
        SourceConfig::ThreeClust(t) => DataSource::ThreeClust {
            n_per_cluster: t.n_per_cluster,
            geometry: ThreeClustGeometry {
                separation: t.separation,
                clean_std: t.clean_std,
                poison_std: t.poison_std,
                poison_offset: t.poison_offset,
            },
        },
        SourceConfig::DivergingSin(p) => DataSource::DivergingSin(*p),
        SourceConfig::Tabular(t) => DataSource::Fixed(Arc::new(load_tabular(&ds.name, t)?)),
    })
}

/// Run configuration for one (dataset, algorithm) pair with an explicit
/// budget.
pub fn run_config(
    exp: &ExperimentConfig,
    ds: &DatasetConfig,
    source: DataSource,
    algorithm: AlgorithmKind,
    budget: usize,
) -> RunConfig {
    RunConfig {
        dataset: ds.name.clone(),
        domain: ds.domain.clone(),
        source,
        hidden: ds.classifier.hidden.clone(),
        dropout: ds.classifier.dropout,
        optimizer: ds.optimizer.clone(),
        training: ds.training,
        protocol: ds.protocol,
        budget,
        seed_per_class: ds.seed_per_class,
        val_fraction: ds.val_fraction,
        acquirer: exp.strategies.acquirer(algorithm, &exp.oracle),
    }
}

//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use albench::acquisition::{AcquisitionContext, AlgorithmKind};
use albench::config::{resolve_source, run_config, ExperimentConfig};
use albench::matrix::Matrix;
use albench::model::{Classifier, ClassifierSpec, OptimizerConfig, OptimizerKind, OptimizerState};
use albench::rng::Seeds;
use albench::runner::{RunConfig, RunCurve};

pub fn config_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(file)
}

pub fn load_config(file: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_path(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

/// Run config for the first dataset of a shipped config file.
pub fn shipped_run_config(file: &str, alg: AlgorithmKind, budget: Option<usize>) -> RunConfig {
    let cfg = load_config(file);
    let ds = &cfg.datasets[0];
    let source = resolve_source(ds).unwrap();
    run_config(&cfg, ds, source, alg, budget.unwrap_or(ds.budget))
}

pub fn adam() -> OptimizerConfig {
    OptimizerConfig {
        kind: OptimizerKind::Adam,
        lr: 0.01,
        weight_decay: 0.0,
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    }
}

/// Softmax of one logit row, computed independently of the library.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// `x W + b` for a linear classifier with parameters laid out as `W`
/// (`d x c`, row-major) followed by `b`.
pub fn linear_logits(params: &[f64], d: usize, c: usize, x: &[f64]) -> Vec<f64> {
    (0..c)
        .map(|j| params[d * c + j] + (0..d).map(|i| x[i] * params[i * c + j]).sum::<f64>())
        .collect()
}

/// A pool, a labeled subset and a classifier, owning everything an
/// acquisition context borrows.
pub struct Fixture {
    pub pool: Matrix,
    pub labeled: Vec<usize>,
    pub targets: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub model: Classifier,
    pub opt: OptimizerState,
    pub accuracy: f64,
}

impl Fixture {
    pub fn new(pool: Matrix, labeled: Vec<usize>, targets: Vec<usize>, model: Classifier) -> Self {
        let unlabeled = (0..pool.rows()).filter(|i| !labeled.contains(i)).collect();
        let opt = OptimizerState::new(&adam(), model.n_params());
        Fixture {
            pool,
            labeled,
            targets,
            unlabeled,
            model,
            opt,
            accuracy: 0.5,
        }
    }

    pub fn ctx(&self) -> AcquisitionContext<'_> {
        AcquisitionContext {
            pool: &self.pool,
            labeled: &self.labeled,
            labeled_targets: &self.targets,
            unlabeled: &self.unlabeled,
            budget: 10,
            acquired: 0,
            accuracy: self.accuracy,
            initial_accuracy: self.accuracy,
            classifier: &self.model,
            optimizer: &self.opt,
        }
    }
}

pub fn linear_spec(d: usize, c: usize, dropout: f64) -> ClassifierSpec {
    ClassifierSpec {
        input_dim: d,
        n_classes: c,
        hidden: Vec::new(),
        dropout,
    }
}

/// A run curve with every per-iteration log left empty.
pub fn curve(dataset: &str, domain: &str, alg: AlgorithmKind, restart: usize, acc: Vec<f64>) -> RunCurve {
    let n = acc.len();
    RunCurve {
        dataset: dataset.into(),
        domain: domain.into(),
        algorithm: alg,
        restart,
        seeds: Seeds::new(1, 1 + restart as u64, 1 + restart as u64),
        accuracies: acc,
        chosen: (0..n).collect(),
        scores: vec![None; n],
        fallback: vec![None; n],
        probe_acc: vec![None; n],
        wall_time: 0.0,
    }
}

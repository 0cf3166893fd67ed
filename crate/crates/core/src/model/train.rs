//! Retraining protocols with patience-0 early stopping.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{argmax, Classifier, ClassifierSpec, Mode, OptimizerConfig, OptimizerState};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Keep parameters and optimizer state between iterations.
    FineTune,
    /// Re-initialize parameters and optimizer before every retrain.
    FromScratch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub e_max: usize,
}

/// Generators consumed by training. Cloning gives an exact replay.
#[derive(Debug, Clone)]
pub struct TrainStreams {
    /// Minibatch order (data stream child).
    pub minibatch: StreamRng,
    /// Parameter initialization (model stream child).
    pub init: StreamRng,
    /// Training-time dropout masks (model stream child).
    pub dropout: StreamRng,
}

/// Rows `idx` of `x` with their labels `y[idx]`.
#[derive(Debug, Clone, Copy)]
pub struct Examples<'a> {
    pub x: &'a Matrix,
    pub y: &'a [usize],
    pub idx: &'a [usize],
}

impl<'a> Examples<'a> {
    pub fn new(x: &'a Matrix, y: &'a [usize], idx: &'a [usize]) -> Self {
        Examples { x, y, idx }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn gather(&self, rows: &[usize]) -> (Matrix, Vec<usize>) {
        (self.x.select_rows(rows), rows.iter().map(|&i| self.y[i]).collect())
    }

    pub fn all(&self) -> (Matrix, Vec<usize>) {
        self.gather(self.idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOutcome {
    pub epochs: usize,
    pub best_val_loss: f64,
    pub val_accuracy: f64,
}

/// Runs `epoch(e)` for `e = 1..=e_max`, stopping after the first epoch whose
/// returned validation loss is not strictly below the best so far. The
/// failing epoch has already run. Returns `(epochs run, best loss)`.
pub fn patience_zero<F>(e_max: usize, mut epoch: F) -> Result<(usize, f64)>
where
    F: FnMut(usize) -> Result<f64>,
{
    if e_max == 0 {
        return Err(Error::config("e_max must be at least 1"));
    }
    let mut best = f64::INFINITY;
    for e in 1..=e_max {
        let loss = epoch(e)?;
        if loss < best {
            best = loss;
        } else {
            return Ok((e, best));
        }
    }
    Ok((e_max, best))
}

/// One pass of minibatch steps over `data`. The last short batch is kept.
pub fn train_epoch(
    model: &mut Classifier,
    opt: &mut OptimizerState,
    data: &Examples<'_>,
    batch_size: usize,
    streams: &mut TrainStreams,
) -> Result<()> {
    if batch_size == 0 {
        return Err(Error::config("batch_size must be at least 1"));
    }
    let mut order = data.idx.to_vec();
    order.shuffle(&mut streams.minibatch);
    for batch in order.chunks(batch_size) {
        let (x, y) = data.gather(batch);
        let (_, grad) = model.loss_and_grad(&x, &y, Mode::Dropout(&mut streams.dropout))?;
        opt.step(model.params_mut(), &grad);
    }
    Ok(())
}

/// Fraction of argmax-correct predictions with dropout off.
pub fn evaluate(model: &Classifier, examples: &Examples<'_>) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::EmptyInput("evaluation set"));
    }
    let (x, y) = examples.all();
    let p = model.predict_proba(&x)?;
    let correct = p
        .iter_rows()
        .zip(&y)
        .filter(|(row, &c)| argmax(row) == c)
        .count();
    Ok(correct as f64 / y.len() as f64)
}

/// Continues training from the current parameters and optimizer state.
pub fn retrain_finetune(
    model: &mut Classifier,
    opt: &mut OptimizerState,
    labeled: &Examples<'_>,
    val: &Examples<'_>,
    cfg: &TrainConfig,
    streams: &mut TrainStreams,
) -> Result<TrainOutcome> {
    if labeled.is_empty() {
        return Err(Error::EmptyInput("labeled set"));
    }
    if val.is_empty() {
        return Err(Error::EmptyInput("validation set"));
    }
    let (xv, yv) = val.all();
    let (epochs, best_val_loss) = patience_zero(cfg.e_max, |_| {
        train_epoch(model, opt, labeled, cfg.batch_size, streams)?;
        model.loss(&xv, &yv, Mode::Eval)
    })?;
    Ok(TrainOutcome {
        epochs,
        best_val_loss,
        val_accuracy: evaluate(model, val)?,
    })
}

/// Fresh parameters from `streams.init`, then the fine-tune loop.
pub fn retrain_scratch(
    spec: &ClassifierSpec,
    opt_cfg: &OptimizerConfig,
    labeled: &Examples<'_>,
    val: &Examples<'_>,
    cfg: &TrainConfig,
    streams: &mut TrainStreams,
) -> Result<(Classifier, OptimizerState, TrainOutcome)> {
    if cfg.e_max == 0 {
        return Err(Error::config("e_max must be at least 1"));
    }
    let mut model = Classifier::init(spec, &mut streams.init)?;
    let mut opt = OptimizerState::new(opt_cfg, model.n_params());
    let outcome = retrain_finetune(&mut model, &mut opt, labeled, val, cfg, streams)?;
    Ok((model, opt, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from;

    fn streams(seed: u64) -> TrainStreams {
        TrainStreams {
            minibatch: stream_from(seed, "mb"),
            init: stream_from(seed, "init"),
            dropout: stream_from(seed, "drop"),
        }
    }

    #[test]
    fn patience_zero_stops_at_first_non_improvement() {
        let losses = [0.9, 0.8, 0.85, 0.1];
        let (epochs, best) = patience_zero(10, |e| Ok(losses[e - 1])).unwrap();
        assert_eq!(epochs, 3);
        assert_eq!(best, 0.8);
    }

    #[test]
    fn patience_zero_runs_at_least_one_epoch() {
        let mut calls = 0;
        let (epochs, _) = patience_zero(1, |_| {
            calls += 1;
            Ok(1.0)
        })
        .unwrap();
        assert_eq!((epochs, calls), (1, 1));
        assert!(patience_zero(0, |_| Ok(1.0)).is_err());
    }

    #[test]
    fn equal_loss_counts_as_no_improvement() {
        let (epochs, _) = patience_zero(10, |_| Ok(0.5)).unwrap();
        assert_eq!(epochs, 2);
    }

    #[test]
    fn accuracy_hand_count() {
        // linear model predicting class 1 iff x > 0: logits [0, x]
        let spec = ClassifierSpec::linear(1, 2);
        let m = Classifier::from_params(&spec, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let xs = [-2.0, -1.0, 0.5, 1.0, 2.0, -0.5, 3.0, -3.0, 0.1, -0.1];
        let ys = [0, 1, 1, 1, 0, 0, 1, 0, 0, 0];
        // predictions: 0 0 1 1 1 0 1 0 1 0 -> correct at 0,2,3,5,6,7,9 = 7
        let x = Matrix::from_rows(&xs.map(|v| [v])).unwrap();
        let idx: Vec<usize> = (0..10).collect();
        let acc = evaluate(&m, &Examples::new(&x, &ys, &idx)).unwrap();
        assert!((acc - 0.7).abs() < 1e-12);
        assert!(evaluate(&m, &Examples::new(&x, &ys, &[])).is_err());
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        let spec = ClassifierSpec::linear(1, 2);
        let m = Classifier::from_params(&spec, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let x = Matrix::from_rows(&[[0.1], [0.2], [0.3], [0.4]]).unwrap();
        let y = [0, 1, 0, 1];
        let acc = evaluate(&m, &Examples::new(&x, &y, &[0, 1, 2, 3])).unwrap();
        assert_eq!(acc, 0.5);
        let all_right = evaluate(&m, &Examples::new(&x, &y, &[0, 2])).unwrap();
        assert_eq!(all_right, 1.0);
    }

    #[test]
    fn finetune_single_epoch_and_zero_lr() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.1, 0.0], [0.9, 1.0]]).unwrap();
        let y = [0, 1, 0, 1];
        let spec = ClassifierSpec::linear(2, 2);
        let lab = Examples::new(&x, &y, &[0, 1]);
        let val = Examples::new(&x, &y, &[2, 3]);

        let mut m = Classifier::init(&spec, &mut stream_from(1, "m")).unwrap();
        let mut opt = OptimizerState::new(&OptimizerConfig::adam(0.01), m.n_params());
        let cfg = TrainConfig { batch_size: 64, e_max: 1 };
        let out = retrain_finetune(&mut m, &mut opt, &lab, &val, &cfg, &mut streams(1)).unwrap();
        assert_eq!(out.epochs, 1);
        assert_eq!(opt.steps(), 1);

        let before = m.clone();
        let mut frozen = OptimizerState::new(&OptimizerConfig::adam(0.0), m.n_params());
        let cfg = TrainConfig { batch_size: 64, e_max: 50 };
        let out = retrain_finetune(&mut m, &mut frozen, &lab, &val, &cfg, &mut streams(1)).unwrap();
        assert_eq!(out.epochs, 2);
        assert_eq!(m, before);
    }

    #[test]
    fn scratch_is_deterministic_and_checks_e_max() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.1, 0.0], [0.9, 1.0]]).unwrap();
        let y = [0, 1, 0, 1];
        let spec = ClassifierSpec::linear(2, 2);
        let lab = Examples::new(&x, &y, &[0, 1]);
        let val = Examples::new(&x, &y, &[2, 3]);
        let cfg = TrainConfig { batch_size: 1, e_max: 30 };
        let opt = OptimizerConfig::nadam(0.05);
        let a = retrain_scratch(&spec, &opt, &lab, &val, &cfg, &mut streams(4)).unwrap();
        let b = retrain_scratch(&spec, &opt, &lab, &val, &cfg, &mut streams(4)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.2, b.2);
        let bad = TrainConfig { batch_size: 1, e_max: 0 };
        assert!(retrain_scratch(&spec, &opt, &lab, &val, &bad, &mut streams(4)).is_err());
    }

    #[test]
    fn last_short_batch_is_used() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [0.5]]).unwrap();
        let y = [0, 1, 0];
        let spec = ClassifierSpec::linear(1, 2);
        let mut m = Classifier::init(&spec, &mut stream_from(1, "m")).unwrap();
        let mut opt = OptimizerState::new(&OptimizerConfig::adam(0.01), m.n_params());
        let data = Examples::new(&x, &y, &[0, 1, 2]);
        train_epoch(&mut m, &mut opt, &data, 2, &mut streams(1)).unwrap();
        assert_eq!(opt.steps(), 2);
    }
}

//! Linear and small MLP classifiers with dropout and softmax output.
//!
//! Hidden layers use ReLU. Dropout (inverted: kept units scaled by
//! `1 / (1 - rate)`) is applied to the input of every dense layer, so a linear
//! model drops input features. Weights are drawn uniformly from
//! `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases start at zero.
//!
//! All parameters live in one flat vector; layer `l` occupies a weight block
//! (`fan_in x fan_out`, row-major) followed by its bias.

mod optim;
mod train;

pub use optim::{OptimizerConfig, OptimizerKind, OptimizerState};
pub use train::{
    evaluate, patience_zero, retrain_finetune, retrain_scratch, train_epoch, Examples, Protocol,
    TrainConfig, TrainOutcome, TrainStreams,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub input_dim: usize,
    pub n_classes: usize,
    /// Hidden layer widths; empty means a linear model.
    pub hidden: Vec<usize>,
    pub dropout: f64,
}

impl ClassifierSpec {
    pub fn linear(input_dim: usize, n_classes: usize) -> Self {
        ClassifierSpec {
            input_dim,
            n_classes,
            hidden: Vec::new(),
            dropout: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.n_classes == 0 || self.hidden.contains(&0) {
            return Err(Error::config("classifier dimensions must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(format!(
                "dropout rate must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` per dense layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_dim);
        widths.extend(&self.hidden);
        widths.push(self.n_classes);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn n_params(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// How dropout behaves during a forward pass.
pub enum Mode<'a> {
    /// Dropout off.
    Eval,
    /// Dropout on, masks drawn from the given stream. Used for training and
    /// for Monte-Carlo dropout scoring.
    Dropout(&'a mut StreamRng),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    spec: ClassifierSpec,
    params: Vec<f64>,
}

/// Intermediate values of a forward pass, kept for backprop.
struct Trace {
    /// Input of each dense layer after dropout.
    inputs: Vec<Matrix>,
    /// Dropout multiplier per layer input (0 or 1/(1-p)), if dropout ran.
    masks: Vec<Option<Vec<f64>>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Matrix>,
    logits: Matrix,
}

fn dense(input: &Matrix, w: &[f64], b: &[f64], fan_out: usize) -> Matrix {
    let mut out = Matrix::zeros(input.rows(), fan_out);
    for n in 0..input.rows() {
        let o = out.row_mut(n);
        o.copy_from_slice(b);
        for (i, &a) in input.row(n).iter().enumerate() {
            if a != 0.0 {
                let wi = &w[i * fan_out..(i + 1) * fan_out];
                for (dst, &wv) in o.iter_mut().zip(wi) {
                    *dst += a * wv;
                }
            }
        }
    }
    out
}

fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut p = logits.clone();
    for n in 0..p.rows() {
        let row = p.row_mut(n);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    p
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl Classifier {
    /// Fresh parameters drawn from `rng`.
    pub fn init(spec: &ClassifierSpec, rng: &mut StreamRng) -> Result<Self> {
        spec.validate()?;
        let mut params = Vec::with_capacity(spec.n_params());
        for (fan_in, fan_out) in spec.layer_dims() {
            let bound = 1.0 / (fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Ok(Classifier {
            spec: spec.clone(),
            params,
        })
    }

    pub fn from_params(spec: &ClassifierSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.n_params() {
            return Err(Error::Dimension {
                expected: spec.n_params(),
                got: params.len(),
            });
        }
        Ok(Classifier {
            spec: spec.clone(),
            params,
        })
    }

    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// `(weights, bias)` of layer `l`.
    fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let dims = self.spec.layer_dims();
        let start: usize = dims[..l].iter().map(|(i, o)| i * o + o).sum();
        let (fan_in, fan_out) = dims[l];
        let w = &self.params[start..start + fan_in * fan_out];
        let b = &self.params[start + fan_in * fan_out..start + fan_in * fan_out + fan_out];
        (w, b)
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.spec.input_dim && x.rows() > 0 {
            return Err(Error::Dimension {
                expected: self.spec.input_dim,
                got: x.cols(),
            });
        }
        Ok(())
    }

    fn trace(&self, x: &Matrix, mut mode: Mode<'_>, upto_hidden: bool) -> Result<Trace> {
        self.check_input(x)?;
        let dims = self.spec.layer_dims();
        let n_layers = dims.len();
        let p = self.spec.dropout;
        let keep_scale = 1.0 / (1.0 - p);
        let mut inputs = Vec::with_capacity(n_layers);
        let mut masks = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers.saturating_sub(1));
        let mut current = x.clone();
        for (l, &(_, fan_out)) in dims.iter().enumerate() {
            let is_last = l + 1 == n_layers;
            if upto_hidden && is_last {
                break;
            }
            let mask = match &mut mode {
                Mode::Dropout(rng) if p > 0.0 => {
                    let m: Vec<f64> = (0..current.as_slice().len())
                        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep_scale })
                        .collect();
                    for (v, &k) in current.as_mut_slice().iter_mut().zip(&m) {
                        *v *= k;
                    }
                    Some(m)
                }
                _ => None,
            };
            let (w, b) = self.layer(l);
            let z = dense(&current, w, b, fan_out);
            inputs.push(current);
            masks.push(mask);
            if is_last {
                return Ok(Trace {
                    inputs,
                    masks,
                    pre,
                    logits: z,
                });
            }
            let mut act = z.clone();
            for v in act.as_mut_slice() {
                *v = v.max(0.0);
            }
            pre.push(z);
            current = act;
        }
        // only reached when stopping before the output layer
        Ok(Trace {
            inputs,
            masks,
            pre,
            logits: current,
        })
    }

    /// Class probabilities, one row per input row.
    pub fn forward(&self, x: &Matrix, mode: Mode<'_>) -> Result<Matrix> {
        Ok(softmax_rows(&self.trace(x, mode, false)?.logits))
    }

    pub fn logits(&self, x: &Matrix, mode: Mode<'_>) -> Result<Matrix> {
        Ok(self.trace(x, mode, false)?.logits)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        self.forward(x, Mode::Eval)
    }

    /// Last hidden layer activations in eval mode; the input itself for a
    /// linear model.
    pub fn penultimate(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        if self.spec.hidden.is_empty() {
            return Ok(x.clone());
        }
        Ok(self.trace(x, Mode::Eval, true)?.logits)
    }

    /// Mean cross-entropy of the batch.
    pub fn loss(&self, x: &Matrix, y: &[usize], mode: Mode<'_>) -> Result<f64> {
        if y.len() != x.rows() {
            return Err(Error::Dimension {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if y.is_empty() {
            return Err(Error::EmptyInput("loss batch"));
        }
        let t = self.trace(x, mode, false)?;
        Ok(cross_entropy(&t.logits, y))
    }

    /// Mean cross-entropy and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, x: &Matrix, y: &[usize], mode: Mode<'_>) -> Result<(f64, Vec<f64>)> {
        if y.len() != x.rows() {
            return Err(Error::Dimension {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if y.is_empty() {
            return Err(Error::EmptyInput("gradient batch"));
        }
        let t = self.trace(x, mode, false)?;
        let loss = cross_entropy(&t.logits, y);
        let n = y.len() as f64;

        let mut dz = softmax_rows(&t.logits);
        for (i, &c) in y.iter().enumerate() {
            dz.row_mut(i)[c] -= 1.0;
        }
        for v in dz.as_mut_slice() {
            *v /= n;
        }

        let dims = self.spec.layer_dims();
        let mut grad = vec![0.0; self.params.len()];
        let mut starts = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for (i, o) in &dims {
            starts.push(acc);
            acc += i * o + o;
        }
        for l in (0..dims.len()).rev() {
            let (fan_in, fan_out) = dims[l];
            let input = &t.inputs[l];
            let start = starts[l];
            {
                let (gw, gb) = grad[start..start + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
                for r in 0..input.rows() {
                    let dzr = dz.row(r);
                    for (i, &a) in input.row(r).iter().enumerate() {
                        if a != 0.0 {
                            for (g, &d) in gw[i * fan_out..(i + 1) * fan_out].iter_mut().zip(dzr) {
                                *g += a * d;
                            }
                        }
                    }
                    for (g, &d) in gb.iter_mut().zip(dzr) {
                        *g += d;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let (w, _) = self.layer(l);
            let mut da = Matrix::zeros(input.rows(), fan_in);
            for r in 0..input.rows() {
                let dzr = dz.row(r);
                let dar = da.row_mut(r);
                for (i, d) in dar.iter_mut().enumerate() {
                    *d = w[i * fan_out..(i + 1) * fan_out]
                        .iter()
                        .zip(dzr)
                        .map(|(a, b)| a * b)
                        .sum();
                }
            }
            if let Some(mask) = &t.masks[l] {
                for (d, &k) in da.as_mut_slice().iter_mut().zip(mask) {
                    *d *= k;
                }
            }
            for (d, &z) in da.as_mut_slice().iter_mut().zip(t.pre[l - 1].as_slice()) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            dz = da;
        }
        Ok((loss, grad))
    }
}

fn cross_entropy(logits: &Matrix, y: &[usize]) -> f64 {
    let total: f64 = y
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let row = logits.row(i);
            log_sum_exp(row) - row[c]
        })
        .sum();
    total / y.len() as f64
}

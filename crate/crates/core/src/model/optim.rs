//! Adam and NAdam over a flat parameter vector.
//!
//! Weight decay is coupled: `weight_decay * theta` is added to the gradient
//! before the moment updates. NAdam uses the Nesterov look-ahead on the bias
//! corrected first moment (no momentum-decay schedule).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Nadam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            lr,
            weight_decay: 0.0,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }

    pub fn nadam(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Nadam,
            ..Self::adam(lr)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    config: OptimizerConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl OptimizerState {
    pub fn new(config: &OptimizerConfig, n_params: usize) -> Self {
        OptimizerState {
            config: config.clone(),
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "optimizer built for another model");
        assert_eq!(grad.len(), self.m.len(), "gradient length mismatch");
        self.t += 1;
        let c = &self.config;
        let t = self.t as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for k in 0..params.len() {
            let g = grad[k] + c.weight_decay * params[k];
            self.m[k] = c.beta1 * self.m[k] + (1.0 - c.beta1) * g;
            self.v[k] = c.beta2 * self.v[k] + (1.0 - c.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            let direction = match c.kind {
                OptimizerKind::Adam => m_hat,
                OptimizerKind::Nadam => c.beta1 * m_hat + (1.0 - c.beta1) * g / bc1,
            };
            params[k] -= c.lr * direction / (v_hat.sqrt() + c.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(p: &[f64]) -> (f64, Vec<f64>) {
        // f(x, y) = (x - 3)^2 + 10 (y + 1)^2
        let f = (p[0] - 3.0).powi(2) + 10.0 * (p[1] + 1.0).powi(2);
        (f, vec![2.0 * (p[0] - 3.0), 20.0 * (p[1] + 1.0)])
    }

    #[test]
    fn loss_non_increasing_on_convex_quadratic() {
        for cfg in [OptimizerConfig::adam(0.01), OptimizerConfig::nadam(0.01)] {
            let mut p = vec![0.0, 0.0];
            let mut opt = OptimizerState::new(&cfg, 2);
            let mut last = quadratic(&p).0;
            for _ in 0..200 {
                let (_, g) = quadratic(&p);
                opt.step(&mut p, &g);
                let f = quadratic(&p).0;
                assert!(f <= last + 1e-12, "{:?}: {f} > {last}", cfg.kind);
                last = f;
            }
            assert!(last < 10.0);
        }
    }

    #[test]
    fn first_adam_step_has_size_lr() {
        let mut p = vec![1.0, -1.0];
        let mut opt = OptimizerState::new(&OptimizerConfig::adam(0.1), 2);
        opt.step(&mut p, &[5.0, -0.2]);
        assert!((p[0] - 0.9).abs() < 1e-6);
        assert!((p[1] + 0.9).abs() < 1e-6);
        assert_eq!(opt.steps(), 1);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let mut p = vec![0.3, 0.7];
        let mut opt = OptimizerState::new(&OptimizerConfig::nadam(0.0), 2);
        opt.step(&mut p, &[1.0, 1.0]);
        assert_eq!(p, vec![0.3, 0.7]);
    }
}

//! Greedy lookahead oracle.
//!
//! Each call draws up to `tau` unlabeled candidates, retrains a copy of the
//! run's classifier with each one added, and keeps the candidate with the
//! best test accuracy if it strictly beats the current accuracy. Otherwise
//! margin sampling decides. The retraining itself is supplied by the caller
//! through [`Lookahead`], which must leave the run's own state untouched.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::acquisition::{acquire_margin, AcquisitionContext, Selection};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Candidates probed per iteration.
    pub tau: usize,
    /// Candidate cap of the margin fallback.
    pub fallback_subsample: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            tau: 20,
            fallback_subsample: 8000,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::config("oracle.tau must be at least 1"));
        }
        Ok(())
    }
}

/// Test accuracy after training on the labeled set plus one pool position.
pub trait Lookahead {
    fn probe(&mut self, candidate: usize) -> Result<f64>;
}

impl<F: FnMut(usize) -> Result<f64>> Lookahead for F {
    fn probe(&mut self, candidate: usize) -> Result<f64> {
        self(candidate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleChoice {
    pub selection: Selection,
    /// Margin sampling decided because no probe improved.
    pub fallback: bool,
    /// Highest probe accuracy seen.
    pub best_probe: f64,
}

/// Up to `tau` distinct unlabeled positions in draw order.
pub fn draw_candidates(unlabeled: &[usize], tau: usize, rng: &mut StreamRng) -> Vec<usize> {
    let n = unlabeled.len();
    index::sample(rng, n, tau.min(n))
        .into_iter()
        .map(|k| unlabeled[k])
        .collect()
}

/// One oracle step. The baseline is `ctx.accuracy`, the current test
/// accuracy of the run's classifier.
pub fn acquire_oracle(
    ctx: &AcquisitionContext<'_>,
    cfg: &OracleConfig,
    lookahead: &mut dyn Lookahead,
    rng: &mut StreamRng,
) -> Result<OracleChoice> {
    cfg.validate()?;
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let baseline = ctx.accuracy;
    let mut best: Option<(usize, f64)> = None;
    let mut best_probe = f64::NEG_INFINITY;
    for cand in draw_candidates(ctx.unlabeled, cfg.tau, rng) {
        let acc = lookahead.probe(cand)?;
        best_probe = best_probe.max(acc);
        if acc > baseline && best.is_none_or(|(_, b)| acc > b) {
            best = Some((cand, acc));
        }
    }
    match best {
        Some((index, acc)) => Ok(OracleChoice {
            selection: Selection {
                index,
                score: Some(acc),
            },
            fallback: false,
            best_probe,
        }),
        None => Ok(OracleChoice {
            selection: acquire_margin(ctx, cfg.fallback_subsample, rng)?,
            fallback: true,
            best_probe,
        }),
    }
}

//! BADGE with a single query: the candidate whose gradient embedding has the
//! largest norm.
//!
//! k-means++ seeding with k = 1 would be a uniform draw, so the norm itself
//! is used as the selection signal.

use super::{candidates, pick, AcquisitionContext, Selection};
use crate::error::{Error, Result};
use crate::model::argmax;
use crate::rng::StreamRng;

/// Gradient of the cross-entropy at the predicted label with respect to the
/// output-layer weights, laid out like the weight block (`hidden x classes`,
/// row-major): entry `(i, c)` is `h_i * (p_c - [c == argmax p])`.
pub fn gradient_embedding(probs: &[f64], hidden: &[f64]) -> Vec<f64> {
    let y_hat = argmax(probs);
    let residual: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(c, &p)| if c == y_hat { p - 1.0 } else { p })
        .collect();
    hidden
        .iter()
        .flat_map(|&h| residual.iter().map(move |&r| h * r))
        .collect()
}

/// `||g(x)||`, computed as `||p - e|| * ||h||` without forming `g`.
pub fn gradient_embedding_norm(probs: &[f64], hidden: &[f64]) -> f64 {
    let y_hat = argmax(probs);
    let r2: f64 = probs
        .iter()
        .enumerate()
        .map(|(c, &p)| {
            let r = if c == y_hat { p - 1.0 } else { p };
            r * r
        })
        .sum();
    let h2: f64 = hidden.iter().map(|h| h * h).sum();
    (r2 * h2).sqrt()
}

pub fn acquire_badge(
    ctx: &AcquisitionContext<'_>,
    subsample: usize,
    rng: &mut StreamRng,
) -> Result<Selection> {
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let cands = candidates(ctx.unlabeled, subsample, rng);
    let x = ctx.pool.select_rows(&cands);
    let probs = ctx.classifier.predict_proba(&x)?;
    let hidden = ctx.classifier.penultimate(&x)?;
    let norms: Vec<f64> = probs
        .iter_rows()
        .zip(hidden.iter_rows())
        .map(|(p, h)| gradient_embedding_norm(p, h))
        .collect();
    pick(&cands, &norms, true)
}

//! Single-sample acquisition functions.
//!
//! Every strategy sees only an [`AcquisitionContext`]: the AL pool features,
//! the labeled positions with their revealed labels, the unlabeled positions,
//! budget bookkeeping, the current and initial test accuracy, and the trained
//! classifier with its optimizer. Test and validation data and unrevealed
//! labels are not reachable from it.
//!
//! Randomness comes only from the algorithm stream passed alongside the
//! context. Ties always go to the lowest pool position.

mod badge;
mod geometric;
mod kmeans;
mod uncertainty;

pub use badge::{acquire_badge, gradient_embedding, gradient_embedding_norm};
pub use geometric::{acquire_coreset, acquire_typiclust, min_distances, typicality, TypiClustParams};
pub use kmeans::{kmeans, KMeansFit};
pub use uncertainty::{
    acquire_bald, acquire_entropy, acquire_margin, entropy, entropy_scores, margin_scores,
    mutual_information,
};

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, OptimizerState};
use crate::rng::StreamRng;

/// Everything an acquisition function may read.
#[derive(Debug, Clone, Copy)]
pub struct AcquisitionContext<'a> {
    /// Features of the AL pool (train split minus validation), indexed by
    /// pool position.
    pub pool: &'a Matrix,
    pub labeled: &'a [usize],
    /// Revealed labels, aligned with `labeled`.
    pub labeled_targets: &'a [usize],
    /// Sorted unlabeled pool positions.
    pub unlabeled: &'a [usize],
    pub budget: usize,
    /// Points acquired so far, excluding the seed set.
    pub acquired: usize,
    pub accuracy: f64,
    pub initial_accuracy: f64,
    pub classifier: &'a Classifier,
    pub optimizer: &'a OptimizerState,
}

/// One chosen pool position and the score that picked it, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub score: Option<f64>,
}

/// Candidate positions: all of `unlabeled`, or a sorted draw of `cap` of them
/// without replacement when the pool is larger.
pub fn candidates(unlabeled: &[usize], cap: usize, rng: &mut StreamRng) -> Vec<usize> {
    if unlabeled.len() <= cap {
        return unlabeled.to_vec();
    }
    let mut picked: Vec<usize> = index::sample(rng, unlabeled.len(), cap)
        .into_iter()
        .map(|k| unlabeled[k])
        .collect();
    picked.sort_unstable();
    picked
}

/// Position of the largest score; first one wins ties, NaN never wins.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        match best {
            Some(b) if s <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

pub fn argmin_first(scores: &[f64]) -> Option<usize> {
    let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
    argmax_first(&neg)
}

pub(crate) fn pick(cands: &[usize], scores: &[f64], maximize: bool) -> Result<Selection> {
    let best = if maximize {
        argmax_first(scores)
    } else {
        argmin_first(scores)
    };
    let k = best.ok_or(Error::EmptyPool)?;
    Ok(Selection {
        index: cands[k],
        score: Some(scores[k]),
    })
}

pub fn acquire_random(ctx: &AcquisitionContext<'_>, rng: &mut StreamRng) -> Result<Selection> {
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let k = rng.random_range(0..ctx.unlabeled.len());
    Ok(Selection {
        index: ctx.unlabeled[k],
        score: None,
    })
}

/// A configured acquisition function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Random,
    Margin { subsample: usize },
    Entropy { subsample: usize },
    Bald { trials: usize, subsample: usize },
    Badge { subsample: usize },
    Coreset { subsample: usize },
    TypiClust(TypiClustParams),
}

impl Strategy {
    pub fn acquire(&self, ctx: &AcquisitionContext<'_>, rng: &mut StreamRng) -> Result<Selection> {
        match self {
            Strategy::Random => acquire_random(ctx, rng),
            Strategy::Margin { subsample } => acquire_margin(ctx, *subsample, rng),
            Strategy::Entropy { subsample } => acquire_entropy(ctx, *subsample, rng),
            Strategy::Bald { trials, subsample } => acquire_bald(ctx, *trials, *subsample, rng),
            Strategy::Badge { subsample } => acquire_badge(ctx, *subsample, rng),
            Strategy::Coreset { subsample } => acquire_coreset(ctx, *subsample, rng),
            Strategy::TypiClust(p) => acquire_typiclust(ctx, p, rng),
        }
    }

    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Strategy::Random => AlgorithmKind::Random,
            Strategy::Margin { .. } => AlgorithmKind::Margin,
            Strategy::Entropy { .. } => AlgorithmKind::Entropy,
            Strategy::Bald { .. } => AlgorithmKind::Bald,
            Strategy::Badge { .. } => AlgorithmKind::Badge,
            Strategy::Coreset { .. } => AlgorithmKind::Coreset,
            Strategy::TypiClust(_) => AlgorithmKind::TypiClust,
        }
    }
}

/// Algorithm names as they appear in configs and records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AlgorithmKind {
    Oracle,
    Margin,
    Badge,
    Entropy,
    Coreset,
    TypiClust,
    Random,
    Bald,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 8] = [
        AlgorithmKind::Oracle,
        AlgorithmKind::Margin,
        AlgorithmKind::Badge,
        AlgorithmKind::Entropy,
        AlgorithmKind::Coreset,
        AlgorithmKind::TypiClust,
        AlgorithmKind::Random,
        AlgorithmKind::Bald,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Oracle => "oracle",
            AlgorithmKind::Margin => "margin",
            AlgorithmKind::Badge => "badge",
            AlgorithmKind::Entropy => "entropy",
            AlgorithmKind::Coreset => "coreset",
            AlgorithmKind::TypiClust => "typiclust",
            AlgorithmKind::Random => "random",
            AlgorithmKind::Bald => "bald",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown algorithm '{s}' (expected one of: {})",
                    AlgorithmKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

impl TryFrom<String> for AlgorithmKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AlgorithmKind> for String {
    fn from(k: AlgorithmKind) -> String {
        k.name().to_string()
    }
}

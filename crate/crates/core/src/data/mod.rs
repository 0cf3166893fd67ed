//! Datasets, splits and the labeled/unlabeled pool.

mod synthetic;
mod tabular;

pub use synthetic::{
    diverging_sin_value, generate_diverging_sin, generate_three_clust, sample_diverging_sin_raw,
    DivergingSinParams, ThreeClustGeometry,
};
pub use tabular::{load_tabular, parse_dense_csv, parse_sparse, RawTable, TabularFormat, TabularSource};

use std::collections::BTreeSet;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::StreamRng;

/// Feature matrix, labels and the train/test/validation partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    /// Subset of `train_idx`, drawn per run.
    pub val_idx: Vec<usize>,
}

impl SplitDataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        train_idx: Vec<usize>,
        test_idx: Vec<usize>,
    ) -> Result<Self> {
        let n = features.rows();
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: labels.len(),
            });
        }
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let ds = SplitDataset {
            name: name.into(),
            features,
            labels,
            n_classes,
            train_idx,
            test_idx,
            val_idx: Vec::new(),
        };
        ds.check()?;
        Ok(ds)
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Verifies disjointness, containment and index ranges.
    pub fn check(&self) -> Result<()> {
        let n = self.features.rows();
        let train: BTreeSet<usize> = self.train_idx.iter().copied().collect();
        if train.len() != self.train_idx.len() {
            return Err(Error::Invalid("duplicate train index".into()));
        }
        for &i in self.train_idx.iter().chain(&self.test_idx).chain(&self.val_idx) {
            if i >= n {
                return Err(Error::Invalid(format!("index {i} out of range for {n} rows")));
            }
        }
        if self.test_idx.iter().any(|i| train.contains(i)) {
            return Err(Error::Invalid("train and test splits overlap".into()));
        }
        if self.val_idx.iter().any(|i| !train.contains(i)) {
            return Err(Error::Invalid("validation index outside the train split".into()));
        }
        Ok(())
    }

    /// Train indices not held out for validation, in train order.
    pub fn pool_indices(&self) -> Vec<usize> {
        let val: BTreeSet<usize> = self.val_idx.iter().copied().collect();
        self.train_idx
            .iter()
            .copied()
            .filter(|i| !val.contains(i))
            .collect()
    }

    pub fn class_counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &i in idx {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Fails if some class has fewer than `per_class` train examples.
    pub fn check_class_support(&self, per_class: usize) -> Result<()> {
        for (c, &k) in self.class_counts(&self.train_idx).iter().enumerate() {
            if k < per_class {
                return Err(Error::config(format!(
                    "{}: class {c} has {k} train examples, seed set needs {per_class}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Per-feature min-max scaling fitted on `fit_rows` and applied to every row.
/// Rows outside the fitted range are clamped into [0, 1]; constant features
/// map to 0.
pub fn min_max_normalize(features: &mut Matrix, fit_rows: &[usize]) {
    let d = features.cols();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &i in fit_rows {
        for (j, &v) in features.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    for i in 0..features.rows() {
        let row = features.row_mut(i);
        for j in 0..d {
            let span = hi[j] - lo[j];
            row[j] = if span > 0.0 && span.is_finite() {
                ((row[j] - lo[j]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
}

/// Draws the validation split from the train indices. `min_pool` is the
/// smallest acceptable number of remaining pool points (budget + seed set).
pub fn split_validation(
    ds: &SplitDataset,
    fraction: f64,
    min_pool: usize,
    rng: &mut StreamRng,
) -> Result<SplitDataset> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config(format!(
            "validation fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n_train = ds.train_idx.len();
    let n_val = (fraction * n_train as f64).round() as usize;
    let pool = n_train - n_val.min(n_train);
    if pool < min_pool {
        return Err(Error::config(format!(
            "{}: validation fraction {fraction} leaves {pool} pool points, need {min_pool}",
            ds.name
        )));
    }
    let mut val: Vec<usize> = index::sample(rng, n_train, n_val)
        .into_iter()
        .map(|k| ds.train_idx[k])
        .collect();
    val.sort_unstable();
    let mut out = ds.clone();
    out.val_idx = val;
    Ok(out)
}

/// Labeled and unlabeled sets during a run.
///
/// Positions are *pool-local*: `pool[k]` is the dataset row of pool position
/// `k`. `labeled` keeps acquisition order, `unlabeled` stays sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolState {
    pub pool: Vec<usize>,
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub iteration: usize,
}

impl PoolState {
    pub fn dataset_index(&self, local: usize) -> usize {
        self.pool[local]
    }

    /// Moves `local` from the unlabeled to the labeled set.
    pub fn acquire(&mut self, local: usize) -> Result<()> {
        let pos = self
            .unlabeled
            .binary_search(&local)
            .map_err(|_| Error::Invalid(format!("pool position {local} is not unlabeled")))?;
        self.unlabeled.remove(pos);
        self.labeled.push(local);
        self.iteration += 1;
        Ok(())
    }

    /// Bookkeeping invariant: disjoint sets covering the pool.
    pub fn is_consistent(&self) -> bool {
        let lab: BTreeSet<usize> = self.labeled.iter().copied().collect();
        lab.len() == self.labeled.len()
            && self.unlabeled.iter().all(|u| !lab.contains(u))
            && lab.len() + self.unlabeled.len() == self.pool.len()
            && self.unlabeled.windows(2).all(|w| w[0] < w[1])
            && self.unlabeled.last().is_none_or(|&u| u < self.pool.len())
    }
}

/// Picks `per_class` pool points of every class as the initial labeled set.
pub fn seed_labeled_set(
    ds: &SplitDataset,
    per_class: usize,
    rng: &mut StreamRng,
) -> Result<PoolState> {
    if per_class == 0 {
        return Err(Error::config("seed set needs at least one example per class"));
    }
    let pool = ds.pool_indices();
    let mut labeled = Vec::with_capacity(per_class * ds.n_classes);
    for c in 0..ds.n_classes {
        let members: Vec<usize> = (0..pool.len())
            .filter(|&k| ds.labels[pool[k]] == c)
            .collect();
        if members.len() < per_class {
            return Err(Error::config(format!(
                "{}: class {c} has {} pool points, seed set needs {per_class}",
                ds.name,
                members.len()
            )));
        }
        let mut picked: Vec<usize> = index::sample(rng, members.len(), per_class)
            .into_iter()
            .map(|k| members[k])
            .collect();
        picked.sort_unstable();
        labeled.extend(picked);
    }
    let taken: BTreeSet<usize> = labeled.iter().copied().collect();
    let unlabeled = (0..pool.len()).filter(|k| !taken.contains(k)).collect();
    Ok(PoolState {
        pool,
        labeled,
        unlabeled,
        iteration: 0,
    })
}

//! Coreset (greedy k-center) and TypiClust, both in penultimate space.

use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use super::{candidates, pick, AcquisitionContext, Selection};
use crate::error::{Error, Result};
use crate::matrix::{distance, Matrix};
use crate::rng::{fork, StreamRng};

/// Euclidean distance from each row of `points` to its nearest row of
/// `centers`; `+inf` when `centers` is empty.
pub fn min_distances(points: &Matrix, centers: &Matrix) -> Vec<f64> {
    points
        .iter_rows()
        .map(|p| {
            centers
                .iter_rows()
                .map(|c| distance(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn acquire_coreset(
    ctx: &AcquisitionContext<'_>,
    subsample: usize,
    rng: &mut StreamRng,
) -> Result<Selection> {
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    if ctx.labeled.is_empty() {
        return Err(Error::EmptyInput("labeled set"));
    }
    let cands = candidates(ctx.unlabeled, subsample, rng);
    let emb_c = ctx.classifier.penultimate(&ctx.pool.select_rows(&cands))?;
    let emb_l = ctx.classifier.penultimate(&ctx.pool.select_rows(ctx.labeled))?;
    pick(&cands, &min_distances(&emb_c, &emb_l), true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TypiClustParams {
    pub subsample: usize,
    pub min_cluster: usize,
    pub max_clusters: usize,
    /// Neighbors for typicality; `None` means `min(20, cluster size - 1)`.
    pub knn: Option<usize>,
    /// k-means restarts.
    pub n_init: usize,
}

impl Default for TypiClustParams {
    fn default() -> Self {
        TypiClustParams {
            subsample: 10_000,
            min_cluster: 5,
            max_clusters: 500,
            knn: None,
            n_init: 10,
        }
    }
}

impl TypiClustParams {
    /// Clusters used with `n_labeled` labeled points among `n_points`.
    pub fn cluster_count(&self, n_labeled: usize, n_points: usize) -> usize {
        (n_labeled + 1).min(self.max_clusters).min(n_points).max(1)
    }

    fn knn_for(&self, size: usize) -> usize {
        let cap = size.saturating_sub(1);
        self.knn.unwrap_or(20).min(cap)
    }
}

/// Inverse mean distance from each of `members` to its `knn` nearest other
/// members. `+inf` when `knn` is 0 or the neighbors coincide.
pub fn typicality(points: &Matrix, members: &[usize], knn: usize) -> Vec<f64> {
    members
        .iter()
        .map(|&i| {
            if knn == 0 {
                return f64::INFINITY;
            }
            let mut d: Vec<f64> = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| distance(points.row(i), points.row(j)))
                .collect();
            let k = knn.min(d.len());
            d.select_nth_unstable_by(k - 1, f64::total_cmp);
            let mean = d[..k].iter().sum::<f64>() / k as f64;
            1.0 / mean
        })
        .collect()
}

/// Cluster to draw from: the largest uncovered cluster of at least
/// `min_cluster` points, else the largest uncovered, else the largest.
/// Only clusters with an unlabeled member qualify. Ties go to the lower id.
fn choose_cluster(sizes: &[usize], covered: &[bool], open: &[bool], min_cluster: usize) -> Option<usize> {
    let best = |ok: &dyn Fn(usize) -> bool| {
        (0..sizes.len())
            .filter(|&c| open[c] && ok(c))
            .fold(None, |b: Option<usize>, c| match b {
                Some(b) if sizes[b] >= sizes[c] => Some(b),
                _ => Some(c),
            })
    };
    best(&|c| !covered[c] && sizes[c] >= min_cluster)
        .or_else(|| best(&|c| !covered[c]))
        .or_else(|| best(&|_| true))
}

pub fn acquire_typiclust(
    ctx: &AcquisitionContext<'_>,
    params: &TypiClustParams,
    rng: &mut StreamRng,
) -> Result<Selection> {
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let cands = candidates(ctx.unlabeled, params.subsample, rng);
    // rows 0..L are labeled, the rest are candidates
    let mut rows = ctx.labeled.to_vec();
    rows.extend_from_slice(&cands);
    let n_lab = ctx.labeled.len();
    let emb = ctx.classifier.penultimate(&ctx.pool.select_rows(&rows))?;

    let k = params.cluster_count(n_lab, rows.len());
    let mut km_rng = fork(rng, "typiclust-kmeans");
    let fit = kmeans(&emb, k, params.n_init, &mut km_rng);
    let k = fit.centroids.rows();

    let mut sizes = vec![0usize; k];
    let mut covered = vec![false; k];
    let mut open = vec![false; k];
    for (r, &c) in fit.assignment.iter().enumerate() {
        sizes[c] += 1;
        if r < n_lab {
            covered[c] = true;
        } else {
            open[c] = true;
        }
    }
    let cluster = choose_cluster(&sizes, &covered, &open, params.min_cluster).ok_or(Error::EmptyPool)?;

    let members: Vec<usize> = (0..rows.len()).filter(|&r| fit.assignment[r] == cluster).collect();
    let typ = typicality(&emb, &members, params.knn_for(members.len()));
    let (unl_rows, unl_typ): (Vec<usize>, Vec<f64>) = members
        .iter()
        .zip(&typ)
        .filter(|(&r, _)| r >= n_lab)
        .map(|(&r, &t)| (rows[r], t))
        .unzip();
    pick(&unl_rows, &unl_typ, true)
}

//! Adversarial synthetic datasets, regenerated from the data stream on every run.
//!
//! Train and test points come from the same process through two independent
//! children of the data stream, with as many test points as train points.
//! Both features are min-max scaled on the train rows.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{min_max_normalize, SplitDataset};
use crate::matrix::Matrix;
use crate::rng::{fork, StreamRng};

/// Cluster layout for ThreeClust.
///
/// Two clean clusters, one per class, sit at `(-separation, 0)` and
/// `(separation, 0)`. The optimal linear separator is the vertical line
/// through the origin, and both poisoned clusters (one per class) are centered
/// on it at `poison_center`. The two overlapping poisoned clusters together
/// look like a single third cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeClustGeometry {
    pub separation: f64,
    pub clean_std: f64,
    pub poison_std: f64,
    /// Vertical offset of the poisoned clusters along the decision boundary.
    pub poison_offset: f64,
}

impl Default for ThreeClustGeometry {
    fn default() -> Self {
        ThreeClustGeometry {
            separation: 3.0,
            clean_std: 1.0,
            poison_std: 1.0,
            poison_offset: 0.0,
        }
    }
}

impl ThreeClustGeometry {
    /// Means of (clean class 0, clean class 1, poisoned class 0, poisoned class 1).
    pub fn centers(&self) -> [[f64; 2]; 4] {
        let p = [0.0, self.poison_offset];
        [[-self.separation, 0.0], [self.separation, 0.0], p, p]
    }
}

fn gaussian(rng: &mut StreamRng, std: f64) -> f64 {
    // std validated by the caller; Normal::new only fails on non-finite std
    Normal::new(0.0, std.max(0.0)).map_or(0.0, |n| n.sample(rng))
}

fn three_clust_points(
    rng: &mut StreamRng,
    n_per_cluster: usize,
    geo: &ThreeClustGeometry,
) -> (Vec<[f64; 2]>, Vec<usize>) {
    let centers = geo.centers();
    let stds = [geo.clean_std, geo.clean_std, geo.poison_std, geo.poison_std];
    let classes = [0, 1, 0, 1];
    let mut pts = Vec::with_capacity(4 * n_per_cluster);
    let mut labels = Vec::with_capacity(4 * n_per_cluster);
    for k in 0..4 {
        for _ in 0..n_per_cluster {
            pts.push([
                centers[k][0] + gaussian(rng, stds[k]),
                centers[k][1] + gaussian(rng, stds[k]),
            ]);
            labels.push(classes[k]);
        }
    }
    shuffle_together(rng, pts, labels)
}

fn shuffle_together(
    rng: &mut StreamRng,
    pts: Vec<[f64; 2]>,
    labels: Vec<usize>,
) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.shuffle(rng);
    (
        order.iter().map(|&i| pts[i]).collect(),
        order.iter().map(|&i| labels[i]).collect(),
    )
}

fn assemble(
    name: &str,
    train: (Vec<[f64; 2]>, Vec<usize>),
    test: (Vec<[f64; 2]>, Vec<usize>),
) -> SplitDataset {
    let n_train = train.0.len();
    let n_test = test.0.len();
    let mut rows = train.0;
    rows.extend(test.0);
    let mut labels = train.1;
    labels.extend(test.1);
    let mut features = Matrix::from_rows(&rows).expect("fixed width rows");
    let train_idx: Vec<usize> = (0..n_train).collect();
    min_max_normalize(&mut features, &train_idx);
    let test_idx = (n_train..n_train + n_test).collect();
    SplitDataset::new(name, features, labels, train_idx, test_idx)
        .expect("generated splits are disjoint")
}

/// Four Gaussian clusters, two per class, `n_per_cluster` points each in the
/// train split (and again in the test split).
pub fn generate_three_clust(
    rng: &mut StreamRng,
    n_per_cluster: usize,
    geometry: &ThreeClustGeometry,
) -> SplitDataset {
    let mut train_rng = fork(rng, "three-clust/train");
    let mut test_rng = fork(rng, "three-clust/test");
    let train = three_clust_points(&mut train_rng, n_per_cluster, geometry);
    let test = three_clust_points(&mut test_rng, n_per_cluster, geometry);
    assemble("ThreeClust", train, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DivergingSinParams {
    pub n_per_class: usize,
    /// Frequency of the sine.
    pub psi: f64,
    /// Divergence factor.
    pub delta: f64,
    /// Standard deviation of the additive noise.
    pub sigma: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for DivergingSinParams {
    fn default() -> Self {
        DivergingSinParams {
            n_per_class: 300,
            psi: 2.0,
            delta: 0.5,
            sigma: 0.3,
            x_min: 0.0,
            x_max: 10.0,
        }
    }
}

/// `sin(psi x) + (delta x + noise)` for the positive class,
/// `sin(psi x) - (delta x + noise)` for the negative one.
pub fn diverging_sin_value(x: f64, psi: f64, delta: f64, noise: f64, positive: bool) -> f64 {
    let spread = delta * x + noise;
    if positive {
        (psi * x).sin() + spread
    } else {
        (psi * x).sin() - spread
    }
}

/// Unnormalized `(x, y)` points. Label 1 is the positive branch.
pub fn sample_diverging_sin_raw(
    rng: &mut StreamRng,
    p: &DivergingSinParams,
) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut pts = Vec::with_capacity(2 * p.n_per_class);
    let mut labels = Vec::with_capacity(2 * p.n_per_class);
    for class in [0usize, 1] {
        for _ in 0..p.n_per_class {
            let x = if p.x_max > p.x_min {
                rng.random_range(p.x_min..p.x_max)
            } else {
                p.x_min
            };
            let noise = gaussian(rng, p.sigma);
            pts.push([x, diverging_sin_value(x, p.psi, p.delta, noise, class == 1)]);
            labels.push(class);
        }
    }
    shuffle_together(rng, pts, labels)
}

pub fn generate_diverging_sin(rng: &mut StreamRng, params: &DivergingSinParams) -> SplitDataset {
    let mut train_rng = fork(rng, "diverging-sin/train");
    let mut test_rng = fork(rng, "diverging-sin/test");
    let train = sample_diverging_sin_raw(&mut train_rng, params);
    let test = sample_diverging_sin_raw(&mut test_rng, params);
    assemble("DivergingSin", train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from;

    #[test]
    fn three_clust_sizes() {
        let ds = generate_three_clust(&mut stream_from(1, "d"), 150, &Default::default());
        assert_eq!(ds.train_idx.len(), 600);
        assert_eq!(ds.class_counts(&ds.train_idx), vec![300, 300]);
        assert_eq!(ds.test_idx.len(), 600);

        let tiny = generate_three_clust(&mut stream_from(1, "d"), 1, &Default::default());
        assert_eq!(tiny.train_idx.len(), 4);
        assert_eq!(tiny.class_counts(&tiny.train_idx), vec![2, 2]);
    }

    #[test]
    fn three_clust_is_seeded() {
        let g = ThreeClustGeometry::default();
        let a = generate_three_clust(&mut stream_from(7, "d"), 20, &g);
        let b = generate_three_clust(&mut stream_from(7, "d"), 20, &g);
        assert_eq!(a, b);
        let c = generate_three_clust(&mut stream_from(8, "d"), 20, &g);
        assert_ne!(a.features, c.features);
    }

    #[test]
    fn three_clust_train_features_in_unit_box() {
        let ds = generate_three_clust(&mut stream_from(2, "d"), 50, &Default::default());
        for &i in &ds.train_idx {
            assert!(ds.features.row(i).iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn poisoned_clusters_sit_on_the_boundary() {
        let g = ThreeClustGeometry::default();
        let c = g.centers();
        // both poisoned means coincide and are equidistant from the clean means
        assert_eq!(c[2], c[3]);
        let d0 = crate::matrix::distance(&c[0], &c[2]);
        let d1 = crate::matrix::distance(&c[1], &c[2]);
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn diverging_sin_noise_free_values() {
        let y = diverging_sin_value(1.0, 2.0, 0.5, 0.0, true);
        assert!((y - ((2.0f64).sin() + 0.5)).abs() < 1e-12);
        assert!((y - 1.4093).abs() < 1e-4);
        assert_eq!(diverging_sin_value(0.0, 2.0, 0.5, 0.0, true), 0.0);
        assert_eq!(diverging_sin_value(0.0, 2.0, 0.5, 0.0, false), 0.0);
    }

    #[test]
    fn diverging_sin_noise_has_zero_mean() {
        let p = DivergingSinParams {
            n_per_class: 100_000,
            ..Default::default()
        };
        let (pts, labels) = sample_diverging_sin_raw(&mut stream_from(11, "mc"), &p);
        let (sum, n) = pts
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == 1)
            .fold((0.0, 0usize), |(s, n), (pt, _)| {
                (s + pt[1] - (p.psi * pt[0]).sin() - p.delta * pt[0], n + 1)
            });
        assert_eq!(n, 100_000);
        assert!((sum / n as f64).abs() < 3e-3, "mean noise {}", sum / n as f64);
    }

    #[test]
    fn diverging_sin_shape() {
        let ds = generate_diverging_sin(&mut stream_from(1, "d"), &Default::default());
        assert_eq!(ds.train_idx.len(), 600);
        assert_eq!(ds.n_classes, 2);
        assert_eq!(ds.dim(), 2);
    }
}

//! Lloyd's k-means with k-means++ seeding and best-of-n restarts.

use rand::Rng;

use crate::matrix::{squared_distance, Matrix};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: Vec<usize>,
    pub centroids: Matrix,
    pub inertia: f64,
}

const MAX_ITER: usize = 100;

fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.iter_rows().enumerate() {
        let d = squared_distance(point, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_plus_plus(points: &Matrix, k: usize, rng: &mut StreamRng) -> Matrix {
    let n = points.rows();
    let mut centroids = Matrix::zeros(k, points.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // all points coincide with chosen centers
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(points.row(chosen));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), centroids.row(c)));
        }
    }
    centroids
}

fn lloyd(points: &Matrix, mut centroids: Matrix) -> KMeansFit {
    let n = points.rows();
    let k = centroids.rows();
    let d = points.cols();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let (c, _) = nearest(points.row(i), &centroids);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = assignment[i];
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(points.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, &s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            } else {
                // move an empty cluster onto the worst-served point
                let far = (0..n)
                    .map(|i| (i, squared_distance(points.row(i), centroids.row(assignment[i]))))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
                    .0;
                centroids.row_mut(c).copy_from_slice(points.row(far));
                assignment[far] = c;
            }
        }
    }
    let inertia = (0..n)
        .map(|i| squared_distance(points.row(i), centroids.row(assignment[i])))
        .sum();
    KMeansFit {
        assignment,
        centroids,
        inertia,
    }
}

/// Best of `n_init` k-means++ initialized runs by inertia. `k` is clamped to
/// `1..=n`.
pub fn kmeans(points: &Matrix, k: usize, n_init: usize, rng: &mut StreamRng) -> KMeansFit {
    let n = points.rows();
    assert!(n > 0, "kmeans on an empty set");
    let k = k.clamp(1, n);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..n_init.max(1) {
        let fit = lloyd(points, seed_plus_plus(points, k, rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    best.expect("at least one restart")
}

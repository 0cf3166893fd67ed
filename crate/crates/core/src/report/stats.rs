//! Order statistics, average ranks and the restart-variance resampling.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Median; the midpoint of the central pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Population standard deviation; 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    let Some(m) = mean(values) else { return 0.0 };
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// `(median, std)` of per-run AUCs. Sums run in sorted order, so the result
/// does not depend on the order of runs.
pub fn median_spread(aucs: &[f64]) -> Result<(f64, f64)> {
    let m = median(aucs).ok_or(Error::EmptyInput("AUC list"))?;
    Ok((m, std_dev(&sorted(aucs))))
}

/// Ranks by descending score, 1 = best; tied scores share their mean rank.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Box-plot summary: quartiles, whiskers at the most extreme points within
/// 1.5 IQR of the box, and everything beyond as outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<BoxStats> {
        let q1 = quantile(values, 0.25)?;
        let q3 = quantile(values, 0.75)?;
        let med = quantile(values, 0.5)?;
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = values.iter().copied().filter(|v| (lo..=hi).contains(v)).collect();
        let outliers = sorted(&values.iter().copied().filter(|v| !(lo..=hi).contains(v)).collect::<Vec<_>>());
        Some(BoxStats {
            q1,
            median: med,
            q3,
            whisker_low: inside.iter().copied().fold(f64::INFINITY, f64::min),
            whisker_high: inside.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            outliers,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Medians of random subsets of one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetMedians {
    pub size: usize,
    pub medians: Vec<f64>,
    pub stats: BoxStats,
}

/// For each subset size, `draws` subsets drawn uniformly without replacement
/// from `pool`, reduced to their medians.
pub fn restart_variance_analysis(
    pool: &[f64],
    sizes: &[usize],
    draws: usize,
    rng: &mut StreamRng,
) -> Result<Vec<SubsetMedians>> {
    if draws == 0 {
        return Err(Error::config("draws must be at least 1"));
    }
    sizes
        .iter()
        .map(|&k| {
            if k == 0 || k > pool.len() {
                return Err(Error::config(format!(
                    "subset size {k} outside 1..={}",
                    pool.len()
                )));
            }
            let medians: Vec<f64> = (0..draws)
                .map(|_| {
                    let subset: Vec<f64> = index::sample(rng, pool.len(), k)
                        .into_iter()
                        .map(|i| pool[i])
                        .collect();
                    median(&subset).expect("k >= 1")
                })
                .collect();
            let stats = BoxStats::from_values(&medians).expect("draws >= 1");
            Ok(SubsetMedians {
                size: k,
                medians,
                stats,
            })
        })
        .collect()
}

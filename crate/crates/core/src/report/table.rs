//! Score tables: median AUC per (dataset, algorithm), random-normalized
//! scores, domain aggregates and mean ranks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::stats::{average_ranks, mean, median_spread, std_dev};
use crate::acquisition::AlgorithmKind;
use crate::error::{Error, Result};
use crate::runner::RunCurve;

/// Name of the aggregate over every domain.
pub const ALL_DOMAINS: &str = "all";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub dataset: String,
    pub domain: String,
    pub algorithm: AlgorithmKind,
    pub runs: usize,
    pub median_auc: f64,
    /// Standard deviation of AUC over restarts.
    pub spread: f64,
    /// Median AUC over the dataset's random median AUC.
    pub normalized: Option<f64>,
    /// `spread` on the normalized scale.
    pub normalized_spread: Option<f64>,
    /// Rank among the algorithms on this dataset, 1 = best.
    pub rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    /// Sorted by (dataset, algorithm).
    pub rows: Vec<ScoreRow>,
    pub normalized: bool,
}

impl ScoreTable {
    /// One row per (dataset, algorithm) present in `curves`.
    pub fn from_curves(curves: &[RunCurve]) -> Result<ScoreTable> {
        let mut groups: BTreeMap<(String, AlgorithmKind), (String, Vec<f64>)> = BTreeMap::new();
        for c in curves {
            let entry = groups
                .entry((c.dataset.clone(), c.algorithm))
                .or_insert_with(|| (c.domain.clone(), Vec::new()));
            if entry.0 != c.domain {
                return Err(Error::Invalid(format!(
                    "dataset {} listed under domains {} and {}",
                    c.dataset, entry.0, c.domain
                )));
            }
            entry.1.push(c.auc()?);
        }
        let mut rows = Vec::with_capacity(groups.len());
        for ((dataset, algorithm), (domain, aucs)) in groups {
            let (median_auc, spread) = median_spread(&aucs)?;
            rows.push(ScoreRow {
                dataset,
                domain,
                algorithm,
                runs: aucs.len(),
                median_auc,
                spread,
                normalized: None,
                normalized_spread: None,
                rank: None,
            });
        }
        let mut table = ScoreTable {
            rows,
            normalized: false,
        };
        table.assign_ranks();
        Ok(table)
    }

    pub fn datasets(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r.dataset.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn algorithms(&self) -> Vec<AlgorithmKind> {
        self.rows
            .iter()
            .map(|r| r.algorithm)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn get(&self, dataset: &str, algorithm: AlgorithmKind) -> Option<&ScoreRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.algorithm == algorithm)
    }

    fn assign_ranks(&mut self) {
        for ds in self.datasets() {
            let idx: Vec<usize> = (0..self.rows.len())
                .filter(|&i| self.rows[i].dataset == ds)
                .collect();
            let scores: Vec<f64> = idx.iter().map(|&i| self.rows[i].median_auc).collect();
            for (&i, r) in idx.iter().zip(average_ranks(&scores)) {
                self.rows[i].rank = Some(r);
            }
        }
    }

    /// Divides every median AUC by the same dataset's random median AUC.
    pub fn normalize_vs_random(&self) -> Result<ScoreTable> {
        if self.normalized {
            return Err(Error::Invalid("score table is already normalized".into()));
        }
        let mut out = self.clone();
        for ds in self.datasets() {
            let base = self
                .get(&ds, AlgorithmKind::Random)
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "dataset {ds} has no random runs; normalization divides by random's median AUC"
                    ))
                })?
                .median_auc;
            if base <= 0.0 {
                return Err(Error::Invalid(format!("dataset {ds}: random median AUC is {base}")));
            }
            for r in out.rows.iter_mut().filter(|r| r.dataset == ds) {
                r.normalized = Some(if r.algorithm == AlgorithmKind::Random {
                    1.0
                } else {
                    r.median_auc / base
                });
                r.normalized_spread = Some(r.spread / base);
            }
        }
        out.normalized = true;
        Ok(out)
    }
}

/// Normalized scores of one algorithm averaged over a domain's datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainScore {
    pub domain: String,
    pub algorithm: AlgorithmKind,
    pub datasets: usize,
    pub mean_normalized: f64,
    /// Standard deviation of the normalized score across datasets.
    pub std_datasets: f64,
    /// Mean over datasets of the normalized restart spread.
    pub mean_restart_spread: f64,
}

fn domains(table: &ScoreTable) -> Vec<String> {
    let mut d: Vec<String> = table
        .rows
        .iter()
        .map(|r| r.domain.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    d.push(ALL_DOMAINS.to_string());
    d
}

fn in_domain(row: &ScoreRow, domain: &str) -> bool {
    domain == ALL_DOMAINS || row.domain == domain
}

/// Per-domain (plus [`ALL_DOMAINS`]) averages of a normalized table.
pub fn domain_scores(table: &ScoreTable) -> Result<Vec<DomainScore>> {
    if !table.normalized {
        return Err(Error::Invalid("domain scores need a normalized table".into()));
    }
    let mut out = Vec::new();
    for domain in domains(table) {
        for alg in table.algorithms() {
            let rows: Vec<&ScoreRow> = table
                .rows
                .iter()
                .filter(|r| r.algorithm == alg && in_domain(r, &domain))
                .collect();
            if rows.is_empty() {
                continue;
            }
            let norm: Vec<f64> = rows.iter().filter_map(|r| r.normalized).collect();
            let spread: Vec<f64> = rows.iter().filter_map(|r| r.normalized_spread).collect();
            out.push(DomainScore {
                domain: domain.clone(),
                algorithm: alg,
                datasets: rows.len(),
                mean_normalized: mean(&norm).unwrap_or(f64::NAN),
                std_datasets: std_dev(&norm),
                mean_restart_spread: mean(&spread).unwrap_or(f64::NAN),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRank {
    pub domain: String,
    pub algorithm: AlgorithmKind,
    pub mean_rank: f64,
}

/// Mean per-dataset rank of every algorithm, per domain and overall. Every
/// algorithm must be scored on every dataset.
pub fn rank_algorithms(table: &ScoreTable) -> Result<Vec<MeanRank>> {
    let algs = table.algorithms();
    for ds in table.datasets() {
        for &a in &algs {
            if table.get(&ds, a).is_none() {
                return Err(Error::Invalid(format!(
                    "incomplete grid: no {a} runs on dataset {ds}"
                )));
            }
        }
    }
    let mut out = Vec::new();
    for domain in domains(table) {
        for &alg in &algs {
            let ranks: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.algorithm == alg && in_domain(r, &domain))
                .filter_map(|r| r.rank)
                .collect();
            if let Some(m) = mean(&ranks) {
                out.push(MeanRank {
                    domain: domain.clone(),
                    algorithm: alg,
                    mean_rank: m,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::Seeds;

    pub(crate) fn curve(ds: &str, domain: &str, alg: AlgorithmKind, restart: usize, acc: Vec<f64>) -> RunCurve {
        let n = acc.len();
        RunCurve {
            dataset: ds.into(),
            domain: domain.into(),
            algorithm: alg,
            restart,
            seeds: Seeds::default(),
            accuracies: acc,
            chosen: (0..n).collect(),
            scores: vec![None; n],
            fallback: vec![None; n],
            probe_acc: vec![None; n],
            wall_time: 0.0,
        }
    }

    #[test]
    fn normalization_examples() {
        let curves = vec![
            curve("d", "x", AlgorithmKind::Random, 0, vec![0.5, 0.5]),
            curve("d", "x", AlgorithmKind::Margin, 0, vec![0.52, 0.52]),
            curve("d", "x", AlgorithmKind::Bald, 0, vec![0.4, 0.4]),
        ];
        let t = ScoreTable::from_curves(&curves).unwrap().normalize_vs_random().unwrap();
        assert_eq!(t.get("d", AlgorithmKind::Random).unwrap().normalized, Some(1.0));
        assert!((t.get("d", AlgorithmKind::Margin).unwrap().normalized.unwrap() - 1.04).abs() < 1e-12);
        assert!(t.get("d", AlgorithmKind::Bald).unwrap().normalized.unwrap() < 1.0);
        assert!(t.normalize_vs_random().is_err());
    }

    #[test]
    fn missing_random_is_an_error() {
        let curves = vec![curve("d", "x", AlgorithmKind::Margin, 0, vec![0.5])];
        let err = ScoreTable::from_curves(&curves).unwrap().normalize_vs_random().unwrap_err();
        assert!(err.to_string().contains("random"));
    }

    #[test]
    fn ranks_and_domains() {
        let mut curves = Vec::new();
        for (ds, dom) in [("a", "x"), ("b", "y")] {
            curves.push(curve(ds, dom, AlgorithmKind::Random, 0, vec![0.5]));
            curves.push(curve(ds, dom, AlgorithmKind::Oracle, 0, vec![0.9]));
            curves.push(curve(ds, dom, AlgorithmKind::Margin, 0, vec![0.6]));
        }
        let t = ScoreTable::from_curves(&curves).unwrap();
        let ranks = rank_algorithms(&t).unwrap();
        let oracle_all = ranks
            .iter()
            .find(|r| r.domain == ALL_DOMAINS && r.algorithm == AlgorithmKind::Oracle)
            .unwrap();
        assert_eq!(oracle_all.mean_rank, 1.0);
        assert_eq!(ranks.iter().filter(|r| r.domain == "x").count(), 3);

        let d = domain_scores(&t.normalize_vs_random().unwrap()).unwrap();
        let m = d
            .iter()
            .find(|r| r.domain == ALL_DOMAINS && r.algorithm == AlgorithmKind::Margin)
            .unwrap();
        assert!((m.mean_normalized - 1.2).abs() < 1e-12);
        assert_eq!(m.datasets, 2);
        assert!(domain_scores(&t).is_err());
    }

    #[test]
    fn incomplete_grid_rejected() {
        let curves = vec![
            curve("a", "x", AlgorithmKind::Random, 0, vec![0.5]),
            curve("b", "x", AlgorithmKind::Random, 0, vec![0.5]),
            curve("a", "x", AlgorithmKind::Margin, 0, vec![0.6]),
        ];
        let t = ScoreTable::from_curves(&curves).unwrap();
        assert!(rank_algorithms(&t).is_err());
    }
}

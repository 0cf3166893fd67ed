//! Aggregation of run records into tables, plots and a manifest.

mod plot;
mod records;
mod stats;
mod table;

pub use plot::{box_plot, curve_plot, rank_plot, CurveSeries};
pub use records::{parse_record, read_records, record_path, render_record, write_record, RECORD_COLUMNS};
pub use stats::{
    average_ranks, mean, median, median_spread, quantile, restart_variance_analysis, std_dev,
    BoxStats, SubsetMedians,
};
pub use table::{domain_scores, rank_algorithms, DomainScore, MeanRank, ScoreRow, ScoreTable, ALL_DOMAINS};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acquisition::AlgorithmKind;
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::runner::RunCurve;

/// `(median, std)` of the AUCs of `curves`.
pub fn median_auc(curves: &[RunCurve]) -> Result<(f64, f64)> {
    let aucs = curves.iter().map(RunCurve::auc).collect::<Result<Vec<_>>>()?;
    median_spread(&aucs)
}

fn write_file(path: &Path, body: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn tsv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub const SCORE_COLUMNS: [&str; 9] = [
    "dataset",
    "domain",
    "algorithm",
    "runs",
    "median_auc",
    "std_restarts",
    "normalized",
    "normalized_std_restarts",
    "rank",
];

pub fn render_scores(table: &ScoreTable) -> String {
    tsv(
        &SCORE_COLUMNS,
        table.rows.iter().map(|r| {
            vec![
                r.dataset.clone(),
                r.domain.clone(),
                r.algorithm.to_string(),
                r.runs.to_string(),
                r.median_auc.to_string(),
                r.spread.to_string(),
                opt(r.normalized),
                opt(r.normalized_spread),
                opt(r.rank),
            ]
        }),
    )
}

pub fn render_domains(scores: &[DomainScore]) -> String {
    tsv(
        &["domain", "algorithm", "datasets", "mean_normalized", "std_datasets", "mean_std_restarts"],
        scores.iter().map(|d| {
            vec![
                d.domain.clone(),
                d.algorithm.to_string(),
                d.datasets.to_string(),
                d.mean_normalized.to_string(),
                d.std_datasets.to_string(),
                d.mean_restart_spread.to_string(),
            ]
        }),
    )
}

pub fn render_ranks(ranks: &[MeanRank]) -> String {
    tsv(
        &["domain", "algorithm", "mean_rank"],
        ranks
            .iter()
            .map(|r| vec![r.domain.clone(), r.algorithm.to_string(), r.mean_rank.to_string()]),
    )
}

/// Median and interquartile band of each algorithm's curves on one dataset.
pub fn curve_series(curves: &[RunCurve], dataset: &str) -> Vec<CurveSeries> {
    let mut by_alg: BTreeMap<AlgorithmKind, Vec<&RunCurve>> = BTreeMap::new();
    for c in curves.iter().filter(|c| c.dataset == dataset) {
        by_alg.entry(c.algorithm).or_default().push(c);
    }
    by_alg
        .into_iter()
        .map(|(alg, cs)| {
            let len = cs.iter().map(|c| c.len()).min().unwrap_or(0);
            let at = |i: usize| cs.iter().map(|c| c.accuracies[i]).collect::<Vec<_>>();
            let band = |q: f64| (0..len).map(|i| quantile(&at(i), q).expect("nonempty")).collect();
            CurveSeries {
                label: alg.to_string(),
                median: band(0.5),
                q1: band(0.25),
                q3: band(0.75),
            }
        })
        .collect()
}

/// Score tables and plots for `curves` under `out`. Empty input gives
/// header-only tables.
pub fn emit_report(curves: &[RunCurve], out: &Path) -> Result<Vec<PathBuf>> {
    let raw = ScoreTable::from_curves(curves)?;
    let (table, domains) = if curves.is_empty() {
        (raw, Vec::new())
    } else {
        let t = raw.normalize_vs_random()?;
        let d = domain_scores(&t)?;
        (t, d)
    };
    let ranks = rank_algorithms(&table)?;
    let tables = out.join("tables");
    let plots = out.join("plots");
    let mut files = vec![
        write_file(&tables.join("scores.tsv"), &render_scores(&table))?,
        write_file(&tables.join("domains.tsv"), &render_domains(&domains))?,
        write_file(&tables.join("ranks.tsv"), &render_ranks(&ranks))?,
    ];
    for ds in table.datasets() {
        let svg = curve_plot(&ds, &curve_series(curves, &ds));
        files.push(write_file(&plots.join(format!("curves_{ds}.svg")), &svg)?);
    }
    if !ranks.is_empty() {
        let mut panels: Vec<(String, Vec<(String, f64)>)> = Vec::new();
        for r in &ranks {
            match panels.last_mut() {
                Some((d, v)) if *d == r.domain => v.push((r.algorithm.to_string(), r.mean_rank)),
                _ => panels.push((r.domain.clone(), vec![(r.algorithm.to_string(), r.mean_rank)])),
            }
        }
        let svg = rank_plot("mean rank (lower is better)", &panels, table.algorithms().len());
        files.push(write_file(&plots.join("ranks.svg"), &svg)?);
    }
    Ok(files)
}

/// Subset-median distributions for one (dataset, algorithm), written as a
/// table and a box plot.
pub fn emit_variance(
    curves: &[RunCurve],
    dataset: &str,
    algorithm: AlgorithmKind,
    sizes: &[usize],
    draws: usize,
    rng: &mut StreamRng,
    out: &Path,
) -> Result<(Vec<SubsetMedians>, Vec<PathBuf>)> {
    let aucs = curves
        .iter()
        .filter(|c| c.dataset == dataset && c.algorithm == algorithm)
        .map(RunCurve::auc)
        .collect::<Result<Vec<_>>>()?;
    if aucs.is_empty() {
        return Err(Error::Invalid(format!("no {algorithm} runs on dataset {dataset}")));
    }
    let result = restart_variance_analysis(&aucs, sizes, draws, rng)?;
    let body = tsv(
        &["size", "q1", "median", "q3", "iqr", "whisker_low", "whisker_high", "outliers"],
        result.iter().map(|s| {
            let b = &s.stats;
            vec![
                s.size.to_string(),
                b.q1.to_string(),
                b.median.to_string(),
                b.q3.to_string(),
                b.iqr().to_string(),
                b.whisker_low.to_string(),
                b.whisker_high.to_string(),
                b.outliers.len().to_string(),
            ]
        }),
    );
    let stem = format!("variance_{dataset}_{algorithm}");
    let groups: Vec<(String, BoxStats)> = result.iter().map(|s| (s.size.to_string(), s.stats.clone())).collect();
    let svg = box_plot(&format!("{dataset} / {algorithm}: subset medians"), "restarts per subset", &groups);
    let files = vec![
        write_file(&out.join("tables").join(format!("{stem}.tsv")), &body)?,
        write_file(&out.join("plots").join(format!("{stem}.svg")), &svg)?,
    ];
    Ok((result, files))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reconstruct an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub files: Vec<ManifestFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the config's canonical JSON form.
pub fn config_hash(config: &serde_json::Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

/// Writes `manifest.json` in `root`, listing `files` with their hashes.
pub fn write_manifest(root: &Path, command: &str, config: serde_json::Value, files: &[PathBuf]) -> Result<PathBuf> {
    let mut listed = Vec::with_capacity(files.len());
    let mut sorted = files.to_vec();
    sorted.sort();
    sorted.dedup();
    for f in &sorted {
        let bytes = fs::read(f).map_err(|e| Error::io(f, e))?;
        let rel = f.strip_prefix(root).unwrap_or(f);
        listed.push(ManifestFile {
            path: rel.to_string_lossy().replace('\\', "/"),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = Manifest {
        command: command.to_string(),
        config_hash: config_hash(&config),
        config,
        files: listed,
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invalid(e.to_string()))?;
    write_file(&root.join("manifest.json"), &(body + "\n"))
}


#[cfg(test)]
pub(crate) mod tests_support {
    pub(crate) use super::table::tests::curve;
}

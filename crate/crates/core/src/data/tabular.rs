//! Dense CSV and sparse `label idx:val ...` loaders.

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{min_max_normalize, SplitDataset};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::stream_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TabularFormat {
    /// Comma separated, optional header, label in the last column.
    DenseCsv,
    /// `label idx:val idx:val ...` with 1-based feature indices.
    SparseLibsvm,
}

/// Unparsed-label table as read from one file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn parse_dense_csv(text: &str, path: &Path) -> Result<RawTable> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(parse_err(path, line_no, "expected at least one feature and a label"));
        }
        let (label, feats) = fields.split_last().expect("non-empty");
        let parsed: std::result::Result<Vec<f64>, _> =
            feats.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            // first record that does not parse is a header
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(fields.len());
                continue;
            }
            Err(e) => return Err(parse_err(path, line_no, format!("bad feature value: {e}"))),
        };
        match width {
            Some(w) if w != fields.len() => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("expected {w} columns, found {}", fields.len()),
                ))
            }
            None => width = Some(fields.len()),
            _ => {}
        }
        rows.push(values);
        labels.push((*label).to_string());
    }
    Ok(RawTable { rows, labels })
}

pub fn parse_sparse(text: &str, path: &Path) -> Result<RawTable> {
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0;
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("non-empty line");
        let mut row = Vec::new();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(path, line_no, format!("expected idx:val, got '{tok}'")))?;
            let i: usize = i
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("bad feature index '{i}'")))?;
            if i == 0 {
                return Err(parse_err(path, line_no, "feature indices are 1-based"));
            }
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("bad feature value '{v}'")))?;
            dim = dim.max(i);
            row.push((i - 1, v));
        }
        entries.push(row);
        labels.push(label.to_string());
    }
    let rows = entries
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; dim];
            for (i, v) in row {
                dense[i] = v;
            }
            dense
        })
        .collect();
    Ok(RawTable { rows, labels })
}

/// Sorted unique labels, numerically when every label is a number.
fn label_order(labels: &[String]) -> Vec<String> {
    let mut uniq: Vec<String> = labels.to_vec();
    uniq.sort();
    uniq.dedup();
    let numeric: Option<Vec<f64>> = uniq.iter().map(|l| l.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut paired: Vec<(f64, String)> = nums.into_iter().zip(uniq).collect();
        paired.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        paired.into_iter().map(|(_, l)| l).collect()
    } else {
        uniq
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularSource {
    pub train: PathBuf,
    pub format: TabularFormat,
    /// Pre-defined test file, if the dataset ships one.
    #[serde(default)]
    pub test: Option<PathBuf>,
    /// Newline separated row indices of the fixed test split. Created on first
    /// load when missing.
    #[serde(default)]
    pub test_split_file: Option<PathBuf>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

fn default_test_fraction() -> f64 {
    0.2
}

impl TabularSource {
    /// Resolves relative paths against `base`.
    pub fn rebased(&self, base: &Path) -> TabularSource {
        let fix = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        TabularSource {
            train: fix(&self.train),
            test: self.test.as_ref().map(fix),
            test_split_file: self.test_split_file.as_ref().map(fix),
            ..self.clone()
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_file(path: &Path, fmt: TabularFormat) -> Result<RawTable> {
    let text = read(path)?;
    match fmt {
        TabularFormat::DenseCsv => parse_dense_csv(&text, path),
        TabularFormat::SparseLibsvm => parse_sparse(&text, path),
    }
}

fn read_index_file(path: &Path, n: usize) -> Result<Vec<usize>> {
    let text = read(path)?;
    let mut idx = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let i: usize = line
            .parse()
            .map_err(|_| parse_err(path, no + 1, format!("bad index '{line}'")))?;
        if i >= n {
            return Err(parse_err(path, no + 1, format!("index {i} out of range for {n} rows")));
        }
        idx.push(i);
    }
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

/// Loads a tabular dataset with a fixed test split and [0, 1] features.
pub fn load_tabular(name: &str, src: &TabularSource) -> Result<SplitDataset> {
    let mut table = parse_file(&src.train, src.format)?;
    let n_train_file = table.rows.len();
    if let Some(test) = &src.test {
        let t = parse_file(test, src.format)?;
        table.rows.extend(t.rows);
        table.labels.extend(t.labels);
    }
    if table.rows.is_empty() {
        return Err(Error::config(format!("{name}: no rows in {}", src.train.display())));
    }
    // sparse files may disagree on the highest feature index
    let dim = table.rows.iter().map(Vec::len).max().unwrap_or(0);
    for r in &mut table.rows {
        r.resize(dim, 0.0);
    }
    let n = table.rows.len();

    let test_idx: Vec<usize> = if src.test.is_some() {
        (n_train_file..n).collect()
    } else if let Some(file) = src.test_split_file.as_ref().filter(|f| f.exists()) {
        read_index_file(file, n)?
    } else {
        if !(src.test_fraction > 0.0 && src.test_fraction < 1.0) {
            return Err(Error::config(format!(
                "{name}: test_fraction must lie in (0, 1), got {}",
                src.test_fraction
            )));
        }
        let k = (src.test_fraction * n as f64).round() as usize;
        // fixed once per dataset, independent of every run seed
        let mut idx = index::sample(&mut stream_from(0, name), n, k).into_vec();
        idx.sort_unstable();
        if let Some(file) = &src.test_split_file {
            let body: String = idx.iter().map(|i| format!("{i}\n")).collect();
            if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            fs::write(file, body).map_err(|e| Error::io(file, e))?;
        }
        idx
    };
    let is_test = {
        let mut m = vec![false; n];
        for &i in &test_idx {
            m[i] = true;
        }
        m
    };
    let train_idx: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();

    let order = label_order(&table.labels);
    let labels = table
        .labels
        .iter()
        .map(|l| order.iter().position(|o| o == l).expect("label present"))
        .collect();
    let mut features = Matrix::from_rows(&table.rows)?;
    min_max_normalize(&mut features, &train_idx);
    SplitDataset::new(name, features, labels, train_idx, test_idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_with_and_without_header() {
        let p = Path::new("x.csv");
        let a = parse_dense_csv("f1,f2,y\n1,2,a\n3,4,b\n", p).unwrap();
        let b = parse_dense_csv("1,2,a\n3,4,b\n", p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn dense_bad_row_reports_line() {
        let err = parse_dense_csv("1,2,a\n3,x,b\n", Path::new("d.csv")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let err = parse_dense_csv("1,2,a\n3,b\n", Path::new("d.csv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn sparse_row_semantics() {
        let t = parse_sparse("1 3:0.5 7:1.0\n", Path::new("s")).unwrap();
        assert_eq!(t.labels, vec!["1"]);
        assert_eq!(t.rows[0], vec![0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn sparse_errors() {
        assert!(matches!(
            parse_sparse("1 3:0.5\n0 0:1\n", Path::new("s")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_sparse("1 3-0.5\n", Path::new("s")),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn labels_sorted_numerically() {
        let l: Vec<String> = ["10", "-1", "2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(label_order(&l), vec!["-1", "2", "10"]);
        let s: Vec<String> = ["b", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(label_order(&s), vec!["a", "b"]);
    }
}

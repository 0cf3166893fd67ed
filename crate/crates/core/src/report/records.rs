//! Run records: one tab-separated file per run, one line per iteration.
//!
//! Files live at `<root>/<dataset>/<algorithm>/restart_<r>.tsv`. Missing
//! optional values are written as `-`. Floats use Rust's shortest
//! round-trip formatting, so reading a record back gives the same curve.

use std::fs;
use std::path::{Path, PathBuf};

use crate::acquisition::AlgorithmKind;
use crate::error::{Error, Result};
use crate::rng::Seeds;
use crate::runner::RunCurve;

pub const RECORD_COLUMNS: [&str; 13] = [
    "dataset",
    "domain",
    "algorithm",
    "restart",
    "iteration",
    "chosen",
    "score",
    "test_acc",
    "seed_omega",
    "seed_data",
    "seed_model",
    "fallback",
    "probe_acc",
];

const NONE: &str = "-";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| NONE.to_string(), T::to_string)
}

pub fn record_path(root: &Path, curve: &RunCurve) -> PathBuf {
    root.join(&curve.dataset)
        .join(curve.algorithm.name())
        .join(format!("restart_{}.tsv", curve.restart))
}

pub fn render_record(curve: &RunCurve) -> String {
    let mut out = RECORD_COLUMNS.join("\t");
    out.push('\n');
    for i in 0..curve.len() {
        let fields = [
            curve.dataset.clone(),
            curve.domain.clone(),
            curve.algorithm.to_string(),
            curve.restart.to_string(),
            (i + 1).to_string(),
            curve.chosen[i].to_string(),
            opt(&curve.scores[i]),
            curve.accuracies[i].to_string(),
            curve.seeds.omega.to_string(),
            curve.seeds.data.to_string(),
            curve.seeds.model.to_string(),
            opt(&curve.fallback[i]),
            opt(&curve.probe_acc[i]),
        ];
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    out
}

/// Writes one record file, creating directories as needed.
pub fn write_record(root: &Path, curve: &RunCurve) -> Result<PathBuf> {
    let path = record_path(root, curve);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(&path, render_record(curve)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("bad {name} '{raw}'"),
    })
}

fn opt_field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, raw: &str) -> Result<Option<T>> {
    if raw == NONE {
        Ok(None)
    } else {
        field(path, line, name, raw).map(Some)
    }
}

/// Parses one record file.
pub fn parse_record(text: &str, path: &Path) -> Result<RunCurve> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.split('\t').eq(RECORD_COLUMNS) => {}
        _ => return Err(perr(1, "missing or unexpected header".into())),
    }
    let mut curve: Option<RunCurve> = None;
    for (no, line) in lines {
        let no = no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != RECORD_COLUMNS.len() {
            return Err(perr(no, format!("expected {} fields, got {}", RECORD_COLUMNS.len(), f.len())));
        }
        let algorithm: AlgorithmKind = f[2].parse().map_err(|_| perr(no, format!("unknown algorithm '{}'", f[2])))?;
        let restart: usize = field(path, no, "restart", f[3])?;
        let iteration: usize = field(path, no, "iteration", f[4])?;
        let seeds = Seeds::new(
            field(path, no, "seed_omega", f[8])?,
            field(path, no, "seed_data", f[9])?,
            field(path, no, "seed_model", f[10])?,
        );
        let c = curve.get_or_insert_with(|| RunCurve {
            dataset: f[0].to_string(),
            domain: f[1].to_string(),
            algorithm,
            restart,
            seeds,
            accuracies: Vec::new(),
            chosen: Vec::new(),
            scores: Vec::new(),
            fallback: Vec::new(),
            probe_acc: Vec::new(),
            wall_time: 0.0,
        });
        if c.dataset != f[0] || c.domain != f[1] || c.algorithm != algorithm || c.restart != restart || c.seeds != seeds {
            return Err(perr(no, "run identity changes within one file".into()));
        }
        if iteration != c.len() + 1 {
            return Err(perr(no, format!("expected iteration {}, got {iteration}", c.len() + 1)));
        }
        let acc: f64 = field(path, no, "test_acc", f[7])?;
        if !(0.0..=1.0).contains(&acc) {
            return Err(perr(no, format!("accuracy {acc} outside [0, 1]")));
        }
        c.accuracies.push(acc);
        c.chosen.push(field(path, no, "chosen", f[5])?);
        c.scores.push(opt_field(path, no, "score", f[6])?);
        c.fallback.push(opt_field(path, no, "fallback", f[11])?);
        c.probe_acc.push(opt_field(path, no, "probe_acc", f[12])?);
    }
    curve.ok_or_else(|| perr(1, "record has no iterations".into()))
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "tsv") {
            out.push(path);
        }
    }
    Ok(())
}

/// Every `*.tsv` record below `root`, ordered by (dataset, algorithm, restart).
pub fn read_records(root: &Path) -> Result<Vec<RunCurve>> {
    let mut files = Vec::new();
    collect_files(root, &mut files)?;
    let mut curves = files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_record(&text, p)
        })
        .collect::<Result<Vec<_>>>()?;
    curves.sort_by(|a, b| {
        (&a.dataset, a.algorithm, a.restart).cmp(&(&b.dataset, b.algorithm, b.restart))
    });
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::super::table::tests::curve;
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = curve("three-clust", "synthetic", AlgorithmKind::Oracle, 3, vec![0.1, 1.0 / 3.0, 0.7]);
        c.scores = vec![Some(0.25), None, Some(f64::INFINITY)];
        c.fallback = vec![Some(true), Some(false), None];
        c.probe_acc = vec![Some(0.123456789012345), None, Some(0.5)];
        c.seeds = Seeds::new(1, 4, 9);
        let text = render_record(&c);
        let back = parse_record(&text, Path::new("x.tsv")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_lines() {
        let c = curve("d", "x", AlgorithmKind::Random, 0, vec![0.5, 0.6]);
        let text = render_record(&c);
        let broken = text.replace("\t0.6\t", "\tabc\t");
        let err = parse_record(&broken, Path::new("r.tsv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse_record("nonsense\n", Path::new("r.tsv")).is_err());
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let curves = vec![
            curve("a", "x", AlgorithmKind::Random, 0, vec![0.5]),
            curve("a", "x", AlgorithmKind::Random, 1, vec![0.6]),
            curve("a", "x", AlgorithmKind::Margin, 0, vec![0.7]),
        ];
        for c in &curves {
            write_record(dir.path(), c).unwrap();
        }
        let mut back = read_records(dir.path()).unwrap();
        back.sort_by_key(|c| (c.algorithm, c.restart));
        let mut want = curves.clone();
        want.sort_by_key(|c| (c.algorithm, c.restart));
        assert_eq!(back, want);
    }
}

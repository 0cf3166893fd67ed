//! Margin, entropy and BALD.

use super::{candidates, pick, AcquisitionContext, Selection};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::Mode;
use crate::rng::{fork, StreamRng};

/// Shannon entropy in nats; `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Best minus second-best probability per row.
pub fn margin_scores(probs: &Matrix) -> Vec<f64> {
    probs
        .iter_rows()
        .map(|row| {
            let (mut top1, mut top2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &v in row {
                if v > top1 {
                    top2 = top1;
                    top1 = v;
                } else if v > top2 {
                    top2 = v;
                }
            }
            if top2.is_finite() {
                top1 - top2
            } else {
                top1
            }
        })
        .collect()
}

pub fn entropy_scores(probs: &Matrix) -> Vec<f64> {
    probs.iter_rows().map(entropy).collect()
}

/// `H(mean prediction) - mean H(prediction)` per row over stochastic passes.
pub fn mutual_information(passes: &[Matrix]) -> Vec<f64> {
    let Some(first) = passes.first() else {
        return Vec::new();
    };
    let t = passes.len() as f64;
    (0..first.rows())
        .map(|r| {
            let mut mean = vec![0.0; first.cols()];
            let mut mean_h = 0.0;
            for pass in passes {
                let row = pass.row(r);
                for (m, &v) in mean.iter_mut().zip(row) {
                    *m += v / t;
                }
                mean_h += entropy(row) / t;
            }
            entropy(&mean) - mean_h
        })
        .collect()
}

fn candidate_probs(
    ctx: &AcquisitionContext<'_>,
    subsample: usize,
    rng: &mut StreamRng,
) -> Result<(Vec<usize>, Matrix)> {
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let cands = candidates(ctx.unlabeled, subsample, rng);
    let probs = ctx.classifier.predict_proba(&ctx.pool.select_rows(&cands))?;
    Ok((cands, probs))
}

pub fn acquire_margin(
    ctx: &AcquisitionContext<'_>,
    subsample: usize,
    rng: &mut StreamRng,
) -> Result<Selection> {
    let (cands, probs) = candidate_probs(ctx, subsample, rng)?;
    pick(&cands, &margin_scores(&probs), false)
}

pub fn acquire_entropy(
    ctx: &AcquisitionContext<'_>,
    subsample: usize,
    rng: &mut StreamRng,
) -> Result<Selection> {
    let (cands, probs) = candidate_probs(ctx, subsample, rng)?;
    pick(&cands, &entropy_scores(&probs), true)
}

/// Monte-Carlo dropout BALD. Masks come from a child of the algorithm
/// stream so scoring never touches the training streams.
pub fn acquire_bald(
    ctx: &AcquisitionContext<'_>,
    trials: usize,
    subsample: usize,
    rng: &mut StreamRng,
) -> Result<Selection> {
    if ctx.unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    if trials == 0 {
        return Err(Error::config("BALD needs at least one dropout trial"));
    }
    let cands = candidates(ctx.unlabeled, subsample, rng);
    let x = ctx.pool.select_rows(&cands);
    let mut masks = fork(rng, "bald-masks");
    let passes = (0..trials)
        .map(|_| ctx.classifier.forward(&x, Mode::Dropout(&mut masks)))
        .collect::<Result<Vec<_>>>()?;
    pick(&cands, &mutual_information(&passes), true)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::model::{Classifier, ClassifierSpec};
    use crate::rng::stream_from;

    #[test]
    fn margin_prefers_smaller_gap() {
        let p = Matrix::from_rows(&[[0.9, 0.1], [0.55, 0.45]]).unwrap();
        let s = margin_scores(&p);
        assert!((s[0] - 0.8).abs() < 1e-12 && (s[1] - 0.1).abs() < 1e-12);
        let sel = pick(&[0, 1], &s, false).unwrap();
        assert_eq!(sel.index, 1);
    }

    #[test]
    fn margin_on_model_picks_uniform_row_and_lowest_tie() {
        // logits = [0, x]: x = 0 gives the uniform row
        let m = linear(vec![0.0, 1.0], vec![0.0, 0.0], 1, 2);
        let pool = Matrix::from_rows(&[[3.0], [0.0], [-2.0], [0.0]]).unwrap();
        let fx = Fixture::new(pool, vec![0], vec![1], m);
        let sel = acquire_margin(&fx.ctx(), 8000, &mut stream_from(1, "a")).unwrap();
        assert_eq!(sel.index, 1);
        assert_eq!(sel.score, Some(0.0));
    }

    #[test]
    fn entropy_examples() {
        let p = Matrix::from_rows(&[[0.5, 0.5], [0.9, 0.1]]).unwrap();
        assert_eq!(pick(&[0, 1], &entropy_scores(&p), true).unwrap().index, 0);
        let onehot = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.98, 0.01, 0.01]]).unwrap();
        assert_eq!(entropy_scores(&onehot)[0], 0.0);
        assert_eq!(pick(&[0, 1], &entropy_scores(&onehot), true).unwrap().index, 1);
    }

    #[test]
    fn entropy_three_class_brute_force() {
        let rows = [[0.2, 0.3, 0.5], [0.7, 0.2, 0.1], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
        let p = Matrix::from_rows(&rows).unwrap();
        let got = entropy_scores(&p);
        for (row, g) in rows.iter().zip(got) {
            let mut h = 0.0;
            for v in row {
                h -= v * v.ln();
            }
            assert!((h - g).abs() < 1e-12);
        }
        assert!((entropy(&rows[2]) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_extremes() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.6, 0.4]]).unwrap();
        let b = Matrix::from_rows(&[[0.0, 1.0], [0.6, 0.4]]).unwrap();
        let mi = mutual_information(&[a, b]);
        assert!((mi[0] - 2f64.ln()).abs() < 1e-12);
        assert!(mi[1].abs() < 1e-12);
    }

    #[test]
    fn bald_without_dropout_scores_zero_and_takes_lowest() {
        let m = linear(vec![0.3, -0.7], vec![0.1, 0.0], 1, 2);
        let pool = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
        let fx = Fixture::new(pool, vec![0], vec![0], m);
        let sel = acquire_bald(&fx.ctx(), 5, 100, &mut stream_from(1, "a")).unwrap();
        assert_eq!(sel.index, 1);
        assert!(sel.score.unwrap().abs() < 1e-12);
    }

    #[test]
    fn bald_with_dropout_is_deterministic_per_stream() {
        let spec = ClassifierSpec {
            input_dim: 2,
            n_classes: 3,
            hidden: vec![8],
            dropout: 0.3,
        };
        let m = Classifier::init(&spec, &mut stream_from(5, "m")).unwrap();
        let rows: Vec<[f64; 2]> = (0..15).map(|i| [i as f64 / 15.0, 1.0 - i as f64 / 30.0]).collect();
        let fx = Fixture::new(Matrix::from_rows(&rows).unwrap(), vec![0], vec![0], m);
        let a = acquire_bald(&fx.ctx(), 5, 100, &mut stream_from(2, "a")).unwrap();
        let b = acquire_bald(&fx.ctx(), 5, 100, &mut stream_from(2, "a")).unwrap();
        assert_eq!(a, b);
        assert!(a.score.unwrap() > 0.0);
    }
}

//! Classification, annotation and retrieval metrics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::annotation::top_k;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mean_class_accuracy: f64,
    pub overall_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_measure: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_average_precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_rank: Option<f64>,
    /// `confusion[truth][prediction]` counts.
    pub confusion: Vec<Vec<usize>>,
}

/// Optional annotation and retrieval inputs for [`compute_metrics`].
#[derive(Clone, Debug, Default)]
pub struct RankingContext {
    /// Instance-by-attribute scores with matching binary ground truth.
    pub annotation: Option<(DMatrix<f64>, DMatrix<f64>)>,
    /// 1-based ranks of the true item in a set of retrieval queries.
    pub ranks: Vec<usize>,
}

pub fn confusion_matrix(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::InvalidArgument(format!("class index out of range ({p}, {t})")));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Unweighted mean of per-class recalls. Every class must occur in `truth`.
pub fn mean_class_accuracy(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let m = confusion_matrix(pred, truth, n_classes)?;
    let mut acc = 0.0;
    for (c, row) in m.iter().enumerate() {
        let n: usize = row.iter().sum();
        if n == 0 {
            return Err(Error::ClassAbsent(c.to_string()));
        }
        acc += row[c] as f64 / n as f64;
    }
    Ok(acc / n_classes as f64)
}

pub fn overall_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch("predictions vs truth".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

fn relevant(truth: &DMatrix<f64>, r: usize) -> Vec<bool> {
    truth.row(r).iter().map(|&v| v > 0.5).collect()
}

fn check_annotation_shapes(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<()> {
    if scores.shape() != truth.shape() {
        return Err(Error::DimensionMismatch(format!(
            "scores {:?} vs truth {:?}",
            scores.shape(),
            truth.shape()
        )));
    }
    if truth.nrows() == 0 {
        return Err(Error::EmptyTruth);
    }
    Ok(())
}

/// Micro F-measure of per-instance top-k lists, with `k` the instance's true
/// attribute count.
pub fn f_measure(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_annotation_shapes(scores, truth)?;
    let (mut tp, mut predicted, mut actual) = (0usize, 0usize, 0usize);
    for r in 0..scores.nrows() {
        let rel = relevant(truth, r);
        let k = rel.iter().filter(|&&b| b).count();
        let s: Vec<f64> = scores.row(r).iter().copied().collect();
        let top = top_k(&s, k);
        tp += top.iter().filter(|&&a| rel[a]).count();
        predicted += top.len();
        actual += k;
    }
    if actual == 0 {
        return Err(Error::EmptyTruth);
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / predicted as f64;
    let recall = tp as f64 / actual as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Mean over instances with at least one relevant attribute of the average
/// precision of the score ranking.
pub fn mean_average_precision(scores: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_annotation_shapes(scores, truth)?;
    let mut total = 0.0;
    let mut count = 0;
    for r in 0..scores.nrows() {
        let rel = relevant(truth, r);
        let n_rel = rel.iter().filter(|&&b| b).count();
        if n_rel == 0 {
            continue;
        }
        let s: Vec<f64> = scores.row(r).iter().copied().collect();
        let order = top_k(&s, s.len());
        let mut hits = 0;
        let mut ap = 0.0;
        for (pos, &a) in order.iter().enumerate() {
            if rel[a] {
                hits += 1;
                ap += hits as f64 / (pos + 1) as f64;
            }
        }
        total += ap / n_rel as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyTruth);
    }
    Ok(total / count as f64)
}

pub fn average_rank(ranks: &[usize]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::EmptyTruth);
    }
    Ok(ranks.iter().sum::<usize>() as f64 / ranks.len() as f64)
}

pub fn compute_metrics(
    pred: &[usize],
    truth: &[usize],
    n_classes: usize,
    ranking: Option<&RankingContext>,
) -> Result<MetricsReport> {
    let mean_class_accuracy = mean_class_accuracy(pred, truth, n_classes)?;
    let overall_accuracy = overall_accuracy(pred, truth)?;
    let confusion = confusion_matrix(pred, truth, n_classes)?;
    let (mut f, mut map, mut rank) = (None, None, None);
    if let Some(ctx) = ranking {
        if let Some((scores, truth)) = &ctx.annotation {
            f = Some(f_measure(scores, truth)?);
            map = Some(mean_average_precision(scores, truth)?);
        }
        if !ctx.ranks.is_empty() {
            rank = Some(average_rank(&ctx.ranks)?);
        }
    }
    Ok(MetricsReport {
        mean_class_accuracy,
        overall_accuracy,
        f_measure: f,
        mean_average_precision: map,
        average_rank: rank,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let truth = [0, 1, 1, 2];
        let scores = DMatrix::from_row_slice(2, 3, &[0.9, 0.1, 0.8, 0.2, 0.7, 0.1]);
        let labels = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let ctx = RankingContext {
            annotation: Some((scores, labels)),
            ranks: vec![1, 1],
        };
        let r = compute_metrics(&truth, &truth, 3, Some(&ctx)).unwrap();
        assert_eq!(r.mean_class_accuracy, 1.0);
        assert_eq!(r.overall_accuracy, 1.0);
        assert_eq!(r.f_measure, Some(1.0));
        assert_eq!(r.mean_average_precision, Some(1.0));
        assert_eq!(r.average_rank, Some(1.0));
    }

    #[test]
    fn two_class_arithmetic() {
        let truth = [0, 0, 1, 1];
        let pred = [0, 0, 0, 0];
        assert_eq!(mean_class_accuracy(&pred, &truth, 2).unwrap(), 0.5);
        assert_eq!(overall_accuracy(&pred, &truth).unwrap(), 0.5);
        assert_eq!(confusion_matrix(&pred, &truth, 2).unwrap(), vec![vec![2, 0], vec![2, 0]]);
    }

    #[test]
    fn constant_rank() {
        assert_eq!(average_rank(&[3; 10]).unwrap(), 3.0);
    }

    #[test]
    fn empty_and_absent() {
        assert!(matches!(mean_class_accuracy(&[], &[], 2), Err(Error::EmptyTruth)));
        assert!(matches!(mean_class_accuracy(&[0], &[0], 2), Err(Error::ClassAbsent(_))));
    }

    #[test]
    fn average_precision_by_hand() {
        // ranking 0,1,2,3 with relevant {0,2}: (1/1 + 2/3) / 2
        let scores = DMatrix::from_row_slice(1, 4, &[0.9, 0.8, 0.7, 0.1]);
        let truth = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 1.0, 0.0]);
        let ap = mean_average_precision(&scores, &truth).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        // top-2 = {0,1}: one hit of two
        assert!((f_measure(&scores, &truth).unwrap() - 0.5).abs() < 1e-15);
    }

    fn naive_mean_class(pred: &[usize], truth: &[usize], c: usize) -> f64 {
        let mut total = 0.0;
        for class in 0..c {
            let mut n = 0;
            let mut hit = 0;
            for k in 0..truth.len() {
                if truth[k] == class {
                    n += 1;
                    if pred[k] == class {
                        hit += 1;
                    }
                }
            }
            total += hit as f64 / n as f64;
        }
        total / c as f64
    }

    fn naive_ap(scores: &[f64], rel: &[bool]) -> f64 {
        // precision at the position of each relevant item, positions counted
        // by how many items outrank it
        let n_rel = rel.iter().filter(|&&b| b).count() as f64;
        let mut total = 0.0;
        for i in 0..scores.len() {
            if !rel[i] {
                continue;
            }
            let outrank = |j: usize| scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
            let pos = (0..scores.len()).filter(|&j| outrank(j)).count() + 1;
            let rel_above = (0..scores.len()).filter(|&j| rel[j] && outrank(j)).count() + 1;
            total += rel_above as f64 / pos as f64;
        }
        total / n_rel
    }

    proptest! {
        #[test]
        fn mean_class_matches_naive(truth in proptest::collection::vec(0usize..4, 4..100), seed in 0usize..1000) {
            let mut truth = truth;
            truth[..4].copy_from_slice(&[0, 1, 2, 3]);
            let pred: Vec<usize> = truth.iter().enumerate().map(|(k, &t)| if (k * 7 + seed) % 3 == 0 { (t + 1) % 4 } else { t }).collect();
            let got = mean_class_accuracy(&pred, &truth, 4).unwrap();
            prop_assert!((got - naive_mean_class(&pred, &truth, 4)).abs() < 1e-12);
        }

        #[test]
        fn map_matches_naive(rows in proptest::collection::vec(proptest::collection::vec((0.0f64..1.0, any::<bool>()), 6), 1..20)) {
            let n = rows.len();
            let scores = DMatrix::from_fn(n, 6, |r, c| rows[r][c].0);
            let truth = DMatrix::from_fn(n, 6, |r, c| if rows[r][c].1 { 1.0 } else { 0.0 });
            let mut total = 0.0;
            let mut count = 0;
            for r in 0..n {
                let rel: Vec<bool> = rows[r].iter().map(|x| x.1).collect();
                if rel.iter().any(|&b| b) {
                    let s: Vec<f64> = rows[r].iter().map(|x| x.0).collect();
                    total += naive_ap(&s, &rel);
                    count += 1;
                }
            }
            match mean_average_precision(&scores, &truth) {
                Ok(v) => prop_assert!((v - total / count as f64).abs() < 1e-12),
                Err(_) => prop_assert_eq!(count, 0),
            }
        }
    }
}

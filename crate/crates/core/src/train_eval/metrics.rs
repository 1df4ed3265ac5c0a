use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Examples whose true label is this class.
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// Unweighted mean of per-class F1 over every class, absent ones included.
    pub macro_f: f64,
    pub per_class: Vec<ClassScores>,
    pub n: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate_metrics(predictions: &[usize], labels: &[usize], num_classes: usize) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Dimension("no examples to score".into()));
    }
    if let Some(c) = predictions.iter().chain(labels).find(|&&c| c >= num_classes) {
        return Err(Error::Data(format!("class {c} outside {num_classes} classes")));
    }
    // confusion[truth][pred]
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        confusion[y][p] += 1;
    }
    let mut per_class = Vec::with_capacity(num_classes);
    let mut correct = 0;
    for c in 0..num_classes {
        let tp = confusion[c][c];
        correct += tp;
        let predicted: usize = (0..num_classes).map(|t| confusion[t][c]).sum();
        let actual: usize = confusion[c].iter().sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassScores {
            precision,
            recall,
            f1,
            support: actual,
        });
    }
    Ok(Metrics {
        accuracy: ratio(correct, labels.len()),
        macro_f: per_class.iter().map(|s| s.f1).sum::<f64>() / num_classes as f64,
        per_class,
        n: labels.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let m = evaluate_metrics(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!((m.accuracy, m.macro_f, m.n), (1.0, 1.0, 4));
    }

    #[test]
    fn mismatched_lengths() {
        assert!(matches!(evaluate_metrics(&[0], &[0, 1], 2), Err(Error::Dimension(_))));
        assert!(evaluate_metrics(&[], &[], 2).is_err());
        assert!(matches!(evaluate_metrics(&[3], &[0], 2), Err(Error::Data(_))));
    }
}

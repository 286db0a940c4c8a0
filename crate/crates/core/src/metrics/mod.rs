//! Confusion-matrix rates, calibration and balance metrics, and
//! permutation importance.
//!
//! The positive class is Direct Admit. Rates with a zero denominator are
//! `None` ("undefined") and never silently reported as zero.

mod fairness;
mod importance;

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

pub use fairness::{balance_neg, balance_pos, group_metrics, BalanceConditioning, GroupMetrics, SubgroupMetrics};
pub use importance::{permutation_importance, ImportanceTable};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub(crate) fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(AuditError::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

pub fn confusion(y_true: &[bool], y_pred: &[bool]) -> Result<ConfusionMatrix> {
    check_len(y_true.len(), y_pred.len())?;
    if y_true.is_empty() {
        return Err(AuditError::InvalidArgument("confusion matrix of no records".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub accuracy: Option<f64>,
    /// `tn / (tn + fp)`; lower means more applicants incorrectly admitted.
    pub specificity: Option<f64>,
    /// `tp / (tp + fn)`; lower means more applicants incorrectly denied.
    pub sensitivity: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn rates(cm: &ConfusionMatrix) -> Rates {
    Rates {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        sensitivity: ratio(cm.tp, cm.tp + cm.fn_),
    }
}

pub fn accuracy(y_true: &[bool], y_pred: &[bool]) -> Result<f64> {
    Ok(rates(&confusion(y_true, y_pred)?).accuracy.unwrap_or(0.0))
}

/// Mean squared difference between probabilities and 0/1 labels.
pub fn brier(probs: &[f64], y_true: &[bool]) -> Result<f64> {
    check_len(probs.len(), y_true.len())?;
    if probs.is_empty() {
        return Err(AuditError::InvalidArgument("Brier score of no records".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(AuditError::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let sum: f64 = probs
        .iter()
        .zip(y_true)
        .map(|(&p, &y)| {
            let t = if y { 1.0 } else { 0.0 };
            (p - t) * (p - t)
        })
        .sum();
    Ok(sum / probs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[true, true, false, false], &[true, false, false, true]).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 1, fp: 1, tn: 1, fn_: 1 });
        let y = [true, false, true];
        let cm = confusion(&y, &y).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
        assert!(confusion(&[true], &[]).is_err());
    }

    #[test]
    fn confusion_is_additive() {
        let (a_t, a_p) = ([true, false, true], [true, true, false]);
        let (b_t, b_p) = ([false, false], [false, true]);
        let joined_t: Vec<bool> = a_t.iter().chain(&b_t).copied().collect();
        let joined_p: Vec<bool> = a_p.iter().chain(&b_p).copied().collect();
        assert_eq!(
            confusion(&joined_t, &joined_p).unwrap(),
            confusion(&a_t, &a_p).unwrap() + confusion(&b_t, &b_p).unwrap()
        );
    }

    #[test]
    fn rate_formulas() {
        let r = rates(&ConfusionMatrix { tp: 2, fp: 1, tn: 3, fn_: 0 });
        assert_eq!(r.specificity, Some(0.75));
        let r = rates(&ConfusionMatrix { tp: 0, fp: 1, tn: 3, fn_: 0 });
        assert_eq!(r.sensitivity, None);
        let y = [true, false, false, true];
        let r = rates(&confusion(&y, &y).unwrap());
        assert_eq!((r.accuracy, r.specificity, r.sensitivity), (Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn sensitivity_reading() {
        // A sensitivity of .893 means 10.7% of true admits are predicted as denials.
        let cm = ConfusionMatrix { tp: 893, fp: 0, tn: 0, fn_: 107 };
        let s = rates(&cm).sensitivity.unwrap();
        assert!((s - 0.893).abs() < 1e-12);
        assert!((1.0 - s - 0.107).abs() < 1e-12);
    }

    #[test]
    fn brier_values() {
        assert_eq!(brier(&[1.0, 0.0], &[true, false]).unwrap(), 0.0);
        assert_eq!(brier(&[0.5, 0.5, 0.5], &[true, false, false]).unwrap(), 0.25);
        assert!((brier(&[0.9, 0.2], &[true, false]).unwrap() - 0.025).abs() < 1e-15);
        assert!(brier(&[], &[]).is_err());
        assert!(brier(&[1.5], &[true]).is_err());
    }
}

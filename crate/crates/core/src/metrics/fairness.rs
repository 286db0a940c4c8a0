use serde::{Deserialize, Serialize};

use super::{brier, check_len, confusion, rates, ConfusionMatrix};
use crate::error::Result;

/// Which labels select the records a balance metric averages over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceConditioning {
    /// Records the model predicts as negative / positive.
    #[default]
    Predicted,
    /// Records whose true label is negative / positive.
    True,
}

fn subgroup_mean(values: impl Iterator<Item = (f64, bool)>) -> (Option<f64>, Option<f64>) {
    let (mut sa, mut na, mut sb, mut nb) = (0.0, 0usize, 0.0, 0usize);
    for (v, in_a) in values {
        if in_a {
            sa += v;
            na += 1;
        } else {
            sb += v;
            nb += 1;
        }
    }
    (
        (na > 0).then(|| sa / na as f64),
        (nb > 0).then(|| sb / nb as f64),
    )
}

/// Per-subgroup mean confidence in the negative call, `1 - prob`, over
/// records whose `labels` entry is negative. Returns `(group A, group B)`;
/// an empty selection is `None`.
pub fn balance_neg(probs: &[f64], labels: &[bool], mask: &[bool]) -> Result<(Option<f64>, Option<f64>)> {
    check_len(probs.len(), labels.len())?;
    check_len(probs.len(), mask.len())?;
    Ok(subgroup_mean(
        probs
            .iter()
            .zip(labels)
            .zip(mask)
            .filter(|((_, &l), _)| !l)
            .map(|((&p, _), &m)| (1.0 - p, m)),
    ))
}

/// Per-subgroup mean probability over records whose `labels` entry is
/// positive.
pub fn balance_pos(probs: &[f64], labels: &[bool], mask: &[bool]) -> Result<(Option<f64>, Option<f64>)> {
    check_len(probs.len(), labels.len())?;
    check_len(probs.len(), mask.len())?;
    Ok(subgroup_mean(
        probs
            .iter()
            .zip(labels)
            .zip(mask)
            .filter(|((_, &l), _)| l)
            .map(|((&p, _), &m)| (p, m)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgroupMetrics {
    pub n: u64,
    pub confusion: ConfusionMatrix,
    pub accuracy: Option<f64>,
    pub specificity: Option<f64>,
    pub sensitivity: Option<f64>,
    pub brier: Option<f64>,
    pub balance_neg: Option<f64>,
    pub balance_pos: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub overall: SubgroupMetrics,
    pub group_a: SubgroupMetrics,
    pub group_b: SubgroupMetrics,
}

fn subgroup(
    y_true: &[bool],
    y_pred: &[bool],
    probs: &[f64],
    cond: &[bool],
    keep: impl Fn(usize) -> bool,
) -> Result<SubgroupMetrics> {
    let idx: Vec<usize> = (0..y_true.len()).filter(|&i| keep(i)).collect();
    let t: Vec<bool> = idx.iter().map(|&i| y_true[i]).collect();
    let p: Vec<bool> = idx.iter().map(|&i| y_pred[i]).collect();
    let pr: Vec<f64> = idx.iter().map(|&i| probs[i]).collect();
    let c: Vec<bool> = idx.iter().map(|&i| cond[i]).collect();
    let all = vec![true; idx.len()];
    let (cm, r, br) = if idx.is_empty() {
        (ConfusionMatrix::default(), rates(&ConfusionMatrix::default()), None)
    } else {
        let cm = confusion(&t, &p)?;
        (cm, rates(&cm), Some(brier(&pr, &t)?))
    };
    Ok(SubgroupMetrics {
        n: idx.len() as u64,
        confusion: cm,
        accuracy: r.accuracy,
        specificity: r.specificity,
        sensitivity: r.sensitivity,
        brier: br,
        balance_neg: balance_neg(&pr, &c, &all)?.0,
        balance_pos: balance_pos(&pr, &c, &all)?.0,
    })
}

/// Every metric computed overall and for each side of `mask`
/// (`true` = group A).
pub fn group_metrics(
    y_true: &[bool],
    y_pred: &[bool],
    probs: &[f64],
    mask: &[bool],
    conditioning: BalanceConditioning,
) -> Result<GroupMetrics> {
    check_len(y_true.len(), y_pred.len())?;
    check_len(y_true.len(), probs.len())?;
    check_len(y_true.len(), mask.len())?;
    let cond = match conditioning {
        BalanceConditioning::Predicted => y_pred,
        BalanceConditioning::True => y_true,
    };
    Ok(GroupMetrics {
        overall: subgroup(y_true, y_pred, probs, cond, |_| true)?,
        group_a: subgroup(y_true, y_pred, probs, cond, |i| mask[i])?,
        group_b: subgroup(y_true, y_pred, probs, cond, |i| !mask[i])?,
    })
}

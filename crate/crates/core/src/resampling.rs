//! Proportionate stratified splitting and stratified k-fold assignment.
//!
//! Both operations work on a boolean stratum mask (`true` = group A). The
//! table-level wrappers derive the mask from a [`SensitiveVariable`].

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cohort::{ApplicantRecord, ApplicantTable, SensitiveVariable};
use crate::error::{AuditError, Result};
use crate::seed;

pub const DEFAULT_TRAIN_FRACTION: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub strat_var: SensitiveVariable,
    pub seed: u64,
}

impl SplitPlan {
    pub fn new(strat_var: SensitiveVariable, seed: u64) -> Self {
        SplitPlan {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            strat_var,
            seed,
        }
    }
}

/// A named stratum: its label and member indices in table order.
struct Stratum<'a> {
    name: &'a str,
    members: Vec<usize>,
}

fn strata<'a>(mask: &[bool], names: [&'a str; 2]) -> Vec<Stratum<'a>> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            a.push(i);
        } else {
            b.push(i);
        }
    }
    let mut out = vec![
        Stratum { name: names[0], members: a },
        Stratum { name: names[1], members: b },
    ];
    out.sort_by(|x, y| x.name.cmp(y.name));
    out.retain(|s| !s.members.is_empty());
    out
}

/// Per-stratum training quotas by the largest-remainder rule. The total is
/// `round(fraction * sum(sizes))`; ties on the remainder go to the stratum
/// listed first. Every quota is clamped to `[1, size - 1]`.
pub fn largest_remainder_quotas(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (fraction * total as f64).round() as usize;
    let exact: Vec<f64> = sizes.iter().map(|&s| fraction * s as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = exact[i] - exact[i].floor();
        let rj = exact[j] - exact[j].floor();
        rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().take(target.saturating_sub(assigned)) {
        quotas[i] += 1;
    }
    for (q, &s) in quotas.iter_mut().zip(sizes) {
        if s >= 2 {
            *q = (*q).clamp(1, s - 1);
        }
    }
    quotas
}

/// Splits row indices into (train, test), both in ascending order.
pub fn stratified_split_indices(
    mask: &[bool],
    train_fraction: f64,
    seed: u64,
    names: [&str; 2],
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(AuditError::config("train_fraction", "must lie in (0, 1)"));
    }
    let strata = strata(mask, names);
    for s in &strata {
        if s.members.len() < 2 {
            return Err(AuditError::StratumTooSmall {
                stratum: s.name.to_string(),
                size: s.members.len(),
                required: 2,
            });
        }
    }
    let sizes: Vec<usize> = strata.iter().map(|s| s.members.len()).collect();
    let quotas = largest_remainder_quotas(&sizes, train_fraction);

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (k, (s, quota)) in strata.into_iter().zip(quotas).enumerate() {
        let mut members = s.members;
        let mut rng = seed::stream(seed, k as u64);
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..quota]);
        test.extend_from_slice(&members[quota..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(table: &[ApplicantRecord], plan: &SplitPlan) -> Result<(ApplicantTable, ApplicantTable)> {
    let mask = plan.strat_var.mask(table);
    let (train, test) = stratified_split_indices(
        &mask,
        plan.train_fraction,
        plan.seed,
        [plan.strat_var.group_a_label(), plan.strat_var.group_b_label()],
    )?;
    Ok((
        train.into_iter().map(|i| table[i].clone()).collect(),
        test.into_iter().map(|i| table[i].clone()).collect(),
    ))
}

/// Fold index per record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    /// (training indices, held-out indices) for `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut held = Vec::new();
        for (i, &f) in self.fold_of.iter().enumerate() {
            if f == fold {
                held.push(i);
            } else {
                train.push(i);
            }
        }
        (train, held)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment. Within each stratum fold sizes differ by
/// at most one; strata are dealt round-robin continuing where the previous
/// stratum stopped, so overall fold sizes are balanced too.
pub fn kfold_indices(mask: &[bool], k: usize, seed: u64, names: [&str; 2]) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(AuditError::config("k", "fold count must be at least 2"));
    }
    let strata = strata(mask, names);
    for s in &strata {
        if s.members.len() < k {
            return Err(AuditError::StratumTooSmall {
                stratum: s.name.to_string(),
                size: s.members.len(),
                required: k,
            });
        }
    }
    let mut fold_of = vec![0; mask.len()];
    let mut offset = 0;
    for (idx, s) in strata.into_iter().enumerate() {
        let mut members = s.members;
        let mut rng = seed::stream(seed, idx as u64);
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            fold_of[i] = (offset + pos) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldAssignment { k, fold_of })
}

pub fn kfold(table: &[ApplicantRecord], k: usize, strat_var: SensitiveVariable, seed: u64) -> Result<FoldAssignment> {
    kfold_indices(
        &strat_var.mask(table),
        k,
        seed,
        [strat_var.group_a_label(), strat_var.group_b_label()],
    )
}

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_len;
use crate::cohort::FeatureMatrix;
use crate::error::{AuditError, Result};
use crate::seed;
use crate::svm::LinearModel;

/// `(feature, importance)` pairs sorted by decreasing importance; ties keep
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub baseline_accuracy: f64,
    pub n_repeats: usize,
    pub entries: Vec<(String, f64)>,
}

impl ImportanceTable {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Mean accuracy drop when each encoded column is shuffled on its own.
/// One-hot levels are separate columns and are permuted separately.
pub fn permutation_importance(
    model: &LinearModel,
    x: &FeatureMatrix,
    y: &[bool],
    n_repeats: usize,
    seed: u64,
) -> Result<ImportanceTable> {
    if n_repeats == 0 {
        return Err(AuditError::config("n_repeats", "must be at least 1"));
    }
    check_len(x.n_rows, y.len())?;
    if model.weights.len() != x.n_cols {
        return Err(AuditError::DimensionMismatch {
            expected: model.weights.len(),
            found: x.n_cols,
        });
    }
    if x.n_rows == 0 {
        return Err(AuditError::InvalidArgument("permutation importance of no records".into()));
    }
    let scores = model.decisions(x)?;
    let n = x.n_rows as f64;
    let acc_of = |s: &mut dyn Iterator<Item = f64>| {
        s.zip(y).filter(|(s, &l)| (*s > 0.0) == l).count() as f64 / n
    };
    let baseline = acc_of(&mut scores.iter().copied());

    let importances: Vec<f64> = (0..x.n_cols)
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = x.column(j).collect();
            let w = model.weights[j];
            let mut perm: Vec<usize> = (0..x.n_rows).collect();
            let mut total = 0.0;
            for r in 0..n_repeats {
                let mut rng = seed::rng(seed::derive(seed::derive(seed, j as u64), r as u64));
                perm.shuffle(&mut rng);
                let mut permuted = scores
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s - w * col[i] + w * col[perm[i]]);
                total += acc_of(&mut permuted);
            }
            baseline - total / n_repeats as f64
        })
        .collect();

    let mut entries: Vec<(String, f64)> = x.column_names.iter().cloned().zip(importances).collect();
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ImportanceTable {
        baseline_accuracy: baseline,
        n_repeats,
        entries,
    })
}

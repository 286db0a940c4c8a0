use serde::{Deserialize, Serialize};

use super::{train, SvmConfig};
use crate::cohort::{ApplicantRecord, Concordance, FeatureEncoder, FeatureScenario, SensitiveVariable};
use crate::error::Result;
use crate::metrics::accuracy;
use crate::resampling::kfold;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub k: usize,
    pub mean_accuracy: f64,
    /// Population standard deviation of the per-fold accuracies.
    pub accuracy_stddev: f64,
    pub per_fold: Vec<f64>,
}

impl CvSummary {
    pub fn from_folds(per_fold: Vec<f64>) -> Self {
        let k = per_fold.len();
        let mean = per_fold.iter().sum::<f64>() / k as f64;
        let var = per_fold.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64;
        CvSummary {
            k,
            mean_accuracy: mean,
            accuracy_stddev: var.sqrt(),
            per_fold,
        }
    }

    /// `.NN (+/- .NN)`.
    pub fn report(&self) -> String {
        format_cv(self.mean_accuracy, self.accuracy_stddev)
    }
}

fn two_places(v: f64) -> String {
    let s = format!("{v:.2}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

pub fn format_cv(mean: f64, stddev: f64) -> String {
    format!("{} (+/- {})", two_places(mean), two_places(stddev))
}

/// k-fold cross-validated accuracy. Folds are stratified on `sensitive`;
/// each fold fits its own encoder on the training folds.
pub fn cross_validate(
    table: &[ApplicantRecord],
    scenario: FeatureScenario,
    sensitive: SensitiveVariable,
    k: usize,
    config: &SvmConfig,
    seed: u64,
    concordance: &Concordance,
) -> Result<CvSummary> {
    let eligible: Vec<ApplicantRecord> = table
        .iter()
        .filter(|r| scenario.admits(r, concordance))
        .cloned()
        .collect();
    let folds = kfold(&eligible, k, sensitive, seed)?;
    let mut per_fold = Vec::with_capacity(k);
    for fold in 0..k {
        let (train_idx, held_idx) = folds.split(fold);
        let train_rows: Vec<ApplicantRecord> = train_idx.iter().map(|&i| eligible[i].clone()).collect();
        let held_rows: Vec<ApplicantRecord> = held_idx.iter().map(|&i| eligible[i].clone()).collect();
        let encoder = FeatureEncoder::fit(&train_rows, scenario, sensitive, concordance)?;
        let xtr = encoder.transform(&train_rows);
        let xte = encoder.transform(&held_rows);
        let model = train(&xtr, config, seed::derive(seed, fold as u64 + 100))?;
        let pred = model.predict(&xte)?;
        per_fold.push(accuracy(&xte.labels, &pred)?);
    }
    Ok(CvSummary::from_folds(per_fold))
}

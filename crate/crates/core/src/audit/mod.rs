//! Snapshot and aggregate bias audits.
//!
//! A trial slices the cohort, draws a proportionate stratified split on the
//! sensitive variable, trains a calibrated linear SVM on the training part
//! and scores the held-out part overall and per subgroup. An aggregate
//! audit averages each metric over independent trials and flags metrics
//! whose subgroup means differ by more than the threshold.

mod grid;
mod policy;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohort::{slice_cohort, ApplicantRecord, CohortGroup, Concordance, FeatureEncoder, FeatureScenario, SensitiveVariable};
use crate::error::{AuditError, Result};
use crate::metrics::{group_metrics, BalanceConditioning, GroupMetrics, SubgroupMetrics};
use crate::resampling::{stratified_split, SplitPlan, DEFAULT_TRAIN_FRACTION};
use crate::seed;
use crate::svm::{cross_validate, train_calibrated, CvSummary, ModelDocument, SvmConfig};

pub use grid::{run_grid, AuditGrid, GridCell, GridEntry, FEATURE_UNAVAILABLE};
pub use policy::{policy_impact, PolicyImpact, PolicyThresholds, Quadrant, QuadrantCounts, ScatterPoint, ShareRow};

pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// `difference > threshold`. A difference equal to the threshold is not
/// flagged.
pub fn flag(difference: f64, threshold: f64) -> bool {
    difference > threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub svm: SvmConfig,
    pub train_fraction: f64,
    pub balance_conditioning: BalanceConditioning,
    /// Run k-fold cross-validation on the sliced cohort alongside the trials.
    pub cross_validation: bool,
    pub cv_folds: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            svm: SvmConfig::default(),
            train_fraction: DEFAULT_TRAIN_FRACTION,
            balance_conditioning: BalanceConditioning::Predicted,
            cross_validation: true,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSpec {
    pub group: CohortGroup,
    pub scenario: FeatureScenario,
    pub sensitive: SensitiveVariable,
    pub threshold: f64,
    /// 1 for a snapshot audit.
    pub n_trials: usize,
    pub master_seed: u64,
    pub model: ModelSettings,
}

impl AuditSpec {
    pub fn new(group: CohortGroup, scenario: FeatureScenario, sensitive: SensitiveVariable) -> Self {
        AuditSpec {
            group,
            scenario,
            sensitive,
            threshold: DEFAULT_THRESHOLD,
            n_trials: 1,
            master_seed: 0,
            model: ModelSettings::default(),
        }
    }

    pub fn with_trials(mut self, n_trials: usize) -> Self {
        self.n_trials = n_trials;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(AuditError::config("threshold", format!("{} not in (0, 1)", self.threshold)));
        }
        if self.n_trials == 0 {
            return Err(AuditError::config("n_trials", "must be at least 1"));
        }
        let f = self.model.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(AuditError::config("train_fraction", format!("{f} not in (0, 1)")));
        }
        if self.model.cross_validation && self.model.cv_folds < 2 {
            return Err(AuditError::config("cv_folds", "must be at least 2"));
        }
        self.model.svm.validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        seed::trial_seed(self.master_seed, trial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Accuracy,
    Specificity,
    Sensitivity,
    Brier,
    BalanceNeg,
    BalancePos,
}

impl MetricName {
    pub const ALL: [MetricName; 6] = [
        MetricName::Accuracy,
        MetricName::Specificity,
        MetricName::Sensitivity,
        MetricName::Brier,
        MetricName::BalanceNeg,
        MetricName::BalancePos,
    ];

    pub fn key(self) -> &'static str {
        match self {
            MetricName::Accuracy => "accuracy",
            MetricName::Specificity => "specificity",
            MetricName::Sensitivity => "sensitivity",
            MetricName::Brier => "brier",
            MetricName::BalanceNeg => "balance_neg",
            MetricName::BalancePos => "balance_pos",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            MetricName::Accuracy => "Model Accuracy",
            MetricName::Specificity => "Specificity",
            MetricName::Sensitivity => "Sensitivity",
            MetricName::Brier => "Brier Score",
            MetricName::BalanceNeg => "Balance for Neg Class",
            MetricName::BalancePos => "Balance for Pos Class",
        }
    }

    pub fn of(self, m: &SubgroupMetrics) -> Option<f64> {
        match self {
            MetricName::Accuracy => m.accuracy,
            MetricName::Specificity => m.specificity,
            MetricName::Sensitivity => m.sensitivity,
            MetricName::Brier => m.brier,
            MetricName::BalanceNeg => m.balance_neg,
            MetricName::BalancePos => m.balance_pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: GroupMetrics,
}

/// Means over the trials in which the metric is defined for both
/// subgroups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: MetricName,
    pub overall: Option<f64>,
    pub group_a: Option<f64>,
    pub group_b: Option<f64>,
    /// `|group_a - group_b|`.
    pub difference: Option<f64>,
    pub flagged: bool,
    pub trials_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedIncident {
    pub trial: usize,
    pub metric: MetricName,
    pub subgroup: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub spec: AuditSpec,
    pub group_a_label: String,
    pub group_b_label: String,
    /// Records in the sliced cohort.
    pub n_records: usize,
    /// Records dropped because the scenario's features are missing.
    pub n_excluded: usize,
    pub metrics: Vec<MetricSummary>,
    pub trials: Vec<TrialResult>,
    pub cross_validation: Option<CvSummary>,
    pub undefined: Vec<UndefinedIncident>,
    /// The calibrated model of trial 0.
    pub model: ModelDocument,
}

impl AuditReport {
    pub fn metric(&self, name: MetricName) -> &MetricSummary {
        self.metrics
            .iter()
            .find(|m| m.metric == name)
            .expect("every report carries all metrics")
    }

    pub fn any_flagged(&self) -> bool {
        self.metrics.iter().any(|m| m.flagged)
    }

    pub fn flagged(&self) -> Vec<MetricName> {
        self.metrics.iter().filter(|m| m.flagged).map(|m| m.metric).collect()
    }

    pub fn is_snapshot(&self) -> bool {
        self.spec.n_trials == 1
    }
}

/// Records of the sliced cohort that carry every feature the scenario uses.
pub fn eligible_records(
    table: &[ApplicantRecord],
    group: CohortGroup,
    scenario: FeatureScenario,
    concordance: &Concordance,
) -> (Vec<ApplicantRecord>, usize) {
    let sliced = slice_cohort(table, group);
    let n = sliced.len();
    let eligible: Vec<ApplicantRecord> = sliced.into_iter().filter(|r| scenario.admits(r, concordance)).collect();
    let excluded = n - eligible.len();
    (eligible, excluded)
}

/// One split, one calibrated model, metrics on the held-out part.
pub fn run_trial(
    eligible: &[ApplicantRecord],
    spec: &AuditSpec,
    trial: usize,
    concordance: &Concordance,
) -> Result<TrialResult> {
    Ok(trial_with_model(eligible, spec, trial, concordance)?.0)
}

fn trial_with_model(
    eligible: &[ApplicantRecord],
    spec: &AuditSpec,
    trial: usize,
    concordance: &Concordance,
) -> Result<(TrialResult, ModelDocument)> {
    let s = spec.trial_seed(trial);
    let plan = SplitPlan {
        train_fraction: spec.model.train_fraction,
        strat_var: spec.sensitive,
        seed: seed::derive(s, 0),
    };
    let (train_rows, test_rows) = stratified_split(eligible, &plan)?;
    let encoder = FeatureEncoder::fit(&train_rows, spec.scenario, spec.sensitive, concordance)?;
    let xtr = encoder.transform(&train_rows);
    let xte = encoder.transform(&test_rows);
    let model = train_calibrated(&xtr, &spec.model.svm, seed::derive(s, 1))?;
    let probs = model.probabilities(&xte)?;
    let preds = model.predict(&xte)?;
    let metrics = group_metrics(&xte.labels, &preds, &probs, &xte.subgroup_mask, spec.model.balance_conditioning)?;
    let trial = TrialResult {
        trial,
        seed: s,
        n_train: xtr.n_rows,
        n_test: xte.n_rows,
        metrics,
    };
    Ok((trial, model.to_document(&encoder.scales())))
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Per-metric subgroup means and flags. Trials are ordered by index first,
/// so the result does not depend on the order they arrive in.
pub fn summarize(trials: &mut [TrialResult], threshold: f64) -> (Vec<MetricSummary>, Vec<UndefinedIncident>) {
    trials.sort_by_key(|t| t.trial);
    let mut incidents = Vec::new();
    let summaries = MetricName::ALL
        .iter()
        .map(|&metric| {
            let (mut overall, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
            for t in trials.iter() {
                let va = metric.of(&t.metrics.group_a);
                let vb = metric.of(&t.metrics.group_b);
                for (v, side) in [(va, "group_a"), (vb, "group_b")] {
                    if v.is_none() {
                        incidents.push(UndefinedIncident {
                            trial: t.trial,
                            metric,
                            subgroup: side.to_string(),
                        });
                    }
                }
                if let (Some(va), Some(vb)) = (va, vb) {
                    a.push(va);
                    b.push(vb);
                    if let Some(vo) = metric.of(&t.metrics.overall) {
                        overall.push(vo);
                    }
                }
            }
            let (ma, mb) = (mean(&a), mean(&b));
            let difference = ma.zip(mb).map(|(x, y)| (x - y).abs());
            MetricSummary {
                metric,
                overall: mean(&overall),
                group_a: ma,
                group_b: mb,
                difference,
                flagged: difference.is_some_and(|d| flag(d, threshold)),
                trials_used: a.len(),
            }
        })
        .collect();
    (summaries, incidents)
}

/// Runs `spec.n_trials` independent trials. Trials execute on the current
/// rayon pool; the report does not depend on the pool size.
pub fn aggregate_audit(table: &[ApplicantRecord], spec: &AuditSpec, concordance: &Concordance) -> Result<AuditReport> {
    spec.validate()?;
    let n_records = slice_cohort(table, spec.group).len();
    let (eligible, n_excluded) = eligible_records(table, spec.group, spec.scenario, concordance);
    if eligible.is_empty() {
        return Err(AuditError::AllRecordsExcluded(format!(
            "{} / {}",
            spec.group.slug(),
            spec.scenario.slug()
        )));
    }
    let mut outcomes: Vec<(TrialResult, ModelDocument)> = (0..spec.n_trials)
        .into_par_iter()
        .map(|t| trial_with_model(&eligible, spec, t, concordance))
        .collect::<Result<_>>()?;
    let model = outcomes[0].1.clone();
    let mut trials: Vec<TrialResult> = outcomes.drain(..).map(|(t, _)| t).collect();
    let (metrics, undefined) = summarize(&mut trials, spec.threshold);
    let cross_validation = if spec.model.cross_validation {
        Some(cross_validate(
            &eligible,
            spec.scenario,
            spec.sensitive,
            spec.model.cv_folds,
            &spec.model.svm,
            seed::derive(spec.master_seed, u64::MAX),
            concordance,
        )?)
    } else {
        None
    };
    Ok(AuditReport {
        spec: spec.clone(),
        group_a_label: spec.sensitive.group_a_label().to_string(),
        group_b_label: spec.sensitive.group_b_label().to_string(),
        n_records,
        n_excluded,
        metrics,
        trials,
        cross_validation,
        undefined,
        model,
    })
}

/// A single-split audit. `spec.n_trials` must be 1.
pub fn snapshot_audit(table: &[ApplicantRecord], spec: &AuditSpec, concordance: &Concordance) -> Result<AuditReport> {
    if spec.n_trials != 1 {
        return Err(AuditError::config("n_trials", "a snapshot audit runs exactly one trial"));
    }
    aggregate_audit(table, spec, concordance)
}

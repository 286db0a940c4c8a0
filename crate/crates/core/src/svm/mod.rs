//! Linear SVM: training, scoring, probability calibration and
//! cross-validated accuracy.

mod cv;
mod dual_cd;
mod platt;

use serde::{Deserialize, Serialize};

use crate::cohort::{FeatureMatrix, NumericScale};
use crate::error::{AuditError, Result};

pub use cv::{cross_validate, format_cv, CvSummary};
pub use dual_cd::{dual_objective, kkt_violation, primal_objective, train, train_traced, EpochStats, Training};
pub use platt::{calibrate, fit_platt, platt_probability, train_calibrated, PlattParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// Regularization strength C.
    pub c: f64,
    /// Stopping tolerance on the largest projected-gradient violation.
    pub tol: f64,
    /// Maximum number of epochs over the data.
    pub max_iter: usize,
    /// Folds used to produce out-of-fold scores for calibration.
    pub calibration_folds: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tol: 1e-4,
            max_iter: 1000,
            calibration_folds: 3,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(AuditError::config("c", "must be a positive finite number"));
        }
        if !(self.tol > 0.0) {
            return Err(AuditError::config("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(AuditError::config("max_iter", "must be at least 1"));
        }
        if self.calibration_folds < 2 {
            return Err(AuditError::config("calibration_folds", "must be at least 2"));
        }
        Ok(())
    }
}

/// Trained linear decision function `w·x + b`.
///
/// The intercept is learned as the weight of a constant unit feature, so it
/// is regularized together with `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub column_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub training_objective: f64,
}

impl LinearModel {
    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.weights.len() {
            return Err(AuditError::DimensionMismatch {
                expected: self.weights.len(),
                found: len,
            });
        }
        Ok(())
    }

    /// Raw score without dimension checks.
    #[inline]
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.score(x))
    }

    pub fn decisions(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_dim(x.n_cols)?;
        Ok(x.rows().map(|row| self.score(row)).collect())
    }

    /// Predicted admit labels; a score of exactly zero is a negative.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<bool>> {
        Ok(self.decisions(x)?.into_iter().map(|s| s > 0.0).collect())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A linear model plus Platt parameters:
/// `P(admit | x) = 1 / (1 + exp(platt_a * score(x) + platt_b))` with
/// `platt_a < 0`, so probability increases with the decision score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedModel {
    pub base: LinearModel,
    pub platt_a: f64,
    pub platt_b: f64,
}

impl CalibratedModel {
    pub fn probability_of_score(&self, score: f64) -> f64 {
        platt_probability(score, self.platt_a, self.platt_b)
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        Ok(self.probability_of_score(self.base.decision(x)?))
    }

    pub fn probabilities(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self
            .base
            .decisions(x)?
            .into_iter()
            .map(|s| self.probability_of_score(s))
            .collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<bool>> {
        self.base.predict(x)
    }

    pub fn to_document(&self, scales: &[Option<NumericScale>]) -> ModelDocument {
        ModelDocument {
            column_names: self.base.column_names.clone(),
            weights: self.base.weights.clone(),
            intercept: self.base.intercept,
            c: self.base.c,
            platt_a: self.platt_a,
            platt_b: self.platt_b,
            standardization: scales.to_vec(),
        }
    }
}

/// Serialized form of a calibrated model, sufficient to re-score encoded
/// rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub column_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub platt_a: f64,
    pub platt_b: f64,
    /// Per column: `(mean, std)` for standardized numerics, `null` otherwise.
    pub standardization: Vec<Option<NumericScale>>,
}

//! Subgroup bias auditing for linear admissions classifiers.
//!
//! Load or synthesize an applicant cohort, slice it by admission regime,
//! train a calibrated linear SVM on stratified splits and compare accuracy,
//! specificity, sensitivity, Brier score and class balance between the two
//! sides of a sensitive attribute.

pub mod audit;
pub mod cli;
pub mod cohort;
pub mod error;
pub mod metrics;
pub mod report;
pub mod resampling;
pub mod seed;
pub mod svm;
pub mod synth;

pub use error::{AuditError, Result};

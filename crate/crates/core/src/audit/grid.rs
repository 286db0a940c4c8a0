use serde::{Deserialize, Serialize};

use super::{aggregate_audit, AuditReport, AuditSpec};
use crate::cohort::{ApplicantRecord, CohortGroup, Concordance, FeatureScenario, SensitiveVariable};

/// Skip reason for cells that ask for test scores in the test-optional
/// cohort.
pub const FEATURE_UNAVAILABLE: &str = "feature unavailable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditGrid {
    pub cells: Vec<(CohortGroup, FeatureScenario)>,
    pub sensitives: Vec<SensitiveVariable>,
}

impl AuditGrid {
    /// Every group × scenario × sensitive variable.
    pub fn full() -> Self {
        AuditGrid {
            cells: CohortGroup::ALL
                .iter()
                .flat_map(|&g| FeatureScenario::ALL.iter().map(move |&s| (g, s)))
                .collect(),
            sensitives: SensitiveVariable::ALL.to_vec(),
        }
    }

    /// Test-required with GPA and test, test-optional with GPA, all years
    /// with GPA; each against all three sensitive variables.
    pub fn standard() -> Self {
        AuditGrid {
            cells: vec![
                (CohortGroup::TestRequired, FeatureScenario::GPA_AND_TEST),
                (CohortGroup::TestOptional, FeatureScenario::GPA_ONLY),
                (CohortGroup::AllYears, FeatureScenario::GPA_ONLY),
            ],
            sensitives: SensitiveVariable::ALL.to_vec(),
        }
    }

    pub fn expand(&self) -> Vec<GridCell> {
        self.cells
            .iter()
            .flat_map(|&(group, scenario)| {
                self.sensitives.iter().map(move |&sensitive| GridCell {
                    group,
                    scenario,
                    sensitive,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub group: CohortGroup,
    pub scenario: FeatureScenario,
    pub sensitive: SensitiveVariable,
}

impl GridCell {
    /// `{group}_{scenario}_{sensitive}`, used for output file names.
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.group.slug(), self.scenario.slug(), self.sensitive.slug())
    }

    pub fn skip_reason(&self) -> Option<&'static str> {
        (self.group == CohortGroup::TestOptional && self.scenario.include_test()).then_some(FEATURE_UNAVAILABLE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub cell: GridCell,
    pub report: Option<Box<AuditReport>>,
    pub skipped: Option<String>,
}

/// One audit per grid cell, all sharing `template`'s threshold, trial
/// count, seed and model settings. Cells that cannot run are recorded with
/// a reason instead of failing the grid.
pub fn run_grid(
    table: &[ApplicantRecord],
    grid: &AuditGrid,
    template: &AuditSpec,
    concordance: &Concordance,
) -> Vec<GridEntry> {
    grid.expand()
        .into_iter()
        .map(|cell| {
            if let Some(reason) = cell.skip_reason() {
                return GridEntry {
                    cell,
                    report: None,
                    skipped: Some(reason.to_string()),
                };
            }
            let spec = AuditSpec {
                group: cell.group,
                scenario: cell.scenario,
                sensitive: cell.sensitive,
                ..template.clone()
            };
            match aggregate_audit(table, &spec, concordance) {
                Ok(r) => GridEntry {
                    cell,
                    report: Some(Box::new(r)),
                    skipped: None,
                },
                Err(e) => GridEntry {
                    cell,
                    report: None,
                    skipped: Some(e.to_string()),
                },
            }
        })
        .collect()
}

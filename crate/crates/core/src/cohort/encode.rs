use serde::{Deserialize, Serialize};

use super::{ApplicantRecord, Concordance, FeatureScenario, Gender, Race, SensitiveVariable};
use crate::error::{AuditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Family {
    Gender,
    Race,
    FirstGeneration,
    Residency,
    Beginning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Numeric {
    CampusesApplied,
    Age,
    Gpa,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Source {
    Level(Family, u8),
    Numeric(Numeric),
}

const LEVELS: [(Family, &[&str]); 5] = [
    (Family::Gender, &["Male", "Female"]),
    (Family::Race, &["White", "Hispanic", "Black", "Asian", "Other Race"]),
    (Family::FirstGeneration, &["First-Gen", "Not First-Gen"]),
    (Family::Residency, &["In-State Res", "Out-Of-State Res"]),
    (Family::Beginning, &["Beginning Student", "Not Beginning Student"]),
];

impl Family {
    fn level_of(self, r: &ApplicantRecord) -> u8 {
        match self {
            Family::Gender => Gender::ALL.iter().position(|g| *g == r.gender).unwrap() as u8,
            Family::Race => Race::ALL.iter().position(|x| *x == r.race).unwrap() as u8,
            Family::FirstGeneration => u8::from(!r.first_generation),
            Family::Residency => u8::from(!r.in_state),
            Family::Beginning => u8::from(!r.beginning_student),
        }
    }
}

impl Numeric {
    fn name(self) -> &'static str {
        match self {
            Numeric::CampusesApplied => "Campuses Applied",
            Numeric::Age => "Age",
            Numeric::Gpa => "GPA",
            Numeric::Test => "Test Scores",
        }
    }

    fn raw(self, r: &ApplicantRecord, concordance: &Concordance) -> f64 {
        match self {
            Numeric::CampusesApplied => f64::from(r.campuses_applied),
            Numeric::Age => f64::from(r.age),
            Numeric::Gpa => r.gpa.expect("eligible record has gpa"),
            Numeric::Test => f64::from(r.test_score(concordance).expect("eligible record has a test score")),
        }
    }
}

impl Source {
    fn raw(self, r: &ApplicantRecord, concordance: &Concordance) -> f64 {
        match self {
            Source::Level(family, level) => {
                if family.level_of(r) == level {
                    1.0
                } else {
                    0.0
                }
            }
            Source::Numeric(n) => n.raw(r, concordance),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Source::Level(family, level) => {
                LEVELS.iter().find(|(f, _)| *f == family).unwrap().1[level as usize]
            }
            Source::Numeric(n) => n.name(),
        }
    }
}

/// Centering and scaling applied to one numeric column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericScale {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Column {
    source: Source,
    scale: Option<NumericScale>,
}

/// A column that was constant over the fitting population, with its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub value: f64,
}

/// Feature layout and standardization fitted on one population and
/// reusable on another (training statistics applied to test rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    scenario: FeatureScenario,
    sensitive: SensitiveVariable,
    concordance: Concordance,
    columns: Vec<Column>,
    dropped: Vec<DroppedColumn>,
}

impl FeatureEncoder {
    pub fn fit(
        table: &[ApplicantRecord],
        scenario: FeatureScenario,
        sensitive: SensitiveVariable,
        concordance: &Concordance,
    ) -> Result<Self> {
        if table.is_empty() {
            return Err(AuditError::EmptyCohort);
        }
        let eligible: Vec<&ApplicantRecord> =
            table.iter().filter(|r| scenario.admits(r, concordance)).collect();
        if eligible.is_empty() {
            return Err(AuditError::AllRecordsExcluded(format!(
                "no record carries the numerics required by scenario `{}`",
                scenario.slug()
            )));
        }

        let mut sources: Vec<Source> = LEVELS
            .iter()
            .flat_map(|(family, levels)| (0..levels.len()).map(move |l| Source::Level(*family, l as u8)))
            .collect();
        sources.push(Source::Numeric(Numeric::CampusesApplied));
        sources.push(Source::Numeric(Numeric::Age));
        if scenario.include_gpa() {
            sources.push(Source::Numeric(Numeric::Gpa));
        }
        if scenario.include_test() {
            sources.push(Source::Numeric(Numeric::Test));
        }

        let mut columns = Vec::new();
        let mut dropped = Vec::new();
        for source in sources {
            let values: Vec<f64> = eligible.iter().map(|r| source.raw(r, concordance)).collect();
            let first = values[0];
            if values.iter().all(|&v| v == first) {
                dropped.push(DroppedColumn {
                    name: source.name().to_string(),
                    value: first,
                });
                continue;
            }
            let scale = match source {
                Source::Level(..) => None,
                Source::Numeric(_) => {
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    Some(NumericScale {
                        mean,
                        std: var.sqrt(),
                    })
                }
            };
            columns.push(Column { source, scale });
        }

        Ok(FeatureEncoder {
            scenario,
            sensitive,
            concordance: concordance.clone(),
            columns,
            dropped,
        })
    }

    pub fn scenario(&self) -> FeatureScenario {
        self.scenario
    }

    pub fn sensitive(&self) -> SensitiveVariable {
        self.sensitive
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.source.name().to_string()).collect()
    }

    pub fn scales(&self) -> Vec<Option<NumericScale>> {
        self.columns.iter().map(|c| c.scale).collect()
    }

    pub fn dropped(&self) -> &[DroppedColumn] {
        &self.dropped
    }

    /// Encodes every record eligible under the fitted scenario; ineligible
    /// records are skipped and counted in [`FeatureMatrix::excluded`].
    pub fn transform(&self, table: &[ApplicantRecord]) -> FeatureMatrix {
        let n_cols = self.columns.len();
        let mut data = Vec::with_capacity(table.len() * n_cols);
        let mut labels = Vec::with_capacity(table.len());
        let mut subgroup_mask = Vec::with_capacity(table.len());
        let mut ids = Vec::with_capacity(table.len());
        let mut excluded = 0;
        for r in table {
            if !self.scenario.admits(r, &self.concordance) {
                excluded += 1;
                continue;
            }
            for c in &self.columns {
                let raw = c.source.raw(r, &self.concordance);
                data.push(match c.scale {
                    Some(s) => (raw - s.mean) / s.std,
                    None => raw,
                });
            }
            labels.push(r.direct_admit);
            subgroup_mask.push(self.sensitive.in_group_a(r));
            ids.push(r.id.clone());
        }
        FeatureMatrix {
            column_names: self.column_names(),
            scales: self.scales(),
            n_rows: labels.len(),
            n_cols,
            data,
            labels,
            subgroup_mask,
            ids,
            dropped: self.dropped.clone(),
            excluded,
        }
    }
}

/// Fits an encoder on `table` and encodes the same table.
pub fn encode_features(
    table: &[ApplicantRecord],
    scenario: FeatureScenario,
    sensitive: SensitiveVariable,
    concordance: &Concordance,
) -> Result<FeatureMatrix> {
    Ok(FeatureEncoder::fit(table, scenario, sensitive, concordance)?.transform(table))
}

/// Dense row-major design matrix with labels and the active subgroup mask
/// (`true` = group A of the sensitive variable).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub scales: Vec<Option<NumericScale>>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
    pub labels: Vec<bool>,
    pub subgroup_mask: Vec<bool>,
    pub ids: Vec<String>,
    pub dropped: Vec<DroppedColumn>,
    pub excluded: usize,
}

/// Categorical values recovered from a row's one-hot columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedCategoricals {
    pub gender: Gender,
    pub race: Race,
    pub first_generation: bool,
    pub in_state: bool,
    pub beginning_student: bool,
}

impl FeatureMatrix {
    /// Builds a matrix from raw parts, mostly for tests and examples.
    pub fn from_rows(column_names: Vec<String>, rows: &[Vec<f64>], labels: Vec<bool>, mask: Vec<bool>) -> Result<Self> {
        let n_cols = column_names.len();
        if rows.len() != labels.len() {
            return Err(AuditError::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        if rows.len() != mask.len() {
            return Err(AuditError::DimensionMismatch {
                expected: rows.len(),
                found: mask.len(),
            });
        }
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(AuditError::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(FeatureMatrix {
            scales: vec![None; n_cols],
            column_names,
            n_rows: rows.len(),
            n_cols,
            data,
            ids: (0..rows.len()).map(|i| i.to_string()).collect(),
            labels,
            subgroup_mask: mask,
            dropped: Vec::new(),
            excluded: 0,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols.max(1)).take(self.n_rows)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).map(move |i| self.data[i * self.n_cols + j])
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Appends a raw column.
    pub fn push_column(&mut self, name: impl Into<String>, values: &[f64]) -> Result<()> {
        if values.len() != self.n_rows {
            return Err(AuditError::DimensionMismatch {
                expected: self.n_rows,
                found: values.len(),
            });
        }
        let mut data = Vec::with_capacity(self.n_rows * (self.n_cols + 1));
        for (i, v) in values.iter().enumerate() {
            data.extend_from_slice(self.row(i));
            data.push(*v);
        }
        self.data = data;
        self.n_cols += 1;
        self.column_names.push(name.into());
        self.scales.push(None);
        Ok(())
    }

    /// Rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            column_names: self.column_names.clone(),
            scales: self.scales.clone(),
            n_rows: indices.len(),
            n_cols: self.n_cols,
            data,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            subgroup_mask: indices.iter().map(|&i| self.subgroup_mask[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            dropped: self.dropped.clone(),
            excluded: 0,
        }
    }

    /// Recovers the categorical values of row `i` from its one-hot columns,
    /// falling back to dropped constant columns.
    pub fn decode_categoricals(&self, i: usize) -> Option<DecodedCategoricals> {
        let row = self.row(i);
        let level = |levels: &[&str]| -> Option<usize> {
            levels.iter().position(|name| {
                match self.column_index(name) {
                    Some(j) => row[j] == 1.0,
                    None => self.dropped.iter().any(|d| d.name == *name && d.value == 1.0),
                }
            })
        };
        let lv = |f: Family| level(LEVELS.iter().find(|(x, _)| *x == f).unwrap().1);
        Some(DecodedCategoricals {
            gender: Gender::ALL[lv(Family::Gender)?],
            race: Race::ALL[lv(Family::Race)?],
            first_generation: lv(Family::FirstGeneration)? == 0,
            in_state: lv(Family::Residency)? == 0,
            beginning_student: lv(Family::Beginning)? == 0,
        })
    }

    /// One-hot families as lists of retained column indices.
    pub fn one_hot_families(&self) -> Vec<Vec<usize>> {
        LEVELS
            .iter()
            .map(|(_, levels)| levels.iter().filter_map(|l| self.column_index(l)).collect::<Vec<_>>())
            .filter(|v| !v.is_empty())
            .collect()
    }

    /// Inverts standardization for numeric column `j` at row `i`.
    pub fn raw_value(&self, i: usize, j: usize) -> f64 {
        let v = self.row(i)[j];
        match self.scales[j] {
            Some(s) => v * s.std + s.mean,
            None => v,
        }
    }
}

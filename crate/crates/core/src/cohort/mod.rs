//! Applicant data model, cohort slicing and feature encoding.
//!
//! Records are held in an [`ApplicantTable`]. A table is sliced into
//! admission-regime cohorts with [`slice_cohort`] and turned into a
//! numeric [`FeatureMatrix`] by [`FeatureEncoder`].

mod concordance;
mod encode;
mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

pub use concordance::Concordance;
pub use encode::{encode_features, DecodedCategoricals, FeatureEncoder, FeatureMatrix, NumericScale};
pub use io::{load_cohort, load_cohort_from_reader, write_cohort, CohortSchema, LoadedCohort, RejectedRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Season {
    Spring,
    Fall,
}

/// An academic term. Only Fall and Spring terms from Fall 2017 through
/// Spring 2023 are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    year: u16,
    season: Season,
}

impl Term {
    pub const FIRST: Term = Term {
        year: 2017,
        season: Season::Fall,
    };
    pub const LAST: Term = Term {
        year: 2023,
        season: Season::Spring,
    };
    /// Last term in which test scores were required.
    pub const LAST_TEST_REQUIRED: Term = Term {
        year: 2020,
        season: Season::Fall,
    };

    pub fn new(season: Season, year: u16) -> Result<Self> {
        let term = Term { year, season };
        if term < Self::FIRST || term > Self::LAST {
            return Err(AuditError::InvalidArgument(format!(
                "term {term} outside {}..{}",
                Self::FIRST,
                Self::LAST
            )));
        }
        Ok(term)
    }

    pub fn season(self) -> Season {
        self.season
    }

    pub fn year(self) -> u16 {
        self.year
    }

    pub fn is_test_required(self) -> bool {
        self <= Self::LAST_TEST_REQUIRED
    }

    /// Every valid term in chronological order.
    pub fn all() -> Vec<Term> {
        let mut out = Vec::new();
        let mut t = Self::FIRST;
        loop {
            out.push(t);
            if t == Self::LAST {
                break;
            }
            t = match t.season {
                Season::Fall => Term {
                    year: t.year + 1,
                    season: Season::Spring,
                },
                Season::Spring => Term {
                    year: t.year,
                    season: Season::Fall,
                },
            };
        }
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = match self.season {
            Season::Fall => "FA",
            Season::Spring => "SP",
        };
        write!(f, "{code}{}", self.year)
    }
}

impl FromStr for Term {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || AuditError::InvalidArgument(format!("unrecognized term `{s}`"));
        if s.len() != 6 || !s.is_char_boundary(2) {
            return Err(bad());
        }
        let season = match &s[..2] {
            "FA" | "fa" => Season::Fall,
            "SP" | "sp" => Season::Spring,
            _ => return Err(bad()),
        };
        let year: u16 = s[2..].parse().map_err(|_| bad())?;
        Term::new(season, year)
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "Male",
            Gender::Female => "Female",
        }
    }
}

/// Race with Hispanic/Latino ethnicity folded in as its own level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Race {
    White,
    Hispanic,
    Black,
    Asian,
    Other,
}

impl Race {
    pub const ALL: [Race; 5] = [Race::White, Race::Hispanic, Race::Black, Race::Asian, Race::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Race::White => "White",
            Race::Hispanic => "Hispanic",
            Race::Black => "Black",
            Race::Asian => "Asian",
            Race::Other => "Other",
        }
    }
}

impl FromStr for Gender {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            _ => Err(AuditError::InvalidArgument(format!("unrecognized gender `{s}`"))),
        }
    }
}

impl FromStr for Race {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" => Ok(Race::White),
            "hispanic" | "latino" | "hispanic/latino" => Ok(Race::Hispanic),
            "black" => Ok(Race::Black),
            "asian" => Ok(Race::Asian),
            "other" => Ok(Race::Other),
            _ => Err(AuditError::InvalidArgument(format!("unrecognized race `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicantRecord {
    pub id: String,
    pub term: Term,
    pub beginning_student: bool,
    pub campuses_applied: u32,
    pub age: u32,
    pub gender: Gender,
    pub race: Race,
    pub first_generation: bool,
    pub in_state: bool,
    pub gpa: Option<f64>,
    pub sat: Option<u32>,
    pub act: Option<u32>,
    pub direct_admit: bool,
}

impl ApplicantRecord {
    /// SAT-scale test score, converting ACT through `concordance` when no SAT
    /// score was reported. `None` when neither score is usable.
    pub fn test_score(&self, concordance: &Concordance) -> Option<u32> {
        match (self.sat, self.act) {
            (Some(sat), _) => Some(sat),
            (None, Some(act)) => concordance.normalize(act).ok(),
            (None, None) => None,
        }
    }
}

pub type ApplicantTable = Vec<ApplicantRecord>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CohortGroup {
    AllYears,
    TestRequired,
    TestOptional,
}

impl CohortGroup {
    pub const ALL: [CohortGroup; 3] = [
        CohortGroup::AllYears,
        CohortGroup::TestRequired,
        CohortGroup::TestOptional,
    ];

    pub fn contains(self, term: Term) -> bool {
        match self {
            CohortGroup::AllYears => true,
            CohortGroup::TestRequired => term.is_test_required(),
            CohortGroup::TestOptional => !term.is_test_required(),
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            CohortGroup::AllYears => "all-years",
            CohortGroup::TestRequired => "test-required",
            CohortGroup::TestOptional => "test-optional",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            CohortGroup::AllYears => "All Years",
            CohortGroup::TestRequired => "Test-Required Cohort",
            CohortGroup::TestOptional => "Test-Optional Cohort",
        }
    }
}

impl FromStr for CohortGroup {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        CohortGroup::ALL
            .into_iter()
            .find(|g| g.slug() == s)
            .ok_or_else(|| AuditError::InvalidArgument(format!("unknown cohort group `{s}`")))
    }
}

/// Returns the records whose term falls in `group`, preserving order.
pub fn slice_cohort(table: &[ApplicantRecord], group: CohortGroup) -> ApplicantTable {
    table.iter().filter(|r| group.contains(r.term)).cloned().collect()
}

/// Which score features a model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FeatureScenario {
    include_gpa: bool,
    include_test: bool,
}

impl FeatureScenario {
    pub const GPA_ONLY: FeatureScenario = FeatureScenario {
        include_gpa: true,
        include_test: false,
    };
    pub const TEST_ONLY: FeatureScenario = FeatureScenario {
        include_gpa: false,
        include_test: true,
    };
    pub const GPA_AND_TEST: FeatureScenario = FeatureScenario {
        include_gpa: true,
        include_test: true,
    };
    pub const ALL: [FeatureScenario; 3] = [Self::GPA_ONLY, Self::TEST_ONLY, Self::GPA_AND_TEST];

    pub fn new(include_gpa: bool, include_test: bool) -> Result<Self> {
        if !include_gpa && !include_test {
            return Err(AuditError::config(
                "scenario",
                "at least one of include_gpa/include_test must be set",
            ));
        }
        Ok(FeatureScenario {
            include_gpa,
            include_test,
        })
    }

    pub fn include_gpa(self) -> bool {
        self.include_gpa
    }

    pub fn include_test(self) -> bool {
        self.include_test
    }

    /// Whether `record` carries every numeric this scenario needs.
    pub fn admits(self, record: &ApplicantRecord, concordance: &Concordance) -> bool {
        (!self.include_gpa || record.gpa.is_some())
            && (!self.include_test || record.test_score(concordance).is_some())
    }

    pub fn slug(self) -> &'static str {
        match (self.include_gpa, self.include_test) {
            (true, false) => "gpa",
            (false, true) => "test",
            _ => "gpa-test",
        }
    }

    pub fn title(self) -> &'static str {
        match (self.include_gpa, self.include_test) {
            (true, false) => "GPA, no test scores",
            (false, true) => "Test scores, no GPA",
            _ => "GPA and test scores",
        }
    }
}

impl<'de> Deserialize<'de> for FeatureScenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Slug(String),
            Flags { include_gpa: bool, include_test: bool },
        }
        match Raw::deserialize(deserializer)? {
            Raw::Slug(s) => s.parse(),
            Raw::Flags { include_gpa, include_test } => FeatureScenario::new(include_gpa, include_test),
        }
        .map_err(serde::de::Error::custom)
    }
}

impl FromStr for FeatureScenario {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        FeatureScenario::ALL
            .into_iter()
            .find(|sc| sc.slug() == s)
            .ok_or_else(|| AuditError::InvalidArgument(format!("unknown scenario `{s}`")))
    }
}

/// Attribute whose binarization defines the audited subgroups.
///
/// Group A is Male / White / not first-generation; group B is the
/// complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitiveVariable {
    Gender,
    Race,
    #[serde(rename = "first-gen")]
    FirstGeneration,
}

impl SensitiveVariable {
    pub const ALL: [SensitiveVariable; 3] = [
        SensitiveVariable::Gender,
        SensitiveVariable::Race,
        SensitiveVariable::FirstGeneration,
    ];

    pub fn in_group_a(self, record: &ApplicantRecord) -> bool {
        match self {
            SensitiveVariable::Gender => record.gender == Gender::Male,
            SensitiveVariable::Race => record.race == Race::White,
            SensitiveVariable::FirstGeneration => !record.first_generation,
        }
    }

    pub fn group_a_label(self) -> &'static str {
        match self {
            SensitiveVariable::Gender => "Male",
            SensitiveVariable::Race => "White",
            SensitiveVariable::FirstGeneration => "Non-First-Gen",
        }
    }

    pub fn group_b_label(self) -> &'static str {
        match self {
            SensitiveVariable::Gender => "Female",
            SensitiveVariable::Race => "Non-White",
            SensitiveVariable::FirstGeneration => "First-Gen",
        }
    }

    pub fn mask(self, table: &[ApplicantRecord]) -> Vec<bool> {
        table.iter().map(|r| self.in_group_a(r)).collect()
    }

    pub fn slug(self) -> &'static str {
        match self {
            SensitiveVariable::Gender => "gender",
            SensitiveVariable::Race => "race",
            SensitiveVariable::FirstGeneration => "first-gen",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            SensitiveVariable::Gender => "Gender",
            SensitiveVariable::Race => "Race",
            SensitiveVariable::FirstGeneration => "First-Gen",
        }
    }
}

impl FromStr for SensitiveVariable {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        SensitiveVariable::ALL
            .into_iter()
            .find(|v| v.slug() == s)
            .ok_or_else(|| AuditError::InvalidArgument(format!("unknown sensitive variable `{s}`")))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn record(id: &str, term: &str) -> ApplicantRecord {
        ApplicantRecord {
            id: id.to_string(),
            term: term.parse().unwrap(),
            beginning_student: true,
            campuses_applied: 1,
            age: 18,
            gender: Gender::Female,
            race: Race::White,
            first_generation: false,
            in_state: true,
            gpa: Some(3.4),
            sat: Some(1200),
            act: None,
            direct_admit: true,
        }
    }

    #[test]
    fn term_parse_and_order() {
        let t: Term = "FA2019".parse().unwrap();
        assert_eq!(t.to_string(), "FA2019");
        assert!(t.is_test_required());
        let t: Term = "SP2021".parse().unwrap();
        assert!(!t.is_test_required());
        assert!("SP2017".parse::<Term>().is_err());
        assert!("FA2023".parse::<Term>().is_err());
        assert!("WI2019".parse::<Term>().is_err());
        assert_eq!(Term::all().len(), 12);
        assert_eq!(Term::all().iter().filter(|t| t.is_test_required()).count(), 7);
    }

    #[test]
    fn slice_by_group() {
        let table = vec![record("a", "FA2019"), record("b", "SP2022")];
        let req = slice_cohort(&table, CohortGroup::TestRequired);
        assert_eq!(req.len(), 1);
        assert_eq!(req[0].id, "a");
        assert_eq!(slice_cohort(&table, CohortGroup::AllYears), table);

        let fall = vec![record("c", "FA2018"), record("d", "FA2018")];
        assert!(slice_cohort(&fall, CohortGroup::TestOptional).is_empty());
    }

    #[test]
    fn scenario_requires_a_feature() {
        assert!(FeatureScenario::new(false, false).is_err());
        let sc: FeatureScenario = serde_json::from_str(r#"{"include_gpa":false,"include_test":false}"#)
            .unwrap_or(FeatureScenario::GPA_ONLY);
        assert_eq!(sc, FeatureScenario::GPA_ONLY);
    }

    #[test]
    fn binarization_is_total() {
        let mut r = record("a", "FA2019");
        for g in Gender::ALL {
            r.gender = g;
            assert_eq!(SensitiveVariable::Gender.in_group_a(&r), g == Gender::Male);
        }
        for race in Race::ALL {
            r.race = race;
            assert_eq!(SensitiveVariable::Race.in_group_a(&r), race == Race::White);
        }
    }
}

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/act_sat_concordance.csv");

/// ACT composite to SAT total lookup, loaded from a two-column `act,sat` CSV
/// sorted by ACT with no gaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concordance {
    min_act: u32,
    sat: Vec<u32>,
}

#[derive(Deserialize)]
struct Row {
    act: u32,
    sat: u32,
}

impl Concordance {
    /// The shipped 2018 ACT/SAT concordance.
    pub fn bundled() -> Self {
        Self::from_reader(DEFAULT_TABLE.as_bytes()).expect("bundled concordance table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| AuditError::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for row in rdr.deserialize::<Row>() {
            rows.push(row?);
        }
        let first = rows
            .first()
            .ok_or_else(|| AuditError::InvalidConcordance("no rows".into()))?;
        let min_act = first.act;
        for (i, pair) in rows.windows(2).enumerate() {
            if pair[1].act != pair[0].act + 1 {
                return Err(AuditError::InvalidConcordance(format!(
                    "row {}: ACT values must be consecutive ascending",
                    i + 2
                )));
            }
            if pair[1].sat < pair[0].sat {
                return Err(AuditError::InvalidConcordance(format!(
                    "row {}: SAT values must be non-decreasing",
                    i + 2
                )));
            }
        }
        Ok(Concordance {
            min_act,
            sat: rows.into_iter().map(|r| r.sat).collect(),
        })
    }

    pub fn min_act(&self) -> u32 {
        self.min_act
    }

    pub fn max_act(&self) -> u32 {
        self.min_act + self.sat.len() as u32 - 1
    }

    pub fn normalize(&self, act: u32) -> Result<u32> {
        if act < self.min_act || act > self.max_act() {
            return Err(AuditError::ActOutOfDomain {
                act,
                min: self.min_act,
                max: self.max_act(),
            });
        }
        Ok(self.sat[(act - self.min_act) as usize])
    }

    /// Largest ACT whose concordant SAT does not exceed `sat`, or the
    /// table minimum when `sat` is below every entry.
    pub fn act_for_sat(&self, sat: u32) -> u32 {
        let below = self.sat.partition_point(|&s| s <= sat);
        self.min_act + below.saturating_sub(1) as u32
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.sat
            .iter()
            .enumerate()
            .map(move |(i, &s)| (self.min_act + i as u32, s))
    }
}

impl Default for Concordance {
    fn default() -> Self {
        Self::bundled()
    }
}

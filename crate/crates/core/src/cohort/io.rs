use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ApplicantRecord, ApplicantTable};
use crate::error::{AuditError, Result};

pub const FIELDS: [&str; 13] = [
    "id",
    "term",
    "beginning_student",
    "campuses_applied",
    "age",
    "gender",
    "race",
    "first_generation",
    "in_state",
    "gpa",
    "sat",
    "act",
    "direct_admit",
];

/// Maps each record field to the CSV header that carries it. Fields not
/// listed use their own name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortSchema {
    #[serde(default)]
    pub columns: BTreeMap<String, String>,
}

impl CohortSchema {
    pub fn header_for<'a>(&'a self, field: &'a str) -> &'a str {
        self.columns.get(field).map(String::as_str).unwrap_or(field)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    /// 1-based line number in the source file, header is line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedCohort {
    pub table: ApplicantTable,
    pub rejects: Vec<RejectedRow>,
}

pub fn load_cohort(path: impl AsRef<Path>, schema: &CohortSchema) -> Result<LoadedCohort> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| AuditError::io(path, e))?;
    load_cohort_from_reader(file, schema)
}

pub fn load_cohort_from_reader<R: Read>(reader: R, schema: &CohortSchema) -> Result<LoadedCohort> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(AuditError::EmptyCohort);
    }
    let mut index = [0usize; FIELDS.len()];
    for (slot, field) in index.iter_mut().zip(FIELDS) {
        let name = schema.header_for(field);
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AuditError::MissingColumn(name.to_string()))?;
    }

    let mut table = Vec::new();
    let mut rejects = Vec::new();
    let mut rows = 0usize;
    for row in rdr.records() {
        let row = row?;
        rows += 1;
        let line = row.position().map(|p| p.line()).unwrap_or(rows as u64 + 1);
        let cell = |i: usize| row.get(index[i]).unwrap_or("");
        match parse_row(cell) {
            Ok(rec) => table.push(rec),
            Err(reason) => rejects.push(RejectedRow { line, reason }),
        }
    }
    if rows == 0 {
        return Err(AuditError::EmptyCohort);
    }
    Ok(LoadedCohort { table, rejects })
}

fn parse_row<'a>(cell: impl Fn(usize) -> &'a str) -> std::result::Result<ApplicantRecord, String> {
    let id = cell(0);
    if id.is_empty() {
        return Err("id is empty".into());
    }
    let age = parse_uint("age", cell(4))?;
    if age == 0 {
        return Err("age must be positive".into());
    }
    let gpa = optional(cell(9))
        .map(|s| {
            let v: f64 = s.parse().map_err(|_| format!("gpa `{s}` is not a number"))?;
            if !(0.0..=4.0).contains(&v) {
                return Err("gpa out of range [0,4]".to_string());
            }
            Ok(v)
        })
        .transpose()?;
    let sat = optional(cell(10))
        .map(|s| bounded("sat", s, 400, 1600))
        .transpose()?;
    let act = optional(cell(11)).map(|s| bounded("act", s, 1, 36)).transpose()?;
    Ok(ApplicantRecord {
        id: id.to_string(),
        term: cell(1).parse().map_err(|e: AuditError| e.to_string())?,
        beginning_student: parse_bool("beginning_student", cell(2))?,
        campuses_applied: parse_uint("campuses_applied", cell(3))?,
        age,
        gender: cell(5).parse().map_err(|e: AuditError| e.to_string())?,
        race: cell(6).parse().map_err(|e: AuditError| e.to_string())?,
        first_generation: parse_bool("first_generation", cell(7))?,
        in_state: parse_bool("in_state", cell(8))?,
        gpa,
        sat,
        act,
        direct_admit: parse_bool("direct_admit", cell(12))?,
    })
}

fn optional(s: &str) -> Option<&str> {
    (!s.is_empty()).then_some(s)
}

fn parse_bool(field: &str, s: &str) -> std::result::Result<bool, String> {
    match s {
        "1" | "true" | "TRUE" => Ok(true),
        "0" | "false" | "FALSE" => Ok(false),
        _ => Err(format!("{field} `{s}` is not a 0/1 boolean")),
    }
}

fn parse_uint(field: &str, s: &str) -> std::result::Result<u32, String> {
    s.parse().map_err(|_| format!("{field} `{s}` is not a non-negative integer"))
}

fn bounded(field: &str, s: &str, lo: u32, hi: u32) -> std::result::Result<u32, String> {
    let v = parse_uint(field, s)?;
    if v < lo || v > hi {
        return Err(format!("{field} out of range [{lo},{hi}]"));
    }
    Ok(v)
}

/// Writes `table` in the canonical cohort CSV layout.
pub fn write_cohort<W: Write>(table: &[ApplicantRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FIELDS)?;
    let b = |v: bool| if v { "1" } else { "0" };
    for r in table {
        w.write_record([
            r.id.clone(),
            r.term.to_string(),
            b(r.beginning_student).into(),
            r.campuses_applied.to_string(),
            r.age.to_string(),
            r.gender.as_str().into(),
            r.race.as_str().into(),
            b(r.first_generation).into(),
            b(r.in_state).into(),
            r.gpa.map(|g| g.to_string()).unwrap_or_default(),
            r.sat.map(|s| s.to_string()).unwrap_or_default(),
            r.act.map(|s| s.to_string()).unwrap_or_default(),
            b(r.direct_admit).into(),
        ])?;
    }
    w.flush().map_err(|e| AuditError::io("<cohort writer>", e))?;
    Ok(())
}

//! JSON, Markdown and CSV renderings of audit and policy results.
//!
//! JSON keeps full precision. Markdown prints three decimals, rounded half
//! away from zero on the exact binary value, with the leading zero dropped
//! (`.872`).

mod markdown;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditReport, GridEntry, MetricName, PolicyImpact};
use crate::error::Result;

pub use markdown::{audit_markdown, grid_markdown, policy_markdown};

/// JSON Schema that every emitted audit report satisfies.
pub const AUDIT_REPORT_SCHEMA: &str = include_str!("../../schema/audit_report.schema.json");

/// `v` rounded half away from zero to `places` decimals.
pub fn fixed(v: f64, places: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let exact = format!("{:.60}", v.abs());
    let (int_part, frac_part) = exact.split_once('.').expect("fixed-point output has a point");
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes().take(places)).map(|b| b - b'0').collect();
    if frac_part.as_bytes()[places] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - places;
    let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    let body = if places == 0 {
        text
    } else {
        format!("{}.{}", &text[..split], &text[split..])
    };
    let zero = digits.iter().all(|&d| d == 0);
    if v < 0.0 && !zero {
        format!("-{body}")
    } else {
        body
    }
}

/// Three decimals without the leading zero: `.872`, `1.000`, `-.012`.
pub fn short_decimal(v: f64) -> String {
    let s = fixed(v, 3);
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

pub fn table_cell(v: Option<f64>) -> String {
    v.map(short_decimal).unwrap_or_else(|| "undefined".to_string())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn audit_from_json(text: &str) -> Result<AuditReport> {
    Ok(serde_json::from_str(text)?)
}

/// One row per metric with full-precision values; undefined values are
/// empty cells.
pub fn audit_csv<W: Write>(report: &AuditReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "overall", "group_a", "group_b", "difference", "flagged", "trials_used"])?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for m in &report.metrics {
        w.write_record([
            m.metric.key().to_string(),
            cell(m.overall),
            cell(m.group_a),
            cell(m.group_b),
            cell(m.difference),
            m.flagged.to_string(),
            m.trials_used.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::error::AuditError::io("<csv>", e))?;
    Ok(())
}

/// `gpa,test,quadrant` per included record.
pub fn scatter_csv<W: Write>(impact: &PolicyImpact, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["gpa", "test", "quadrant"])?;
    for p in &impact.scatter {
        w.write_record([p.gpa.to_string(), p.test.to_string(), p.quadrant.slug().to_string()])?;
    }
    w.flush().map_err(|e| crate::error::AuditError::io("<csv>", e))?;
    Ok(())
}

/// One line per grid cell in a run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummaryRow {
    pub cell: String,
    pub status: String,
    pub reason: Option<String>,
    pub flagged: Vec<MetricName>,
}

pub fn grid_summary(entries: &[GridEntry]) -> Vec<GridSummaryRow> {
    entries
        .iter()
        .map(|e| GridSummaryRow {
            cell: e.cell.stem(),
            status: if e.report.is_some() { "audited" } else { "skipped" }.to_string(),
            reason: e.skipped.clone(),
            flagged: e.report.as_ref().map(|r| r.flagged()).unwrap_or_default(),
        })
        .collect()
}

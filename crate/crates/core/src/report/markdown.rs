use std::fmt::Write;

use super::{fixed, table_cell, short_decimal, GridSummaryRow};
use crate::audit::{AuditReport, PolicyImpact, Quadrant};
use crate::cohort::SensitiveVariable;
use crate::metrics::BalanceConditioning;
use crate::svm::format_cv;

fn percent(v: Option<f64>) -> String {
    v.map(|x| format!("{}%", fixed(x * 100.0, 1))).unwrap_or_else(|| "n/a".to_string())
}

/// Overall, group A, group B and difference per metric, with `*` after
/// flagged metric names.
pub fn audit_markdown(report: &AuditReport) -> String {
    let spec = &report.spec;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} · {} · {}\n",
        spec.sensitive.title(),
        spec.group.title(),
        spec.scenario.title()
    );
    let kind = if report.is_snapshot() {
        "Snapshot audit (1 trial)".to_string()
    } else {
        format!("Aggregate audit ({} trials)", spec.n_trials)
    };
    let _ = writeln!(
        out,
        "{kind}, threshold {}, master seed {}.",
        short_decimal(spec.threshold),
        spec.master_seed
    );
    let _ = writeln!(
        out,
        "Records: {} in cohort, {} excluded for missing features.\n",
        report.n_records, report.n_excluded
    );
    let _ = writeln!(
        out,
        "| Metric | Overall | {} | {} | Difference |",
        report.group_a_label, report.group_b_label
    );
    out.push_str("|---|---|---|---|---|\n");
    for m in &report.metrics {
        let star = if m.flagged { "*" } else { "" };
        let _ = writeln!(
            out,
            "| {}{star} | {} | {} | {} | {} |",
            m.metric.title(),
            table_cell(m.overall),
            table_cell(m.group_a),
            table_cell(m.group_b),
            table_cell(m.difference)
        );
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "\\* subgroup difference above {}.",
        short_decimal(spec.threshold)
    );
    let basis = match spec.model.balance_conditioning {
        BalanceConditioning::Predicted => "predicted",
        BalanceConditioning::True => "labeled",
    };
    let _ = writeln!(
        out,
        "Balance for Neg Class is the mean of 1 - p over records {basis} not admitted; \
         Balance for Pos Class is the mean of p over records {basis} admitted."
    );
    if let Some(cv) = &report.cross_validation {
        let _ = writeln!(out, "\nCross Val: {}", format_cv(cv.mean_accuracy, cv.accuracy_stddev));
    }
    if !report.undefined.is_empty() {
        let _ = writeln!(
            out,
            "\nUndefined subgroup values in {} trial-metric cases were left out of the means.",
            report.undefined.len()
        );
    }
    out
}

pub fn grid_markdown(rows: &[GridSummaryRow]) -> String {
    let mut out = String::from("# Audit grid\n\n| Cell | Status | Flagged |\n|---|---|---|\n");
    for r in rows {
        let status = match &r.reason {
            Some(reason) => format!("{} ({reason})", r.status),
            None => r.status.clone(),
        };
        let flagged: Vec<&str> = r.flagged.iter().map(|m| m.title()).collect();
        let _ = writeln!(out, "| {} | {} | {} |", r.cell, status, flagged.join(", "));
    }
    out
}

/// Admitted-demographic shares under both rules, then quadrant counts.
pub fn policy_markdown(impact: &PolicyImpact) -> String {
    let t = &impact.thresholds;
    let mut out = String::from("# Demographics of students who meet admission thresholds\n\n");
    let _ = writeln!(
        out,
        "Records: {} ({} excluded for a missing GPA or test score).\n",
        impact.n_records, impact.n_excluded
    );
    out.push_str("| | Test-Required Threshold | Test-Optional Threshold |\n|---|---|---|\n");
    for v in SensitiveVariable::ALL {
        let _ = writeln!(out, "| **{}** | | |", v.title());
        for row in impact.shares_for(v) {
            let _ = writeln!(out, "| {} | {} | {} |", row.level, percent(row.required), percent(row.optional));
        }
    }
    let _ = writeln!(
        out,
        "| Admitted | {} | {} |\n",
        impact.admitted_required, impact.admitted_optional
    );
    let _ = writeln!(
        out,
        "Test-required: GPA ≥ {:.1} and test ≥ {}. Test-optional: GPA ≥ {:.1}.\n",
        t.gpa_required, t.test_required, t.gpa_optional
    );
    out.push_str("| Quadrant | GPA | Test | Records |\n|---|---|---|---|\n");
    for q in [Quadrant::UpperRight, Quadrant::LowerRight, Quadrant::UpperLeft, Quadrant::LowerLeft] {
        let (g, s) = match q {
            Quadrant::UpperRight => ("≥", "≥"),
            Quadrant::LowerRight => ("≥", "<"),
            Quadrant::UpperLeft => ("<", "≥"),
            Quadrant::LowerLeft => ("<", "<"),
        };
        let _ = writeln!(
            out,
            "| {} | {g} {:.1} | {s} {} | {} |",
            q.slug(),
            t.gpa_required,
            t.test_required,
            impact.quadrants.get(q)
        );
    }
    out
}

mod common;

use admission_audit::audit::{
    aggregate_audit, eligible_records, policy_impact, run_grid, snapshot_audit, summarize, AuditGrid, AuditReport,
    AuditSpec, MetricName, PolicyThresholds, Quadrant, FEATURE_UNAVAILABLE,
};
use admission_audit::cohort::{
    load_cohort_from_reader, write_cohort, CohortGroup, CohortSchema, Concordance, FeatureEncoder, FeatureScenario,
    Gender, SensitiveVariable,
};
use admission_audit::metrics::{group_metrics, permutation_importance, BalanceConditioning};
use admission_audit::report::{audit_from_json, audit_markdown, to_json, AUDIT_REPORT_SCHEMA};
use admission_audit::resampling::{stratified_split, SplitPlan};
use admission_audit::seed;
use admission_audit::svm::{train, SvmConfig};
use admission_audit::synth::{generate, LabelRule, RuleKind, SynthConfig};
use common::*;
use rand::Rng;

fn spec(group: CohortGroup, scenario: FeatureScenario, sensitive: SensitiveVariable) -> AuditSpec {
    AuditSpec::new(group, scenario, sensitive)
}

#[test]
fn synthetic_cohort_round_trips_through_csv() {
    let table = generate(&SynthConfig::default(), 7).unwrap();
    let mut buf = Vec::new();
    write_cohort(&table, &mut buf).unwrap();
    let loaded = load_cohort_from_reader(buf.as_slice(), &CohortSchema::default()).unwrap();
    assert!(loaded.rejects.is_empty());
    assert_eq!(loaded.table, table);
}

#[test]
fn full_grid_skips_unavailable_test_scores() {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 900, ..SynthConfig::default() }, 1).unwrap();
    let template = spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Gender);
    let entries = run_grid(&table, &AuditGrid::full(), &template, &c);
    assert_eq!(entries.len(), 27);
    let skipped: Vec<_> = entries.iter().filter(|e| e.report.is_none()).collect();
    assert_eq!(skipped.len(), 6);
    for e in skipped {
        assert_eq!(e.cell.group, CohortGroup::TestOptional);
        assert!(e.cell.scenario.include_test());
        assert_eq!(e.skipped.as_deref(), Some(FEATURE_UNAVAILABLE));
    }
}

#[test]
fn standard_grid_yields_nine_reports_deterministically() {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 900, ..SynthConfig::default() }, 2).unwrap();
    let template = spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Gender).with_seed(5);
    let first = run_grid(&table, &AuditGrid::standard(), &template, &c);
    assert_eq!(first.iter().filter(|e| e.report.is_some()).count(), 9);
    let second = run_grid(&table, &AuditGrid::standard(), &template, &c);
    let json = |entries: &[admission_audit::audit::GridEntry]| -> Vec<String> {
        entries.iter().map(|e| to_json(e.report.as_deref().unwrap()).unwrap()).collect()
    };
    assert_eq!(json(&first), json(&second));
}

#[test]
fn snapshot_is_a_one_trial_aggregate() {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 1200, ..SynthConfig::default() }, 3).unwrap();
    let s = spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Race).with_seed(17);
    assert_eq!(snapshot_audit(&table, &s, &c).unwrap(), aggregate_audit(&table, &s, &c).unwrap());
    assert!(snapshot_audit(&table, &s.clone().with_trials(2), &c).is_err());
}

#[test]
fn trials_do_not_depend_on_run_length_or_order() {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 1200, ..SynthConfig::default() }, 4).unwrap();
    let s = spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::FirstGeneration).with_seed(3);
    let short = aggregate_audit(&table, &s.clone().with_trials(4), &c).unwrap();
    let long = aggregate_audit(&table, &s.clone().with_trials(8), &c).unwrap();
    assert_eq!(short.trials[..], long.trials[..4]);

    let mut shuffled = long.trials.clone();
    shuffled.reverse();
    shuffled.swap(1, 5);
    let (metrics, undefined) = summarize(&mut shuffled, s.threshold);
    assert_eq!(metrics, long.metrics);
    assert_eq!(undefined, long.undefined);
}

#[test]
fn differences_recompute_from_subgroup_means() {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 1200, ..SynthConfig::default() }, 5).unwrap();
    let r = aggregate_audit(&table, &spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Gender).with_trials(5), &c)
        .unwrap();
    for m in &r.metrics {
        let (a, b) = (m.group_a.unwrap(), m.group_b.unwrap());
        assert_eq!(m.difference, Some((a - b).abs()));
        let mean_a = r.trials.iter().map(|t| m.metric.of(&t.metrics.group_a).unwrap()).sum::<f64>() / 5.0;
        assert_eq!(a, mean_a);
    }
}

#[test]
fn separable_cohort_shows_no_subgroup_gaps() {
    let c = Concordance::bundled();
    for s in 0..3 {
        let table = generate(&separable_config(3000), s).unwrap();
        for sensitive in SensitiveVariable::ALL {
            let r = snapshot_audit(&table, &spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, sensitive).with_seed(s), &c)
                .unwrap();
            assert!(!r.any_flagged());
            for m in &r.metrics {
                assert!(m.difference.unwrap() < 0.01, "seed {s} {sensitive:?} {:?}: {:?}", m.metric, m.difference);
            }
        }
    }
}

#[test]
fn snapshot_finds_planted_specificity_gap() {
    let c = Concordance::bundled();
    let mut hits = 0;
    for s in 0..20 {
        let table = generate(&gender_cohort(10_000, Some(0.15)), s).unwrap();
        let r = snapshot_audit(
            &table,
            &spec(CohortGroup::TestRequired, FeatureScenario::GPA_AND_TEST, SensitiveVariable::Gender).with_seed(s),
            &c,
        )
        .unwrap();
        let m = r.metric(MetricName::Specificity);
        if m.flagged && m.group_b < m.group_a {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits} of 20");
}

fn with_outliers(count: usize) -> Vec<admission_audit::cohort::ApplicantRecord> {
    let mut table = generate(&SynthConfig { n: 3000, ..SynthConfig::neutral() }, 42).unwrap();
    let proto = table
        .iter()
        .find(|r| r.gender == Gender::Female && r.term.is_test_required())
        .unwrap()
        .clone();
    for i in 0..count {
        let mut r = proto.clone();
        r.id = format!("X{i:03}");
        r.gpa = Some(3.9);
        r.sat = Some(1450);
        r.act = None;
        r.direct_admit = false;
        table.push(r);
    }
    table
}

#[test]
fn outliers_sway_snapshots_but_not_aggregates() {
    let c = Concordance::bundled();
    let table = with_outliers(60);
    let base = spec(CohortGroup::TestRequired, FeatureScenario::GPA_AND_TEST, SensitiveVariable::Gender);
    let snapshot_flags: Vec<bool> = (0..20)
        .map(|s| {
            snapshot_audit(&table, &base.clone().with_seed(s), &c)
                .unwrap()
                .metric(MetricName::Specificity)
                .flagged
        })
        .collect();
    assert!(snapshot_flags.contains(&true) && snapshot_flags.contains(&false), "{snapshot_flags:?}");
    let aggregate_flags: Vec<Vec<MetricName>> = (0..4)
        .map(|s| aggregate_audit(&table, &base.clone().with_seed(1000 + s).with_trials(100), &c).unwrap().flagged())
        .collect();
    assert!(aggregate_flags.windows(2).all(|w| w[0] == w[1]), "{aggregate_flags:?}");
}

#[test]
fn perfect_prediction_has_zero_brier_and_balance_gaps() {
    let mut rng = seed::rng(8);
    for _ in 0..50 {
        let n = rng.random_range(4..40);
        let y: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let probs: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
        for cond in [BalanceConditioning::Predicted, BalanceConditioning::True] {
            let g = group_metrics(&y, &y, &probs, &mask, cond).unwrap();
            for m in [&g.overall, &g.group_a, &g.group_b] {
                assert!(m.brier.is_none_or(|b| b == 0.0));
                assert!(m.balance_neg.is_none_or(|b| b == 1.0));
                assert!(m.balance_pos.is_none_or(|b| b == 1.0));
            }
            if let (Some(a), Some(b)) = (g.group_a.balance_neg, g.group_b.balance_neg) {
                assert_eq!(a - b, 0.0);
            }
            if let (Some(a), Some(b)) = (g.group_a.balance_pos, g.group_b.balance_pos) {
                assert_eq!(a - b, 0.0);
            }
        }
    }
}

fn split_and_train(
    table: &[admission_audit::cohort::ApplicantRecord],
    group: CohortGroup,
    scenario: FeatureScenario,
    seed: u64,
) -> (admission_audit::svm::LinearModel, admission_audit::cohort::FeatureMatrix) {
    let c = Concordance::bundled();
    let (rows, _) = eligible_records(table, group, scenario, &c);
    let (train_rows, test_rows) = stratified_split(&rows, &SplitPlan::new(SensitiveVariable::Gender, seed)).unwrap();
    let enc = FeatureEncoder::fit(&train_rows, scenario, SensitiveVariable::Gender, &c).unwrap();
    let model = train(&enc.transform(&train_rows), &SvmConfig::default(), seed).unwrap();
    (model, enc.transform(&test_rows))
}

#[test]
fn importance_of_pure_noise_column_is_near_zero() {
    let table = generate(&SynthConfig { n: 10_000, ..SynthConfig::default() }, 6).unwrap();
    let c = Concordance::bundled();
    let (rows, _) = eligible_records(&table, CohortGroup::AllYears, FeatureScenario::GPA_ONLY, &c);
    let mut rng = seed::rng(60);
    let mut x = admission_audit::cohort::encode_features(&rows, FeatureScenario::GPA_ONLY, SensitiveVariable::Gender, &c).unwrap();
    let noise: Vec<f64> = (0..x.n_rows).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    x.push_column("noise", &noise).unwrap();
    let model = train(&x, &SvmConfig::default(), 6).unwrap();
    let table = permutation_importance(&model, &x, &x.labels.clone(), 10, 6).unwrap();
    let v = table.get("noise").unwrap();
    assert!(v.abs() <= 0.01, "{v}");
}

#[test]
fn test_only_labels_make_test_score_dominant() {
    let config = SynthConfig {
        n: 10_000,
        test_optional_missing: 0.0,
        label_rule: LabelRule {
            kind: RuleKind::TestOnly,
            ..LabelRule::default()
        },
        ..SynthConfig::default()
    };
    let table = generate(&config, 9).unwrap();
    let (model, x_test) = split_and_train(&table, CohortGroup::AllYears, FeatureScenario::GPA_AND_TEST, 9);
    let imp = permutation_importance(&model, &x_test, &x_test.labels, 10, 9).unwrap();
    let (top, value) = &imp.entries[0];
    assert_eq!(top, "Test Scores");
    for (name, other) in &imp.entries[1..] {
        assert!(*value >= 5.0 * other, "{name}: {other} vs {value}");
    }
}

#[test]
fn test_score_outranks_gpa_under_dual_threshold_rule() {
    let table = generate(&SynthConfig::default(), 10).unwrap();
    let (model, x_test) = split_and_train(&table, CohortGroup::TestRequired, FeatureScenario::GPA_AND_TEST, 10);
    let imp = permutation_importance(&model, &x_test, &x_test.labels, 10, 10).unwrap();
    assert!(imp.get("Test Scores").unwrap() > imp.get("GPA").unwrap(), "{:?}", imp.entries);
}

fn schema_validator() -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(AUDIT_REPORT_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn small_report(trials: usize) -> AuditReport {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 900, ..SynthConfig::default() }, 12).unwrap();
    aggregate_audit(&table, &spec(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Race).with_trials(trials), &c)
        .unwrap()
}

#[test]
fn reports_satisfy_the_shipped_schema() {
    let v = schema_validator();
    for trials in [1, 3] {
        let json: serde_json::Value = serde_json::from_str(&to_json(&small_report(trials)).unwrap()).unwrap();
        let errors: Vec<String> = v.iter_errors(&json).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }
}

#[test]
fn schema_rejects_stray_fields() {
    let mut json: serde_json::Value = serde_json::from_str(&to_json(&small_report(1)).unwrap()).unwrap();
    json["surprise"] = serde_json::json!(1);
    assert!(!schema_validator().is_valid(&json));
}

#[test]
fn markdown_renders_identically_from_json() {
    let report = small_report(2);
    let back = audit_from_json(&to_json(&report).unwrap()).unwrap();
    assert_eq!(back, report);
    assert_eq!(audit_markdown(&back), audit_markdown(&report));
}

#[test]
fn markdown_marks_exactly_the_flagged_metrics() {
    let report = small_report(2).clone();
    let mut flagged = report.clone();
    flagged.metrics[1].flagged = true;
    let md = audit_markdown(&flagged);
    assert!(md.contains(&format!("| {}* |", MetricName::Specificity.title())));
    assert_eq!(md.matches("* |").count(), flagged.flagged().len());
}

#[test]
fn policy_counts_match_brute_force() {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 400, ..SynthConfig::default() }, 13).unwrap();
    let t = PolicyThresholds::default();
    let impact = policy_impact(&table, t, &c);
    let scored: Vec<_> = table
        .iter()
        .filter_map(|r| Some((r, r.gpa?, r.test_score(&c)?)))
        .collect();
    assert_eq!(impact.n_records, table.len());
    assert_eq!(impact.n_excluded, table.len() - scored.len());
    assert_eq!(impact.scatter.len(), scored.len());
    let upper_right = scored.iter().filter(|(_, g, s)| *g >= 3.0 && *s >= 1080).count();
    let lower_right = scored.iter().filter(|(_, g, s)| *g >= 3.0 && *s < 1080).count();
    assert_eq!(impact.quadrants.get(Quadrant::UpperRight), upper_right);
    assert_eq!(impact.quadrants.get(Quadrant::LowerRight), lower_right);
    assert_eq!(impact.quadrants.total(), scored.len());
    assert_eq!(impact.admitted_required, upper_right);
    assert_eq!(impact.admitted_optional, scored.iter().filter(|(_, g, _)| *g >= 3.3).count());
    for row in &impact.shares {
        let is_b = row.level == row.variable.group_b_label();
        let in_level = |r: &admission_audit::cohort::ApplicantRecord| row.variable.in_group_a(r) != is_b;
        let req: Vec<_> = scored.iter().filter(|(_, g, s)| *g >= 3.0 && *s >= 1080).collect();
        let opt: Vec<_> = scored.iter().filter(|(_, g, _)| *g >= 3.3).collect();
        let count = |v: &[&(&admission_audit::cohort::ApplicantRecord, f64, u32)]| {
            v.iter().filter(|(r, _, _)| in_level(r)).count() as f64 / v.len() as f64
        };
        assert_eq!(row.required, Some(count(&req)));
        assert_eq!(row.optional, Some(count(&opt)));
    }
}

/// Three-decimal rendering from std formatting, with exact binary ties
/// (odd multiples of 1/2000) pushed away from zero.
fn three_places(v: f64) -> String {
    let twice = v.abs() * 2000.0;
    let s = if twice.fract() == 0.0 && (twice as u64) % 2 == 1 {
        format!("{:.3}", (v.abs() * 1000.0).ceil() / 1000.0)
    } else {
        format!("{:.3}", v.abs())
    };
    let s = s.strip_prefix('0').map(str::to_string).unwrap_or(s);
    if v < 0.0 && s != ".000" {
        format!("-{s}")
    } else {
        s
    }
}

#[test]
fn markdown_cells_are_json_values_rounded() {
    for trials in [1, 4] {
        let report = small_report(trials);
        let md = audit_markdown(&report);
        for m in &report.metrics {
            let title = m.metric.title();
            let line = md
                .lines()
                .find(|l| l.starts_with(&format!("| {title} |")) || l.starts_with(&format!("| {title}* |")))
                .unwrap();
            let cells: Vec<&str> = line.split('|').map(str::trim).filter(|c| !c.is_empty()).collect();
            let values = [m.overall, m.group_a, m.group_b, m.difference];
            for (cell, v) in cells[1..].iter().zip(values) {
                assert_eq!(*cell, three_places(v.unwrap()), "{title}");
            }
        }
    }
    assert_eq!(three_places(0.0625), ".063");
    assert_eq!(three_places(0.8725), ".873");
}

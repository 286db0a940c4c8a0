//! Plant a specificity gap against female applicants and check that a
//! 100-trial aggregate audit flags it, next to the same cohort without
//! the plant.

use admission_audit::audit::{aggregate_audit, AuditSpec, MetricName};
use admission_audit::cohort::{CohortGroup, Concordance, FeatureScenario, SensitiveVariable};
use admission_audit::report::table_cell;
use admission_audit::synth::{generate, PlantedBias, PlantedMetric, Subgroup, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let c = Concordance::bundled();
    let spec = AuditSpec::new(CohortGroup::TestRequired, FeatureScenario::GPA_AND_TEST, SensitiveVariable::Gender)
        .with_trials(100)
        .with_seed(1);
    let plant = PlantedBias {
        variable: SensitiveVariable::Gender,
        subgroup: Subgroup::B,
        metric: PlantedMetric::Specificity,
        rate: 0.15,
    };
    for planted in [None, Some(plant)] {
        let label = if planted.is_some() { "planted" } else { "clean" };
        let config = SynthConfig {
            n: 10_000,
            planted_bias: planted,
            ..SynthConfig::neutral()
        };
        let report = aggregate_audit(&generate(&config, 1)?, &spec, &c)?;
        let m = report.metric(MetricName::Specificity);
        println!(
            "{label:>7}: specificity {} {} vs {} {}, difference {}{}",
            report.group_a_label,
            table_cell(m.group_a),
            report.group_b_label,
            table_cell(m.group_b),
            table_cell(m.difference),
            if m.flagged { " *" } else { "" }
        );
    }
    Ok(())
}

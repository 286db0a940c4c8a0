//! One split, one model: a single-trial audit rendered as Markdown.

use admission_audit::audit::{snapshot_audit, AuditSpec};
use admission_audit::cohort::{CohortGroup, Concordance, FeatureScenario, SensitiveVariable};
use admission_audit::report::audit_markdown;
use admission_audit::synth::{generate, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let table = generate(&SynthConfig { n: 8000, ..SynthConfig::default() }, 5)?;
    let spec = AuditSpec::new(CohortGroup::TestRequired, FeatureScenario::GPA_AND_TEST, SensitiveVariable::Gender).with_seed(5);
    let report = snapshot_audit(&table, &spec, &Concordance::bundled())?;
    print!("{}", audit_markdown(&report));
    Ok(())
}

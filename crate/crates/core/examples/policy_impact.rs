//! Who meets the test-required versus the test-optional admission rule.

use admission_audit::audit::{policy_impact, PolicyThresholds};
use admission_audit::cohort::{slice_cohort, CohortGroup, Concordance};
use admission_audit::report::policy_markdown;
use admission_audit::synth::{generate, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let table = generate(&SynthConfig { n: 6000, ..SynthConfig::default() }, 2)?;
    let required = slice_cohort(&table, CohortGroup::TestRequired);
    let impact = policy_impact(&required, PolicyThresholds::default(), &Concordance::bundled());
    print!("{}", policy_markdown(&impact));
    println!("\n{} scatter points", impact.scatter.len());
    Ok(())
}

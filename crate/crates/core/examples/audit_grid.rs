//! The nine-cell grid: three cohort/feature scenarios by three sensitive
//! variables, ten trials per cell.

use admission_audit::audit::{run_grid, AuditGrid, AuditSpec};
use admission_audit::cohort::{CohortGroup, Concordance, FeatureScenario, SensitiveVariable};
use admission_audit::report::{grid_markdown, grid_summary};
use admission_audit::synth::{generate, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let table = generate(&SynthConfig::default(), 9)?;
    let template = AuditSpec::new(CohortGroup::AllYears, FeatureScenario::GPA_ONLY, SensitiveVariable::Gender)
        .with_trials(10)
        .with_seed(9);
    let entries = run_grid(&table, &AuditGrid::standard(), &template, &Concordance::bundled());
    print!("{}", grid_markdown(&grid_summary(&entries)));
    Ok(())
}

//! Permutation importance on the test-required cohort with GPA and test
//! scores, listed like an importance table.

use admission_audit::audit::eligible_records;
use admission_audit::cohort::{CohortGroup, Concordance, FeatureEncoder, FeatureScenario, SensitiveVariable};
use admission_audit::metrics::permutation_importance;
use admission_audit::resampling::{stratified_split, SplitPlan};
use admission_audit::svm::{train, SvmConfig};
use admission_audit::synth::{generate, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig { n: 10_000, ..SynthConfig::default() }, 11)?;
    let scenario = FeatureScenario::GPA_AND_TEST;
    let (rows, _) = eligible_records(&table, CohortGroup::TestRequired, scenario, &c);
    let (train_rows, test_rows) = stratified_split(&rows, &SplitPlan::new(SensitiveVariable::Race, 11))?;
    let enc = FeatureEncoder::fit(&train_rows, scenario, SensitiveVariable::Race, &c)?;
    let model = train(&enc.transform(&train_rows), &SvmConfig::default(), 11)?;
    let x = enc.transform(&test_rows);

    let imp = permutation_importance(&model, &x, &x.labels, 10, 11)?;
    println!("baseline accuracy {:.3} ({} repeats)\n", imp.baseline_accuracy, imp.n_repeats);
    println!("| Feature | Importance |\n|---|---|");
    for (name, v) in &imp.entries {
        println!("| {name} | {} |", admission_audit::report::short_decimal(*v));
    }
    Ok(())
}

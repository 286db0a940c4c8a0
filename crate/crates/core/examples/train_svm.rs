//! Train and calibrate the linear SVM on one cohort slice, then
//! cross-validate it.

use admission_audit::audit::eligible_records;
use admission_audit::cohort::{CohortGroup, Concordance, FeatureEncoder, FeatureScenario, SensitiveVariable};
use admission_audit::resampling::{stratified_split, SplitPlan};
use admission_audit::svm::{cross_validate, train_calibrated, SvmConfig};
use admission_audit::synth::{generate, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let c = Concordance::bundled();
    let table = generate(&SynthConfig::default(), 3)?;
    let scenario = FeatureScenario::GPA_AND_TEST;
    let (rows, excluded) = eligible_records(&table, CohortGroup::TestRequired, scenario, &c);
    println!("{} records, {excluded} excluded", rows.len());

    let (train_rows, test_rows) = stratified_split(&rows, &SplitPlan::new(SensitiveVariable::Gender, 3))?;
    let enc = FeatureEncoder::fit(&train_rows, scenario, SensitiveVariable::Gender, &c)?;
    let xtr = enc.transform(&train_rows);
    let xte = enc.transform(&test_rows);
    let cfg = SvmConfig::default();
    let model = train_calibrated(&xtr, &cfg, 3)?;
    let base = &model.base;
    println!("converged {} after {} epochs, objective {:.3}", base.converged, base.iterations_used, base.training_objective);

    let preds = model.predict(&xte)?;
    let correct = preds.iter().zip(&xte.labels).filter(|(p, l)| p == l).count();
    println!("held-out accuracy {:.3}", correct as f64 / xte.n_rows as f64);
    for (name, w) in base.column_names.iter().zip(&base.weights) {
        println!("  {name:<28} {w:+.4}");
    }
    println!("  {:<28} {:+.4}", "(intercept)", base.intercept);
    println!("platt a={:.4} b={:.4}", model.platt_a, model.platt_b);

    let cv = cross_validate(&rows, scenario, SensitiveVariable::Gender, 5, &cfg, 3, &c)?;
    println!("Cross Val: {}", cv.report());
    Ok(())
}

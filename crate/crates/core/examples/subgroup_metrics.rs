//! Confusion counts, rates, Brier score and balance for a handful of
//! hand-written predictions.

use admission_audit::metrics::{group_metrics, BalanceConditioning, SubgroupMetrics};
use admission_audit::report::table_cell;

type Getter = fn(&SubgroupMetrics) -> Option<f64>;

fn main() -> admission_audit::Result<()> {
    let y_true = [true, true, false, false, true, false, true, false];
    let probs = [0.91, 0.42, 0.18, 0.66, 0.77, 0.05, 0.58, 0.31];
    let y_pred: Vec<bool> = probs.iter().map(|&p| p > 0.5).collect();
    let in_group_a = [true, true, true, true, false, false, false, false];

    let g = group_metrics(&y_true, &y_pred, &probs, &in_group_a, BalanceConditioning::Predicted)?;
    println!("{:<10} {:>8} {:>8} {:>8}", "", "overall", "A", "B");
    let rows: [(&str, Getter); 6] = [
        ("accuracy", |m| m.accuracy),
        ("spec", |m| m.specificity),
        ("sens", |m| m.sensitivity),
        ("brier", |m| m.brier),
        ("bal neg", |m| m.balance_neg),
        ("bal pos", |m| m.balance_pos),
    ];
    for (name, get) in rows {
        println!(
            "{name:<10} {:>8} {:>8} {:>8}",
            table_cell(get(&g.overall)),
            table_cell(get(&g.group_a)),
            table_cell(get(&g.group_b))
        );
    }
    println!("\n{:?}", g.overall.confusion);
    Ok(())
}

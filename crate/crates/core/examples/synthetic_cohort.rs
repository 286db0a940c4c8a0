//! Generate a cohort, print its marginals and the first few CSV rows.
//!
//! cargo run --example synthetic_cohort -- 7 2000

use admission_audit::cohort::{write_cohort, Concordance};
use admission_audit::synth::{describe, generate, SynthConfig};

fn main() -> admission_audit::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);

    let table = generate(&SynthConfig { n, ..SynthConfig::default() }, seed)?;
    let summary = describe(&table, &Concordance::bundled())?;
    println!("{}", serde_json::to_string_pretty(&summary)?);

    let mut csv = Vec::new();
    write_cohort(&table[..5.min(table.len())], &mut csv)?;
    print!("\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}

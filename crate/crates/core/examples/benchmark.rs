// Benchmark both variants on both profiles and print plot-ready data.

use std::error::Error;

use texpand::bench::{default_configs, render, run_benchmark, ReportFormat};
use texpand::workloads::DEFAULT_SEED;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let report = run_benchmark(&default_configs(&[12, 24, 36], DEFAULT_SEED)?)?;
    for p in &report.pairs {
        println!(
            "{:8} {:3} bits: {:6} vs {:5} cycles, {:.2}x, +{:.1}%",
            p.profile.name(),
            p.n_bits,
            p.cycles_baseline,
            p.cycles_custom,
            p.improvement.speedup,
            p.improvement.improvement_pct
        );
    }
    print!("{}", render(&report, ReportFormat::Plotdat)?);
    assert!(report.all_decoded());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

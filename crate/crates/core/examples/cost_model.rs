// Closed-form cycle totals for the preset machines plus a custom one.

use std::error::Error;

use texpand::bench::{cost_model, preset_table, CostModelParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for row in preset_table() {
        let r = &row.result;
        println!(
            "{:9} baseline {:6} custom {:5} improvement {:.1}% ({}%)",
            row.name,
            r.baseline.total_cycles,
            r.custom.total_cycles,
            r.improvement.improvement_pct,
            r.improvement.improvement_pct_whole
        );
    }
    let mine = cost_model(&CostModelParams::PerCallCycles {
        baseline_cycles_per_call: 120,
        custom_cycles_per_call: 40,
        calls: 30,
    })?;
    println!("custom: {:.2}x", mine.improvement.speedup);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

// Generate the full decoder program for one profile and variant, run it,
// and check the decoded output against the reference decoder.

use std::error::Error;

use texpand::isa::ProfileKind;
use texpand::micro::DEFAULT_MAX_CYCLES;
use texpand::workloads::{build, Variant, WorkloadConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for variant in Variant::ALL {
        let cfg = WorkloadConfig::new(ProfileKind::Register, variant, 12)?;
        let built = build(&cfg)?;
        let r = built.run(DEFAULT_MAX_CYCLES)?;
        println!(
            "{variant}: received {} decoded {} ok={} cycles={} calls={}",
            cfg.received.to_pair_string(),
            r.output,
            r.decoded_ok,
            r.stats.cycles,
            r.calls
        );
        assert!(r.decoded_ok);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

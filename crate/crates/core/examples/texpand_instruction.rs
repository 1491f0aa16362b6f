// One TEXPAND instruction performs a full add-compare-select stage in
// microcode. Compare it with the software reference.

use std::error::Error;

use texpand::asm::assemble;
use texpand::convcode::{acs_step, stage_schedule, PathState, Trellis, EXAMPLE_SPEC};
use texpand::isa::layout::TexpandLayout;
use texpand::isa::{Profile, ProfileKind, TEXPAND_OPCODE};

const BASE: u32 = 0x300;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = EXAMPLE_SPEC;
    let layout = TexpandLayout::new(&spec)?;
    let init = PathState::initial(spec.n_states());
    let mask = stage_schedule(&spec, 6, 0);
    let want = acs_step(&Trellis::new(&spec), &init, 0b10, mask)?;

    for kind in ProfileKind::ALL {
        let profile = Profile::with_texpand(kind, &spec)?;
        let source = match kind {
            ProfileKind::Register => format!("ADDI R1, R0, {BASE}\nTEXPAND\nHALT\n"),
            ProfileKind::Stack => format!("sipush {BASE}\ntexpand\nhalt\n"),
        };
        let mut m = assemble(&source, &profile)?.load(&profile)?;
        layout.store(m.memory_mut(), BASE, &init, 0b10, mask);
        let stats = m.run(profile.store(), 100_000);
        let got = layout.load(m.memory(), BASE);
        println!(
            "{kind}: {} micro inside TEXPAND, {} alive states, matches reference: {}",
            stats.opcode_micro(TEXPAND_OPCODE.0),
            got.alive_count(),
            got == want
        );
        assert_eq!(got, want);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

// Assemble and run a loop on the register machine, then disassemble it.

use std::error::Error;

use texpand::asm::{assemble, disassemble};
use texpand::isa::register;

const PROGRAM: &str = "
        ADDI R1, R0, 10      ; counter
        ADDI R2, R0, 0       ; sum
loop:   ADD  R2, R2, R1
        ADDI R1, R1, -1
        BNEZ R1, loop
        SW   R2, 0(R0)
        HALT
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let profile = register::profile();
    let image = assemble(PROGRAM, &profile)?;
    let mut m = image.load(&profile)?;
    let stats = m.run(profile.store(), 1_000_000);
    println!("sum = {}", m.gpr(2));
    println!(
        "{} instructions, {} cycles",
        stats.assembly_instructions, stats.cycles
    );
    println!("{}", disassemble(&image, &profile)?);
    assert_eq!(m.gpr(2), 55);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

// The same loop on the stack machine, with locals instead of registers.

use std::error::Error;

use texpand::asm::assemble;
use texpand::isa::stack;

const PROGRAM: &str = "
        bipush 10
        istore 0        ; counter
        bipush 0
        istore 1        ; sum
loop:   iload 1
        iload 0
        iadd
        istore 1
        iinc 0, -1
        iload 0
        ifne loop
        halt
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let profile = stack::profile();
    let image = assemble(PROGRAM, &profile)?;
    let mut m = image.load(&profile)?;
    let stats = m.run(profile.store(), 1_000_000);
    let sum = m.memory()[stack::LV_BASE as usize + 1];
    println!("sum = {sum}, stack depth {}", stack::depth(&m));
    println!(
        "{} instructions, {} cycles",
        stats.assembly_instructions, stats.cycles
    );
    assert_eq!(sum, 55);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

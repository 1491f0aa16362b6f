// Build a tiny microprogrammed machine from control-store text and count
// the microinstructions each instruction costs.

use std::error::Error;

use texpand::micro::{
    parse_control_store, ControlStore, Datapath, IrField, MachineConfig, MachineState, Opcode,
};

const STORE: &str = "\
routine fetch:
    Main[pc] -> ir; pc = pc + 1; end

routine HALT:
    halt

# acc += n, n times
routine SUMTO:
    ir(12-0) -> n
top:
    acc <- acc + n
    n = n - 1
    if nonzero(n) goto top
    end
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut store = ControlStore::new(Datapath {
        registers: ["pc", "ir", "mar", "mdr", "acc", "n"]
            .map(String::from)
            .to_vec(),
        pc: "pc".into(),
        ir: "ir".into(),
        opcode_field: IrField::new(31, 23),
        gpr_count: 0,
        gpr_zero: false,
        stack: None,
    });
    let mut routines = parse_control_store(STORE)?.into_iter();
    store.set_fetch(routines.next().ok_or("no fetch")?)?;
    store.bind(Opcode::base(0), routines.next().ok_or("no HALT")?, false)?;
    store.register_custom_instruction(
        Opcode::custom(0),
        routines.next().ok_or("no SUMTO")?,
        false,
    )?;

    let sumto = (u32::from(Opcode::custom(0).0) << 23) | 10;
    let mut m = MachineState::new(&store, MachineConfig::default());
    m.memory_mut()[..2].copy_from_slice(&[sumto, 0]);
    let stats = m.run(&store, 10_000);
    println!("acc = {}", m.reg("acc").unwrap_or(0));
    println!(
        "{} instructions, {} micro + {} fetch, {} cycles",
        stats.assembly_instructions, stats.microinstructions, stats.fetch_microsteps, stats.cycles
    );
    assert_eq!(m.reg("acc"), Some(55));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}

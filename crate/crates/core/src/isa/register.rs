//! DLX-style register machine: 32 general registers with R0 fixed at zero.

use super::{bind_all, load_store, Format, InstrDef, Profile, ProfileKind};
use crate::micro::{ControlStore, Datapath, IrField, MachineConfig, Opcode};

/// Control-store text of the base instruction set.
pub const CONTROL_STORE: &str = include_str!("register.mc");

/// Register that receives the return address of `JAL`.
pub const LINK_REGISTER: u8 = 31;
/// Register holding the layout base for `TEXPAND`.
pub const TEXPAND_BASE_REGISTER: u8 = 1;

pub fn datapath() -> Datapath {
    Datapath {
        registers: ["pc", "ir", "mar", "mdr", "a", "b", "acc"]
            .map(String::from)
            .to_vec(),
        pc: "pc".into(),
        ir: "ir".into(),
        opcode_field: IrField::new(31, 23),
        gpr_count: 32,
        gpr_zero: true,
        stack: None,
    }
}

/// Base instruction definitions in opcode order.
pub fn instruction_defs() -> Vec<InstrDef> {
    use Format::*;
    let table: [(&str, Format); 25] = [
        ("HALT", None),
        ("LD", Mem),
        ("SW", Mem),
        ("ADD", Rrr),
        ("SUB", Rrr),
        ("AND", Rrr),
        ("OR", Rrr),
        ("XOR", Rrr),
        ("SLL", Rrr),
        ("SRL", Rrr),
        ("SLT", Rrr),
        ("ADDI", Rri { signed: true }),
        ("ANDI", Rri { signed: false }),
        ("ORI", Rri { signed: false }),
        ("XORI", Rri { signed: false }),
        ("SLLI", Rri { signed: false }),
        ("SRLI", Rri { signed: false }),
        ("SLTI", Rri { signed: true }),
        ("BEQZ", BranchReg),
        ("BNEZ", BranchReg),
        ("J", Jump),
        ("JAL", Jump),
        ("JR", JumpReg),
        ("TRAP", None),
        ("NOP", None),
    ];
    table
        .iter()
        .enumerate()
        .map(|(i, &(m, f))| InstrDef::new(m, Opcode::base(i as u8), f))
        .collect()
}

/// The base control store, without custom instructions.
pub fn base_isa() -> ControlStore {
    profile().store().clone()
}

pub fn profile() -> Profile {
    let (store, routines) = load_store(datapath(), CONTROL_STORE);
    let mut p = Profile::from_parts(ProfileKind::Register, store, MachineConfig::default());
    bind_all(&mut p, instruction_defs(), routines);
    p
}

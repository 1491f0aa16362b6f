//! PicoJava-style stack machine. The operand stack lives in main memory with
//! SP addressing the top word and TOS caching its value; locals sit at
//! LV + index.

use super::{bind_all, load_store, Format, InstrDef, Profile, ProfileKind};
use crate::micro::{
    ControlStore, Datapath, IrField, MachineConfig, MachineState, Opcode, StackCheck,
};

pub const CONTROL_STORE: &str = include_str!("stack.mc");

/// Base of the local-variable frame.
pub const LV_BASE: u32 = 0x1C00;
/// Address of the first (bottom) operand-stack word.
pub const STACK_BASE: u32 = 0x1D00;
/// SP value of an empty stack.
pub const EMPTY_SP: u32 = STACK_BASE - 1;

pub fn datapath() -> Datapath {
    Datapath {
        registers: ["pc", "ir", "mar", "mdr", "sp", "lv", "tos", "h"]
            .map(String::from)
            .to_vec(),
        pc: "pc".into(),
        ir: "ir".into(),
        opcode_field: IrField::new(31, 23),
        gpr_count: 0,
        gpr_zero: false,
        stack: Some(StackCheck {
            sp: "sp".into(),
            empty_sp: EMPTY_SP,
        }),
    }
}

/// Base instruction definitions in opcode order, with their stack effects.
pub fn instruction_defs() -> Vec<InstrDef> {
    use Format::*;
    let table: [(&str, Format, Option<(u32, u32)>); 29] = [
        ("halt", None, Some((0, 0))),
        ("nop", None, Some((0, 0))),
        ("iadd", None, Some((2, 1))),
        ("isub", None, Some((2, 1))),
        ("iand", None, Some((2, 1))),
        ("ior", None, Some((2, 1))),
        ("ixor", None, Some((2, 1))),
        ("ishl", None, Some((2, 1))),
        ("ishr", None, Some((2, 1))),
        ("iload", Index, Some((0, 1))),
        ("istore", Index, Some((1, 0))),
        ("bipush", Const { bits: 8 }, Some((0, 1))),
        ("sipush", Const { bits: 16 }, Some((0, 1))),
        ("dup", None, Some((1, 2))),
        ("swap", None, Some((2, 2))),
        ("pop", None, Some((1, 0))),
        ("goto", Branch, Some((0, 0))),
        ("ifeq", Branch, Some((1, 0))),
        ("ifne", Branch, Some((1, 0))),
        ("iflt", Branch, Some((1, 0))),
        ("if_icmplt", Branch, Some((2, 0))),
        ("if_icmpeq", Branch, Some((2, 0))),
        ("if_icmpne", Branch, Some((2, 0))),
        ("iinc", Iinc, Some((0, 0))),
        ("iaload", None, Some((2, 1))),
        ("iastore", None, Some((3, 0))),
        // Pushes the return address; `ret` jumps through a local.
        ("jsr", Branch, Some((0, 1))),
        ("ret", Index, Some((0, 0))),
        ("athrow", None, Option::None),
    ];
    table
        .iter()
        .enumerate()
        .map(|(i, &(m, f, eff))| {
            let d = InstrDef::new(m, Opcode::base(i as u8), f);
            match eff {
                Some((p, q)) => d.with_stack(p, q),
                Option::None => d,
            }
        })
        .collect()
}

pub fn base_isa() -> ControlStore {
    profile().store().clone()
}

pub fn profile() -> Profile {
    let (store, routines) = load_store(datapath(), CONTROL_STORE);
    let mut p = Profile::from_parts(ProfileKind::Stack, store, MachineConfig::default());
    bind_all(&mut p, instruction_defs(), routines);
    p
}

/// Empty operand stack and the local frame at [`LV_BASE`].
pub fn reset(m: &mut MachineState) {
    m.set_reg("sp", EMPTY_SP);
    m.set_reg("lv", LV_BASE);
    m.set_reg("tos", 0);
}

/// Current operand-stack depth.
pub fn depth(m: &MachineState) -> i64 {
    i64::from(m.reg("sp").unwrap_or(EMPTY_SP).wrapping_sub(EMPTY_SP) as i32)
}

/// Operand-stack contents, bottom first.
pub fn stack_contents(m: &MachineState) -> Vec<u32> {
    let d = depth(m).max(0) as usize;
    let base = STACK_BASE as usize;
    m.memory()[base..base + d].to_vec()
}

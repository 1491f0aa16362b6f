//! Microprogrammed execution core.
//!
//! A [`ControlStore`] maps opcodes to micro-routines and holds the shared
//! fetch routine; a [`MachineState`] runs programs against it and counts
//! every microinstruction it executes. Each microinstruction costs
//! [`ControlStore::cycles_per_micro`] clock cycles (4 by default).

mod machine;
pub mod op;
pub mod parse;
mod store;

pub use machine::{ExecStats, Fault, HaltReason, MachineConfig, MachineState, DEFAULT_MAX_CYCLES};
pub use op::{AluOp, Cond, IrField, MicroInstruction, MicroOp, MicroRoutine, Operand, Target};
pub use parse::parse_control_store;
pub use store::{ControlStore, Datapath, Opcode, StackCheck, CUSTOM_SLOTS};

use thiserror::Error;

use op::OpClass;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MicroError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("routine {routine}, microinstruction {index} (line {line}): {message}")]
    Routine {
        routine: String,
        index: usize,
        line: usize,
        message: String,
    },
    #[error("opcode {0} is already bound; pass the rebind flag to replace it")]
    DuplicateOpcode(u16),
    #[error("opcode {0} is outside the opcode space")]
    OpcodeOutOfRange(u32),
    #[error("routine {routine} (line {line}): unknown register '{name}'")]
    UnknownRegister {
        routine: String,
        line: usize,
        name: String,
    },
    #[error("routine {routine} (line {line}): general register access on a datapath without general registers")]
    NoGeneralRegisters { routine: String, line: usize },
    #[error("scratch register '{0}' clashes with a profile register")]
    ScratchClash(String),
    #[error("control store has no fetch routine")]
    MissingFetch,
    #[error("no routine named '{0}'")]
    MissingRoutine(String),
}

/// Structural checks shared by parsed and programmatically built routines:
/// bundle limits, control placement, label targets, and that no path can
/// run off the end of the routine.
pub(crate) fn validate_routine(r: &MicroRoutine) -> Result<(), MicroError> {
    let fail = |index: usize, message: String| MicroError::Routine {
        routine: r.name.clone(),
        index,
        line: r.instructions.get(index).map_or(0, |i| i.line),
        message,
    };
    if r.instructions.is_empty() {
        return Err(fail(0, "routine has no microinstructions".into()));
    }
    for (idx, instr) in r.instructions.iter().enumerate() {
        if instr.ops.is_empty() {
            return Err(fail(idx, "empty microinstruction".into()));
        }
        let mut seen = [0usize; 4];
        for (pos, op) in instr.ops.iter().enumerate() {
            let class = op.class();
            let slot = match class {
                OpClass::Transfer => 0,
                OpClass::Alu => 1,
                OpClass::Memory => 2,
                OpClass::Control => 3,
            };
            seen[slot] += 1;
            if seen[slot] > 1 {
                return Err(fail(
                    idx,
                    format!("more than one {class:?} operation in one microinstruction"),
                ));
            }
            if class == OpClass::Control && pos + 1 != instr.ops.len() {
                return Err(fail(idx, "sequencing operation must come last".into()));
            }
            let target = match op {
                MicroOp::Branch { target, .. } | MicroOp::Jump { target } => Some(target),
                _ => None,
            };
            if let Some(t) = target {
                if !r.labels.contains_key(t) {
                    return Err(fail(idx, format!("unknown micro label '{t}'")));
                }
            }
        }
    }
    let last = r.instructions.last().unwrap();
    if !last.ops.last().is_some_and(MicroOp::is_terminal) {
        return Err(fail(
            r.instructions.len() - 1,
            "last microinstruction must end with end, halt, fault or goto".into(),
        ));
    }
    Ok(())
}

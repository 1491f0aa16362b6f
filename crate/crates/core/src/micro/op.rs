use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AluOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Shl,
    /// Logical shift right.
    Shr,
    /// Signed minimum.
    Min,
    /// Signed less-than, yielding 1 or 0.
    Cmp,
    /// Passes the first operand through the ALU unchanged.
    Pass,
}

impl AluOp {
    pub fn apply(self, a: u32, b: u32) -> u32 {
        match self {
            AluOp::Add => a.wrapping_add(b),
            AluOp::Sub => a.wrapping_sub(b),
            AluOp::And => a & b,
            AluOp::Or => a | b,
            AluOp::Xor => a ^ b,
            AluOp::Shl => a.wrapping_shl(b & 31),
            AluOp::Shr => a.wrapping_shr(b & 31),
            AluOp::Min => (a as i32).min(b as i32) as u32,
            AluOp::Cmp => u32::from((a as i32) < (b as i32)),
            AluOp::Pass => a,
        }
    }

    fn symbol(self) -> Option<&'static str> {
        Some(match self {
            AluOp::Add => "+",
            AluOp::Sub => "-",
            AluOp::And => "&",
            AluOp::Or => "|",
            AluOp::Xor => "^",
            AluOp::Shl => "<<",
            AluOp::Shr => ">>",
            AluOp::Cmp => "<",
            AluOp::Min | AluOp::Pass => return None,
        })
    }

    pub(crate) fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "+" => AluOp::Add,
            "-" => AluOp::Sub,
            "&" => AluOp::And,
            "|" => AluOp::Or,
            "^" => AluOp::Xor,
            "<<" => AluOp::Shl,
            ">>" => AluOp::Shr,
            "<" => AluOp::Cmp,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cond {
    Zero,
    NonZero,
    Neg,
    Ge,
}

impl Cond {
    pub fn holds(self, v: u32) -> bool {
        match self {
            Cond::Zero => v == 0,
            Cond::NonZero => v != 0,
            Cond::Neg => (v as i32) < 0,
            Cond::Ge => (v as i32) >= 0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Cond::Zero => "zero",
            Cond::NonZero => "nonzero",
            Cond::Neg => "neg",
            Cond::Ge => "ge",
        }
    }

    pub(crate) fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "zero" => Cond::Zero,
            "nonzero" => Cond::NonZero,
            "neg" => Cond::Neg,
            "ge" => Cond::Ge,
            _ => return None,
        })
    }
}

/// Bit range of the instruction register, bit 0 least significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IrField {
    pub hi: u8,
    pub lo: u8,
}

impl IrField {
    pub fn new(a: u8, b: u8) -> Self {
        Self {
            hi: a.max(b),
            lo: a.min(b),
        }
    }

    pub fn width(&self) -> u32 {
        u32::from(self.hi - self.lo) + 1
    }

    pub fn extract(&self, word: u32, signed: bool) -> u32 {
        let width = self.width();
        let raw = if width >= 32 {
            word
        } else {
            (word >> self.lo) & ((1 << width) - 1)
        };
        if signed && width < 32 {
            let shift = 32 - width;
            (((raw << shift) as i32) >> shift) as u32
        } else {
            raw
        }
    }
}

/// A value read by a micro-operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    /// Datapath register by name.
    Reg(String),
    /// Instruction-register bit field, `ir(hi-lo)` or sign-extended `irs(hi-lo)`.
    Field {
        field: IrField,
        signed: bool,
    },
    /// General register selected by an instruction field, `reg[ir(hi-lo)]`.
    GprAt(IrField),
    /// Fixed general register, `rN`.
    Gpr(u8),
    Imm(u32),
}

/// A location written by a micro-operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Reg(String),
    GprAt(IrField),
    Gpr(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MicroOp {
    /// Bus move: `src -> dst[, dst...]`.
    Transfer {
        src: Operand,
        dsts: Vec<Target>,
    },
    /// `dst = ... = a OP b`, or `dst <- a OP b`.
    Alu {
        op: AluOp,
        a: Operand,
        b: Operand,
        dsts: Vec<Target>,
    },
    /// `Main[addr] -> data`.
    MemRead {
        addr: String,
        data: Target,
    },
    /// `data -> Main[addr]`.
    MemWrite {
        addr: String,
        data: Operand,
    },
    /// `if cond(value) goto target`.
    Branch {
        cond: Cond,
        value: Operand,
        target: String,
    },
    Jump {
        target: String,
    },
    /// Completes the current instruction.
    End,
    /// Completes the current instruction and stops the machine.
    Halt,
    /// Stops the machine with a fault.
    Fault {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum OpClass {
    Transfer,
    Alu,
    Memory,
    Control,
}

impl MicroOp {
    pub(crate) fn class(&self) -> OpClass {
        match self {
            MicroOp::Transfer { .. } => OpClass::Transfer,
            MicroOp::Alu { .. } => OpClass::Alu,
            MicroOp::MemRead { .. } | MicroOp::MemWrite { .. } => OpClass::Memory,
            _ => OpClass::Control,
        }
    }

    /// True for control operations after which execution never falls through.
    pub(crate) fn is_terminal(&self) -> bool {
        matches!(
            self,
            MicroOp::Jump { .. } | MicroOp::End | MicroOp::Halt | MicroOp::Fault { .. }
        )
    }
}

/// One control-store word: up to one transfer, one ALU operation, one memory
/// access and one sequencing operation, executed in the listed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroInstruction {
    pub ops: Vec<MicroOp>,
    /// 1-based source line, 0 when built in code.
    pub line: usize,
}

impl MicroInstruction {
    pub fn new(ops: Vec<MicroOp>) -> Self {
        Self { ops, line: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroRoutine {
    pub name: String,
    /// Datapath registers this routine needs beyond the profile's own.
    pub scratch: Vec<String>,
    /// Operand-stack words that must be present before the routine starts.
    pub stack_inputs: u32,
    pub instructions: Vec<MicroInstruction>,
    /// Label -> instruction index.
    pub labels: BTreeMap<String, usize>,
}

impl MicroRoutine {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            scratch: Vec::new(),
            stack_inputs: 0,
            instructions: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

impl fmt::Display for IrField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}-{})", self.hi, self.lo)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => f.write_str(r),
            Operand::Field { field, signed } => {
                write!(f, "{}{field}", if *signed { "irs" } else { "ir" })
            }
            Operand::GprAt(field) => write!(f, "reg[ir{field}]"),
            Operand::Gpr(n) => write!(f, "r{n}"),
            Operand::Imm(v) => {
                let signed = *v as i32;
                if (-0x1_0000..=0xFFFF).contains(&signed) {
                    write!(f, "{signed}")
                } else {
                    write!(f, "{v:#x}")
                }
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Reg(r) => f.write_str(r),
            Target::GprAt(field) => write!(f, "reg[ir{field}]"),
            Target::Gpr(n) => write!(f, "r{n}"),
        }
    }
}

impl fmt::Display for MicroOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MicroOp::Transfer { src, dsts } => {
                write!(f, "{src} -> ")?;
                for (i, d) in dsts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            MicroOp::Alu { op, a, b, dsts } => {
                for d in dsts {
                    write!(f, "{d} = ")?;
                }
                match (op, op.symbol()) {
                    (AluOp::Pass, _) => write!(f, "{a}"),
                    (AluOp::Min, _) => write!(f, "min({a}, {b})"),
                    (_, Some(sym)) => write!(f, "{a} {sym} {b}"),
                    (_, None) => unreachable!(),
                }
            }
            MicroOp::MemRead { addr, data } => write!(f, "Main[{addr}] -> {data}"),
            MicroOp::MemWrite { addr, data } => write!(f, "{data} -> Main[{addr}]"),
            MicroOp::Branch {
                cond,
                value,
                target,
            } => write!(f, "if {}({value}) goto {target}", cond.name()),
            MicroOp::Jump { target } => write!(f, "goto {target}"),
            MicroOp::End => f.write_str("end"),
            MicroOp::Halt => f.write_str("halt"),
            MicroOp::Fault { reason } => write!(f, "fault {reason}"),
        }
    }
}

impl fmt::Display for MicroRoutine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "routine {}", self.name)?;
        if self.stack_inputs > 0 {
            write!(f, " pops={}", self.stack_inputs)?;
        }
        writeln!(f, ":")?;
        if !self.scratch.is_empty() {
            writeln!(f, "    scratch: {}", self.scratch.join(" "))?;
        }
        let mut labels_at: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for (label, &idx) in &self.labels {
            labels_at.entry(idx).or_default().push(label);
        }
        for (idx, instr) in self.instructions.iter().enumerate() {
            for label in labels_at.get(&idx).into_iter().flatten() {
                writeln!(f, "{label}:")?;
            }
            let ops: Vec<String> = instr.ops.iter().map(|o| o.to_string()).collect();
            writeln!(f, "    {}", ops.join("; "))?;
        }
        Ok(())
    }
}

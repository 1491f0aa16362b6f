use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::op::{AluOp, Cond, IrField, MicroOp, MicroRoutine, Operand, Target};
use super::{validate_routine, MicroError};

/// Number of opcodes reserved for custom instructions, above the 256 base
/// opcodes.
pub const CUSTOM_SLOTS: u16 = 256;
const BASE_OPCODES: u16 = 256;

/// A 9-bit opcode: `0..256` base, `256..512` custom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Opcode(pub u16);

impl Opcode {
    pub const fn base(n: u8) -> Self {
        Self(n as u16)
    }

    /// Custom slot `n`. Slots at or above [`CUSTOM_SLOTS`] produce an opcode
    /// that binding rejects.
    pub const fn custom(slot: u16) -> Self {
        Self(BASE_OPCODES + slot)
    }

    pub fn is_custom(self) -> bool {
        self.0 >= BASE_OPCODES
    }

    pub fn in_range(self) -> bool {
        self.0 < BASE_OPCODES + CUSTOM_SLOTS
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_custom() {
            write!(f, "custom{}", self.0 - BASE_OPCODES)
        } else {
            write!(f, "{:#04x}", self.0)
        }
    }
}

/// Hardware stack-depth check applied before an instruction's routine runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackCheck {
    /// Stack pointer register name.
    pub sp: String,
    /// Stack pointer value when the stack is empty.
    pub empty_sp: u32,
}

/// Fixed description of the hardware a control store drives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datapath {
    pub registers: Vec<String>,
    pub pc: String,
    pub ir: String,
    pub opcode_field: IrField,
    pub gpr_count: usize,
    /// General register 0 reads as zero and ignores writes.
    pub gpr_zero: bool,
    pub stack: Option<StackCheck>,
}

#[derive(Debug, Clone)]
pub(crate) enum Src {
    Reg(usize),
    Field(IrField, bool),
    GprAt(IrField),
    Gpr(usize),
    Imm(u32),
}

#[derive(Debug, Clone)]
pub(crate) enum Dst {
    Reg(usize),
    GprAt(IrField),
    Gpr(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum Step {
    Transfer(Src, Vec<Dst>),
    Alu(AluOp, Src, Src, Vec<Dst>),
    Read(usize, Dst),
    Write(usize, Src),
}

#[derive(Debug, Clone)]
pub(crate) enum Next {
    Fall,
    End,
    Halt,
    Fault(String),
    Jump(usize),
    Branch(Cond, Src, usize),
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledInstr {
    pub steps: Vec<Step>,
    pub next: Next,
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub instrs: Vec<CompiledInstr>,
    pub stack_inputs: u32,
}

#[derive(Debug, Clone)]
struct Bound {
    routine: MicroRoutine,
    compiled: Compiled,
}

/// Opcode -> micro-routine table plus the fetch routine.
#[derive(Debug, Clone)]
pub struct ControlStore {
    datapath: Datapath,
    registers: Vec<String>,
    reg_index: HashMap<String, usize>,
    fetch: Option<Bound>,
    routines: BTreeMap<Opcode, Bound>,
    cycles_per_micro: u64,
}

impl ControlStore {
    pub fn new(datapath: Datapath) -> Self {
        let registers: Vec<String> = datapath
            .registers
            .iter()
            .map(|r| r.to_ascii_lowercase())
            .collect();
        let reg_index = registers
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect();
        Self {
            datapath,
            registers,
            reg_index,
            fetch: None,
            routines: BTreeMap::new(),
            cycles_per_micro: 4,
        }
    }

    pub fn datapath(&self) -> &Datapath {
        &self.datapath
    }

    pub fn cycles_per_micro(&self) -> u64 {
        self.cycles_per_micro
    }

    pub fn set_cycles_per_micro(&mut self, cycles: u64) {
        self.cycles_per_micro = cycles;
    }

    /// All datapath register names, profile registers first, then scratch
    /// registers in the order routines declared them.
    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn register_index(&self, name: &str) -> Option<usize> {
        self.reg_index.get(&name.to_ascii_lowercase()).copied()
    }

    pub fn set_fetch(&mut self, routine: MicroRoutine) -> Result<(), MicroError> {
        let compiled = self.compile(&routine)?;
        self.fetch = Some(Bound { routine, compiled });
        Ok(())
    }

    pub fn fetch_routine(&self) -> Option<&MicroRoutine> {
        self.fetch.as_ref().map(|b| &b.routine)
    }

    /// Binds `opcode` to `routine`. Replacing an existing binding requires
    /// `rebind`.
    pub fn bind(
        &mut self,
        opcode: Opcode,
        routine: MicroRoutine,
        rebind: bool,
    ) -> Result<(), MicroError> {
        if !opcode.in_range() {
            return Err(MicroError::OpcodeOutOfRange(u32::from(opcode.0)));
        }
        if self.routines.contains_key(&opcode) && !rebind {
            return Err(MicroError::DuplicateOpcode(opcode.0));
        }
        let compiled = self.compile(&routine)?;
        self.routines.insert(opcode, Bound { routine, compiled });
        Ok(())
    }

    /// Extension point for custom instructions. Identical to [`bind`](Self::bind);
    /// kept separate so call sites read as ISA extensions.
    pub fn register_custom_instruction(
        &mut self,
        opcode: Opcode,
        routine: MicroRoutine,
        rebind: bool,
    ) -> Result<(), MicroError> {
        self.bind(opcode, routine, rebind)
    }

    pub fn routine(&self, opcode: Opcode) -> Option<&MicroRoutine> {
        self.routines.get(&opcode).map(|b| &b.routine)
    }

    pub fn opcodes(&self) -> impl Iterator<Item = Opcode> + '_ {
        self.routines.keys().copied()
    }

    pub(crate) fn compiled(&self, opcode: Opcode) -> Option<&Compiled> {
        self.routines.get(&opcode).map(|b| &b.compiled)
    }

    pub(crate) fn compiled_fetch(&self) -> Option<&Compiled> {
        self.fetch.as_ref().map(|b| &b.compiled)
    }

    pub fn decode_opcode(&self, word: u32) -> Opcode {
        Opcode(self.datapath.opcode_field.extract(word, false) as u16)
    }

    /// Text form of every routine, fetch first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(f) = &self.fetch {
            out.push_str(&f.routine.to_string());
        }
        for b in self.routines.values() {
            out.push('\n');
            out.push_str(&b.routine.to_string());
        }
        out
    }

    fn compile(&mut self, routine: &MicroRoutine) -> Result<Compiled, MicroError> {
        validate_routine(routine)?;
        for name in &routine.scratch {
            let name = name.to_ascii_lowercase();
            let profile_reg = self
                .datapath
                .registers
                .iter()
                .any(|r| r.eq_ignore_ascii_case(&name));
            if profile_reg {
                return Err(MicroError::ScratchClash(name));
            }
            if !self.reg_index.contains_key(&name) {
                self.reg_index.insert(name.clone(), self.registers.len());
                self.registers.push(name);
            }
        }
        let mut instrs = Vec::with_capacity(routine.instructions.len());
        for instr in &routine.instructions {
            let ctx = Ctx {
                store: self,
                routine: &routine.name,
                line: instr.line,
            };
            let mut steps = Vec::new();
            let mut next = Next::Fall;
            for op in &instr.ops {
                match op {
                    MicroOp::Transfer { src, dsts } => {
                        steps.push(Step::Transfer(ctx.src(src)?, ctx.dsts(dsts)?))
                    }
                    MicroOp::Alu { op, a, b, dsts } => {
                        steps.push(Step::Alu(*op, ctx.src(a)?, ctx.src(b)?, ctx.dsts(dsts)?))
                    }
                    MicroOp::MemRead { addr, data } => {
                        steps.push(Step::Read(ctx.reg(addr)?, ctx.dst(data)?))
                    }
                    MicroOp::MemWrite { addr, data } => {
                        steps.push(Step::Write(ctx.reg(addr)?, ctx.src(data)?))
                    }
                    MicroOp::Branch {
                        cond,
                        value,
                        target,
                    } => next = Next::Branch(*cond, ctx.src(value)?, routine.labels[target]),
                    MicroOp::Jump { target } => next = Next::Jump(routine.labels[target]),
                    MicroOp::End => next = Next::End,
                    MicroOp::Halt => next = Next::Halt,
                    MicroOp::Fault { reason } => next = Next::Fault(reason.clone()),
                }
            }
            instrs.push(CompiledInstr { steps, next });
        }
        Ok(Compiled {
            instrs,
            stack_inputs: routine.stack_inputs,
        })
    }
}

struct Ctx<'a> {
    store: &'a ControlStore,
    routine: &'a str,
    line: usize,
}

impl Ctx<'_> {
    fn reg(&self, name: &str) -> Result<usize, MicroError> {
        self.store
            .register_index(name)
            .ok_or_else(|| MicroError::UnknownRegister {
                routine: self.routine.to_string(),
                line: self.line,
                name: name.to_string(),
            })
    }

    fn gpr(&self, n: Option<u8>) -> Result<usize, MicroError> {
        if self.store.datapath.gpr_count == 0
            || n.is_some_and(|n| usize::from(n) >= self.store.datapath.gpr_count)
        {
            return Err(MicroError::NoGeneralRegisters {
                routine: self.routine.to_string(),
                line: self.line,
            });
        }
        Ok(n.map_or(0, usize::from))
    }

    fn src(&self, o: &Operand) -> Result<Src, MicroError> {
        Ok(match o {
            Operand::Reg(r) => Src::Reg(self.reg(r)?),
            Operand::Field { field, signed } => Src::Field(*field, *signed),
            Operand::GprAt(f) => {
                self.gpr(None)?;
                Src::GprAt(*f)
            }
            Operand::Gpr(n) => Src::Gpr(self.gpr(Some(*n))?),
            Operand::Imm(v) => Src::Imm(*v),
        })
    }

    fn dst(&self, t: &Target) -> Result<Dst, MicroError> {
        Ok(match t {
            Target::Reg(r) => Dst::Reg(self.reg(r)?),
            Target::GprAt(f) => {
                self.gpr(None)?;
                Dst::GprAt(*f)
            }
            Target::Gpr(n) => Dst::Gpr(self.gpr(Some(*n))?),
        })
    }

    fn dsts(&self, ts: &[Target]) -> Result<Vec<Dst>, MicroError> {
        ts.iter().map(|t| self.dst(t)).collect()
    }
}

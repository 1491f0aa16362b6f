//! Instruction-set profiles: a control store plus the assembly-level view of
//! each instruction (mnemonic, operand format, encoding).
//!
//! Both profiles use one 32-bit word per instruction with a 9-bit opcode in
//! bits 31..23. Opcodes 256.. are custom slots; slot 0 holds `TEXPAND`.

pub mod expand;
pub mod layout;
pub mod register;
pub mod stack;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convcode::EncoderSpec;
use crate::micro::{ControlStore, MachineConfig, MachineState, MicroError, MicroRoutine, Opcode};

pub use layout::TexpandLayout;

/// Opcode used for the trellis-expansion instruction on both profiles.
pub const TEXPAND_OPCODE: Opcode = Opcode::custom(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Register,
    Stack,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 2] = [ProfileKind::Register, ProfileKind::Stack];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Register => "register",
            ProfileKind::Stack => "stack",
        }
    }

    /// Source file extension for this profile's assembly.
    pub fn extension(self) -> &'static str {
        match self {
            ProfileKind::Register => "rasm",
            ProfileKind::Stack => "sasm",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = IsaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "register" | "reg" | "dlx" => Ok(ProfileKind::Register),
            "stack" | "picojava" => Ok(ProfileKind::Stack),
            _ => Err(IsaError::UnknownProfile(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error(transparent)]
    Micro(#[from] MicroError),
    #[error("unknown profile '{0}'")]
    UnknownProfile(String),
    #[error("mnemonic '{0}' is already defined")]
    DuplicateMnemonic(String),
    #[error("{mnemonic}: expected {expected} operand(s), got {got}")]
    Arity {
        mnemonic: String,
        expected: usize,
        got: usize,
    },
    #[error("{mnemonic}: operand {value} out of range {min}..={max}")]
    OperandRange {
        mnemonic: String,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("program image does not fit in {words} words of memory")]
    ImageTooLarge { words: usize },
    #[error("texpand supports 2 to 32 trellis states, got {0}")]
    TexpandStates(usize),
}

/// Assembly operand format of an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    /// No operands.
    None,
    /// `rd, rs1, rs2`
    Rrr,
    /// `rd, rs1, imm13`
    Rri { signed: bool },
    /// `rd, imm13(rs1)`
    Mem,
    /// `rs1, label`; 13-bit offset from the next instruction.
    BranchReg,
    /// `label`; absolute 23-bit target.
    Jump,
    /// `rs1`
    JumpReg,
    /// Unsigned 16-bit local-variable index.
    Index,
    /// Signed constant of the given width.
    Const { bits: u8 },
    /// `label`; 16-bit offset from the next instruction.
    Branch,
    /// `index, const`: 8-bit index, signed 8-bit constant.
    Iinc,
}

/// Operand slot kind, used by the assembler to parse operand text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Reg,
    Imm,
    /// Branch target, encoded relative to the following instruction.
    RelLabel,
    /// Jump target, encoded as an absolute address.
    AbsLabel,
}

impl Format {
    /// Operand slots in source order. `Mem` is written `rd, imm(rs1)` and
    /// listed here as `[rd, imm, rs1]`.
    pub fn slots(self) -> &'static [Slot] {
        use Slot::*;
        match self {
            Format::None => &[],
            Format::Rrr => &[Reg, Reg, Reg],
            Format::Rri { .. } => &[Reg, Reg, Imm],
            Format::Mem => &[Reg, Imm, Reg],
            Format::BranchReg => &[Reg, RelLabel],
            Format::Jump => &[AbsLabel],
            Format::JumpReg => &[Reg],
            Format::Index | Format::Const { .. } => &[Imm],
            Format::Branch => &[RelLabel],
            Format::Iinc => &[Imm, Imm],
        }
    }

    fn ranges(self) -> Vec<(i64, i64)> {
        const REG: (i64, i64) = (0, 31);
        const S13: (i64, i64) = (-4096, 4095);
        const S16: (i64, i64) = (-32768, 32767);
        match self {
            Format::None => vec![],
            Format::Rrr => vec![REG, REG, REG],
            Format::Rri { signed: true } => vec![REG, REG, S13],
            Format::Rri { signed: false } => vec![REG, REG, (0, 8191)],
            Format::Mem => vec![REG, S13, REG],
            Format::BranchReg => vec![REG, S13],
            Format::Jump => vec![(0, (1 << 23) - 1)],
            Format::JumpReg => vec![REG],
            Format::Index => vec![(0, 65535)],
            Format::Const { bits } => {
                let half = 1i64 << (bits - 1);
                vec![(-half, half - 1)]
            }
            Format::Branch => vec![S16],
            Format::Iinc => vec![(0, 255), (-128, 127)],
        }
    }

    /// Packs operand values (in [`slots`](Self::slots) order, relative
    /// targets already converted to offsets) under `opcode`.
    pub fn encode(self, mnemonic: &str, opcode: Opcode, args: &[i64]) -> Result<u32, IsaError> {
        let ranges = self.ranges();
        if args.len() != ranges.len() {
            return Err(IsaError::Arity {
                mnemonic: mnemonic.to_string(),
                expected: ranges.len(),
                got: args.len(),
            });
        }
        for (&v, &(min, max)) in args.iter().zip(&ranges) {
            if v < min || v > max {
                return Err(IsaError::OperandRange {
                    mnemonic: mnemonic.to_string(),
                    value: v,
                    min,
                    max,
                });
            }
        }
        let u = |v: i64, bits: u32| (v as u32) & ((1u32 << bits) - 1);
        let body = match self {
            Format::None => 0,
            Format::Rrr => u(args[0], 5) << 18 | u(args[1], 5) << 13 | u(args[2], 5) << 8,
            Format::Rri { .. } => u(args[0], 5) << 18 | u(args[1], 5) << 13 | u(args[2], 13),
            Format::Mem => u(args[0], 5) << 18 | u(args[2], 5) << 13 | u(args[1], 13),
            Format::BranchReg => u(args[0], 5) << 13 | u(args[1], 13),
            Format::Jump => u(args[0], 23),
            Format::JumpReg => u(args[0], 5) << 13,
            Format::Index | Format::Const { .. } | Format::Branch => u(args[0], 16),
            Format::Iinc => u(args[0], 8) << 8 | u(args[1], 8),
        };
        Ok(u32::from(opcode.0) << 23 | body)
    }

    /// Inverse of [`encode`](Self::encode): operand values in slot order.
    pub fn decode(self, word: u32) -> Vec<i64> {
        let bits = |hi: u32, lo: u32| i64::from((word >> lo) & ((1u32 << (hi - lo + 1)) - 1));
        let sbits = |hi: u32, lo: u32| {
            let w = hi - lo + 1;
            let v = (word >> lo) & ((1u32 << w) - 1);
            i64::from(((v << (32 - w)) as i32) >> (32 - w))
        };
        match self {
            Format::None => vec![],
            Format::Rrr => vec![bits(22, 18), bits(17, 13), bits(12, 8)],
            Format::Rri { signed: true } => vec![bits(22, 18), bits(17, 13), sbits(12, 0)],
            Format::Rri { signed: false } => vec![bits(22, 18), bits(17, 13), bits(12, 0)],
            Format::Mem => vec![bits(22, 18), sbits(12, 0), bits(17, 13)],
            Format::BranchReg => vec![bits(17, 13), sbits(12, 0)],
            Format::Jump => vec![bits(22, 0)],
            Format::JumpReg => vec![bits(17, 13)],
            Format::Index => vec![bits(15, 0)],
            Format::Const { bits: b } => vec![sbits(u32::from(b) - 1, 0)],
            Format::Branch => vec![sbits(15, 0)],
            Format::Iinc => vec![bits(15, 8), sbits(7, 0)],
        }
    }
}

/// Net operand-stack effect of a stack-profile instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackEffect {
    pub pops: u32,
    pub pushes: u32,
}

impl StackEffect {
    pub const fn new(pops: u32, pushes: u32) -> Self {
        Self { pops, pushes }
    }

    pub fn delta(self) -> i64 {
        i64::from(self.pushes) - i64::from(self.pops)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrDef {
    pub mnemonic: String,
    pub opcode: Opcode,
    pub format: Format,
    /// Stack profile only. `None` for control transfers with no fixed effect
    /// on depth beyond what is listed (e.g. `ret`).
    pub stack: Option<StackEffect>,
}

impl InstrDef {
    pub fn new(mnemonic: &str, opcode: Opcode, format: Format) -> Self {
        Self {
            mnemonic: mnemonic.to_string(),
            opcode,
            format,
            stack: None,
        }
    }

    pub fn with_stack(mut self, pops: u32, pushes: u32) -> Self {
        self.stack = Some(StackEffect::new(pops, pushes));
        self
    }
}

/// A complete instruction-set profile.
#[derive(Debug, Clone)]
pub struct Profile {
    kind: ProfileKind,
    store: ControlStore,
    instrs: Vec<InstrDef>,
    by_mnemonic: HashMap<String, usize>,
    by_opcode: HashMap<Opcode, usize>,
    config: MachineConfig,
}

impl Profile {
    pub fn new(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Register => register::profile(),
            ProfileKind::Stack => stack::profile(),
        }
    }

    /// Base profile extended with `TEXPAND` for the trellis of `spec`.
    pub fn with_texpand(kind: ProfileKind, spec: &EncoderSpec) -> Result<Self, IsaError> {
        let mut p = Self::new(kind);
        let routine = expand::texpand_routine(kind, &TexpandLayout::new(spec)?, spec)?;
        let def = InstrDef::new(expand::mnemonic(kind), TEXPAND_OPCODE, Format::None);
        let def = match kind {
            ProfileKind::Register => def,
            ProfileKind::Stack => def.with_stack(1, 0),
        };
        p.add_instruction(def, routine, false)?;
        Ok(p)
    }

    pub(crate) fn from_parts(
        kind: ProfileKind,
        store: ControlStore,
        config: MachineConfig,
    ) -> Self {
        Self {
            kind,
            store,
            instrs: Vec::new(),
            by_mnemonic: HashMap::new(),
            by_opcode: HashMap::new(),
            config,
        }
    }

    /// Records `def` and binds its routine. A new mnemonic on an occupied
    /// opcode, or an existing mnemonic, needs `rebind`.
    pub fn add_instruction(
        &mut self,
        def: InstrDef,
        routine: MicroRoutine,
        rebind: bool,
    ) -> Result<(), IsaError> {
        let key = def.mnemonic.to_ascii_lowercase();
        if self.by_mnemonic.contains_key(&key) && !rebind {
            return Err(IsaError::DuplicateMnemonic(def.mnemonic));
        }
        if def.opcode.is_custom() {
            self.store
                .register_custom_instruction(def.opcode, routine, rebind)?;
        } else {
            self.store.bind(def.opcode, routine, rebind)?;
        }
        if let Some(old) = self.by_opcode.remove(&def.opcode) {
            self.by_mnemonic
                .remove(&self.instrs[old].mnemonic.to_ascii_lowercase());
        }
        let idx = match self.by_mnemonic.get(&key) {
            Some(&i) => {
                self.by_opcode.remove(&self.instrs[i].opcode);
                self.instrs[i] = def.clone();
                i
            }
            None => {
                self.instrs.push(def.clone());
                self.instrs.len() - 1
            }
        };
        self.by_mnemonic.insert(key, idx);
        self.by_opcode.insert(def.opcode, idx);
        Ok(())
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn store(&self) -> &ControlStore {
        &self.store
    }

    pub fn config(&self) -> MachineConfig {
        self.config
    }

    pub fn instructions(&self) -> impl Iterator<Item = &InstrDef> {
        self.by_opcode_sorted().into_iter().map(|i| &self.instrs[i])
    }

    fn by_opcode_sorted(&self) -> Vec<usize> {
        let mut v: Vec<_> = self.by_opcode.iter().map(|(&op, &i)| (op, i)).collect();
        v.sort();
        v.into_iter().map(|(_, i)| i).collect()
    }

    /// Case-insensitive mnemonic lookup.
    pub fn lookup(&self, mnemonic: &str) -> Option<&InstrDef> {
        self.by_mnemonic
            .get(&mnemonic.to_ascii_lowercase())
            .map(|&i| &self.instrs[i])
    }

    pub fn by_opcode(&self, opcode: Opcode) -> Option<&InstrDef> {
        self.by_opcode.get(&opcode).map(|&i| &self.instrs[i])
    }

    pub fn has_texpand(&self) -> bool {
        self.by_opcode.contains_key(&TEXPAND_OPCODE)
    }

    /// Static length of an instruction's micro-routine.
    pub fn routine_len(&self, mnemonic: &str) -> Option<usize> {
        let def = self.lookup(mnemonic)?;
        self.store.routine(def.opcode).map(MicroRoutine::len)
    }

    /// Fresh machine with `code` at address 0, `data` words placed, `pc` at
    /// `entry` and profile registers at their reset values.
    pub fn boot(
        &self,
        code: &[u32],
        data: &[(u32, u32)],
        entry: u32,
    ) -> Result<MachineState, IsaError> {
        let words = self.config.memory_words;
        let mut m = MachineState::new(&self.store, self.config);
        if code.len() > words || data.iter().any(|&(a, _)| a as usize >= words) {
            return Err(IsaError::ImageTooLarge { words });
        }
        m.memory_mut()[..code.len()].copy_from_slice(code);
        for &(addr, word) in data {
            m.memory_mut()[addr as usize] = word;
        }
        m.set_pc(entry);
        if self.kind == ProfileKind::Stack {
            stack::reset(&mut m);
        }
        Ok(m)
    }
}

/// Parses an embedded control-store file into a store on `datapath` and the
/// routines by name.
pub(crate) fn load_store(
    datapath: crate::micro::Datapath,
    text: &str,
) -> (ControlStore, HashMap<String, MicroRoutine>) {
    let mut store = ControlStore::new(datapath);
    let mut routines = HashMap::new();
    for r in crate::micro::parse_control_store(text).expect("embedded control store parses") {
        if r.name.eq_ignore_ascii_case("fetch") {
            store.set_fetch(r).expect("fetch routine compiles");
        } else {
            routines.insert(r.name.to_ascii_lowercase(), r);
        }
    }
    (store, routines)
}

/// Binds every definition to the routine of the same name.
pub(crate) fn bind_all(
    profile: &mut Profile,
    defs: Vec<InstrDef>,
    mut routines: HashMap<String, MicroRoutine>,
) {
    for def in defs {
        let r = routines
            .remove(&def.mnemonic.to_ascii_lowercase())
            .unwrap_or_else(|| panic!("no routine for {}", def.mnemonic));
        profile
            .add_instruction(def, r, false)
            .expect("base instruction binds");
    }
    assert!(
        routines.is_empty(),
        "unbound routines: {:?}",
        routines.keys()
    );
}

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::store::{Compiled, ControlStore, Dst, Next, Src, Step};

/// Runaway-microcode guard used when no explicit limit is given.
pub const DEFAULT_MAX_CYCLES: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineConfig {
    pub memory_words: usize,
    pub max_cycles: u64,
}

impl Default for MachineConfig {
    fn default() -> Self {
        Self {
            memory_words: 8192,
            max_cycles: DEFAULT_MAX_CYCLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fault {
    IllegalInstruction {
        pc: u32,
        opcode: u16,
    },
    MemoryFault {
        pc: u32,
        addr: u32,
    },
    StackUnderflow {
        pc: u32,
        depth: i64,
        needed: u32,
    },
    /// Raised by a `fault` micro-operation.
    Trap {
        pc: u32,
        reason: String,
    },
    NoFetchRoutine,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::IllegalInstruction { pc, opcode } => {
                write!(f, "illegal instruction (opcode {opcode}) at {pc:#x}")
            }
            Fault::MemoryFault { pc, addr } => {
                write!(f, "memory fault: address {addr:#x} at pc {pc:#x}")
            }
            Fault::StackUnderflow { pc, depth, needed } => {
                write!(
                    f,
                    "stack underflow at {pc:#x}: depth {depth}, need {needed}"
                )
            }
            Fault::Trap { pc, reason } => write!(f, "machine fault '{reason}' at {pc:#x}"),
            Fault::NoFetchRoutine => f.write_str("control store has no fetch routine"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum HaltReason {
    Halted,
    CycleLimit,
    Fault { fault: Fault },
}

impl HaltReason {
    pub fn fault(&self) -> Option<&Fault> {
        match self {
            HaltReason::Fault { fault } => Some(fault),
            _ => None,
        }
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Halted => f.write_str("halted"),
            HaltReason::CycleLimit => f.write_str("cycle limit"),
            HaltReason::Fault { fault } => write!(f, "{fault}"),
        }
    }
}

/// Execution counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecStats {
    pub assembly_instructions: u64,
    pub microinstructions: u64,
    pub fetch_microsteps: u64,
    pub cycles: u64,
    /// Opcode number -> completed executions.
    pub per_opcode: BTreeMap<u16, u64>,
    /// Opcode number -> microinstructions spent in its routine, fetch
    /// excluded, completed executions only.
    #[serde(default)]
    pub per_opcode_micro: BTreeMap<u16, u64>,
    pub halt: Option<HaltReason>,
}

impl ExecStats {
    pub fn total_micro(&self) -> u64 {
        self.microinstructions + self.fetch_microsteps
    }

    pub fn opcode_count(&self, opcode: u16) -> u64 {
        self.per_opcode.get(&opcode).copied().unwrap_or(0)
    }

    pub fn opcode_micro(&self, opcode: u16) -> u64 {
        self.per_opcode_micro.get(&opcode).copied().unwrap_or(0)
    }

    /// Counter increase from `earlier` to `self`; the halt reason is `self`'s.
    pub fn since(&self, earlier: &ExecStats) -> ExecStats {
        let diff = |now: &BTreeMap<u16, u64>, then: &BTreeMap<u16, u64>| -> BTreeMap<u16, u64> {
            now.iter()
                .filter_map(|(&op, &n)| {
                    let d = n - then.get(&op).copied().unwrap_or(0);
                    (d > 0).then_some((op, d))
                })
                .collect()
        };
        let per_opcode = diff(&self.per_opcode, &earlier.per_opcode);
        let per_opcode_micro = diff(&self.per_opcode_micro, &earlier.per_opcode_micro);
        ExecStats {
            assembly_instructions: self.assembly_instructions - earlier.assembly_instructions,
            microinstructions: self.microinstructions - earlier.microinstructions,
            fetch_microsteps: self.fetch_microsteps - earlier.fetch_microsteps,
            cycles: self.cycles - earlier.cycles,
            per_opcode,
            per_opcode_micro,
            halt: self.halt.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Fetch,
    Execute,
}

enum Flow {
    End,
    Halt,
}

/// Registers, memory and counters of one simulated processor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    names: Vec<String>,
    regs: Vec<u32>,
    gpr: Vec<u32>,
    memory: Vec<u32>,
    stats: ExecStats,
    config: MachineConfig,
    pc_index: usize,
    ir_index: usize,
    gpr_zero: bool,
    instr_pc: u32,
}

impl MachineState {
    pub fn new(store: &ControlStore, config: MachineConfig) -> Self {
        let dp = store.datapath();
        Self {
            names: store.registers().to_vec(),
            regs: vec![0; store.registers().len()],
            gpr: vec![0; dp.gpr_count],
            memory: vec![0; config.memory_words],
            stats: ExecStats::default(),
            config,
            pc_index: store.register_index(&dp.pc).expect("pc register declared"),
            ir_index: store.register_index(&dp.ir).expect("ir register declared"),
            gpr_zero: dp.gpr_zero,
            instr_pc: 0,
        }
    }

    pub fn config(&self) -> &MachineConfig {
        &self.config
    }

    pub fn stats(&self) -> &ExecStats {
        &self.stats
    }

    pub fn is_halted(&self) -> bool {
        self.stats.halt.is_some()
    }

    pub fn halt_reason(&self) -> Option<&HaltReason> {
        self.stats.halt.as_ref()
    }

    pub fn pc(&self) -> u32 {
        self.regs[self.pc_index]
    }

    pub fn set_pc(&mut self, pc: u32) {
        self.regs[self.pc_index] = pc;
    }

    pub fn reg(&self, name: &str) -> Option<u32> {
        let i = self
            .names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))?;
        Some(self.regs[i])
    }

    pub fn set_reg(&mut self, name: &str, value: u32) -> bool {
        match self.names.iter().position(|n| n.eq_ignore_ascii_case(name)) {
            Some(i) => {
                self.regs[i] = value;
                true
            }
            None => false,
        }
    }

    pub fn gpr(&self, n: usize) -> u32 {
        self.gpr[n]
    }

    pub fn gprs(&self) -> &[u32] {
        &self.gpr
    }

    pub fn set_gpr(&mut self, n: usize, value: u32) {
        if !(self.gpr_zero && n == 0) {
            self.gpr[n] = value;
        }
    }

    pub fn memory(&self) -> &[u32] {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut [u32] {
        &mut self.memory
    }

    /// Executes one assembly instruction (fetch plus its routine) and returns
    /// the counter delta. Does nothing once halted.
    pub fn step_instruction(&mut self, store: &ControlStore) -> ExecStats {
        let before = self.stats.clone();
        self.step_with_limit(store, self.config.max_cycles);
        self.stats.since(&before)
    }

    /// Steps until halt, fault, or until the next microinstruction would push
    /// the cycle count past `max_cycles`.
    pub fn run(&mut self, store: &ControlStore, max_cycles: u64) -> ExecStats {
        while !self.is_halted() {
            self.step_with_limit(store, max_cycles);
        }
        self.stats.clone()
    }

    fn stop(&mut self, reason: HaltReason) {
        self.stats.halt = Some(reason);
    }

    fn step_with_limit(&mut self, store: &ControlStore, limit: u64) {
        if self.is_halted() {
            return;
        }
        if self.regs.len() < store.registers().len() {
            self.names = store.registers().to_vec();
            self.regs.resize(self.names.len(), 0);
        }
        self.instr_pc = self.pc();
        let Some(fetch) = store.compiled_fetch() else {
            self.stop(HaltReason::Fault {
                fault: Fault::NoFetchRoutine,
            });
            return;
        };
        match self.exec(fetch, store, Phase::Fetch, limit) {
            Ok(Flow::End) => {}
            Ok(Flow::Halt) => {
                self.stop(HaltReason::Halted);
                return;
            }
            Err(reason) => {
                self.stop(reason);
                return;
            }
        }
        let opcode = store.decode_opcode(self.regs[self.ir_index]);
        let Some(routine) = store.compiled(opcode) else {
            self.stop(HaltReason::Fault {
                fault: Fault::IllegalInstruction {
                    pc: self.instr_pc,
                    opcode: opcode.0,
                },
            });
            return;
        };
        if let Some(check) = &store.datapath().stack {
            let sp = self.reg(&check.sp).unwrap_or(0);
            let depth = i64::from(sp.wrapping_sub(check.empty_sp) as i32);
            if depth < i64::from(routine.stack_inputs) {
                self.stop(HaltReason::Fault {
                    fault: Fault::StackUnderflow {
                        pc: self.instr_pc,
                        depth,
                        needed: routine.stack_inputs,
                    },
                });
                return;
            }
        }
        let micro_before = self.stats.microinstructions;
        match self.exec(routine, store, Phase::Execute, limit) {
            Ok(flow) => {
                self.stats.assembly_instructions += 1;
                *self.stats.per_opcode.entry(opcode.0).or_insert(0) += 1;
                *self.stats.per_opcode_micro.entry(opcode.0).or_insert(0) +=
                    self.stats.microinstructions - micro_before;
                if let Flow::Halt = flow {
                    self.stop(HaltReason::Halted);
                }
            }
            Err(reason) => self.stop(reason),
        }
    }

    fn exec(
        &mut self,
        routine: &Compiled,
        store: &ControlStore,
        phase: Phase,
        limit: u64,
    ) -> Result<Flow, HaltReason> {
        let cpm = store.cycles_per_micro();
        let mut upc = 0usize;
        loop {
            if self.stats.cycles + cpm > limit {
                return Err(HaltReason::CycleLimit);
            }
            match phase {
                Phase::Fetch => self.stats.fetch_microsteps += 1,
                Phase::Execute => self.stats.microinstructions += 1,
            }
            self.stats.cycles += cpm;
            let instr = &routine.instrs[upc];
            for step in &instr.steps {
                self.apply(step)
                    .map_err(|fault| HaltReason::Fault { fault })?;
            }
            upc = match &instr.next {
                Next::Fall => upc + 1,
                Next::End => return Ok(Flow::End),
                Next::Halt => return Ok(Flow::Halt),
                Next::Fault(reason) => {
                    return Err(HaltReason::Fault {
                        fault: Fault::Trap {
                            pc: self.instr_pc,
                            reason: reason.clone(),
                        },
                    })
                }
                Next::Jump(t) => *t,
                Next::Branch(cond, src, t) => {
                    if cond.holds(self.read(src)) {
                        *t
                    } else {
                        upc + 1
                    }
                }
            };
        }
    }

    fn read(&self, src: &Src) -> u32 {
        match src {
            Src::Reg(i) => self.regs[*i],
            Src::Field(f, signed) => f.extract(self.regs[self.ir_index], *signed),
            Src::GprAt(f) => {
                let n = f.extract(self.regs[self.ir_index], false) as usize;
                self.gpr.get(n).copied().unwrap_or(0)
            }
            Src::Gpr(n) => self.gpr[*n],
            Src::Imm(v) => *v,
        }
    }

    fn write(&mut self, dst: &Dst, value: u32) {
        match dst {
            Dst::Reg(i) => self.regs[*i] = value,
            Dst::GprAt(f) => {
                let n = f.extract(self.regs[self.ir_index], false) as usize;
                if n < self.gpr.len() {
                    self.set_gpr(n, value);
                }
            }
            Dst::Gpr(n) => self.set_gpr(*n, value),
        }
    }

    fn apply(&mut self, step: &Step) -> Result<(), Fault> {
        match step {
            Step::Transfer(src, dsts) => {
                let v = self.read(src);
                for d in dsts {
                    self.write(d, v);
                }
            }
            Step::Alu(op, a, b, dsts) => {
                let v = op.apply(self.read(a), self.read(b));
                for d in dsts {
                    self.write(d, v);
                }
            }
            Step::Read(addr, dst) => {
                let a = self.regs[*addr];
                let v = *self.memory.get(a as usize).ok_or(Fault::MemoryFault {
                    pc: self.instr_pc,
                    addr: a,
                })?;
                self.write(dst, v);
            }
            Step::Write(addr, src) => {
                let a = self.regs[*addr];
                let v = self.read(src);
                let pc = self.instr_pc;
                *self
                    .memory
                    .get_mut(a as usize)
                    .ok_or(Fault::MemoryFault { pc, addr: a })? = v;
            }
        }
        Ok(())
    }
}

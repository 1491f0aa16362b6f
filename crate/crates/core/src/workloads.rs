//! Viterbi decoder programs for both profiles, in two variants: one calling
//! a base-ISA trellis subroutine per stage, one issuing `TEXPAND` per stage.
//!
//! Data memory used by every program:
//!
//! | address        | contents                                        |
//! |----------------|-------------------------------------------------|
//! | [`LAYOUT`]     | trellis-expansion layout (see [`TexpandLayout`]) |
//! | [`RECV`]       | received pair of stage `t` at `RECV + t`        |
//! | [`SCHED`]      | admissible-state mask of stage `t`              |
//! | [`OUT`]        | decoded bit `t` at `OUT + t`                    |
//! | [`SCRATCH`]    | next-stage buffer of the assembly subroutine    |

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asm::{assemble, AsmError, ProgramImage};
use crate::bits::BitVec;
use crate::convcode::{
    encode, stage_schedule, viterbi_decode_traced, with_flush, CodeError, EncoderSpec, PathState,
    Trellis, EXAMPLE_SPEC,
};
use crate::isa::{IsaError, Profile, ProfileKind, TexpandLayout};
use crate::micro::{ExecStats, HaltReason};

pub const LAYOUT: u32 = 0xC00;
pub const RECV: u32 = 0xC80;
pub const SCHED: u32 = 0xCC0;
pub const OUT: u32 = 0xD00;
pub const SCRATCH: u32 = 0xD40;

/// Longest received word: one packed survivor word holds 32 stages.
pub const MAX_BITS: usize = 64;
/// Largest constraint length whose generated programs fit below the data.
pub const MAX_CONSTRAINT_LENGTH: u32 = 5;
/// Seed of the pseudo-random messages behind generated received words.
pub const DEFAULT_SEED: u64 = 0xC0DE;
/// Received word of the worked 12-bit example.
pub const EXAMPLE_RECEIVED: &str = "10 11 11 00 11 00";
/// Bit sizes of the default benchmark suite.
pub const DEFAULT_SIZES: [usize; 5] = [12, 24, 36, 48, 60];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AssemblyFunction,
    Texpand,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::AssemblyFunction, Variant::Texpand];

    pub fn name(self) -> &'static str {
        match self {
            Variant::AssemblyFunction => "assembly_function",
            Variant::Texpand => "texpand",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = WorkloadError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "asm" | "assembly_function" | "function" => Ok(Variant::AssemblyFunction),
            "texpand" | "custom" => Ok(Variant::Texpand),
            _ => Err(WorkloadError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("unknown variant '{0}'")]
    UnknownVariant(String),
    #[error("received word has {got} bits, config says {want}")]
    LengthMismatch { want: usize, got: usize },
    #[error("bit count must be even and between {min} and {max}, got {got}")]
    BitCount { got: usize, min: usize, max: usize },
    #[error("constraint length {0} is not supported by the workload layout (max {MAX_CONSTRAINT_LENGTH})")]
    ConstraintLength(u32),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error(transparent)]
    Asm(#[from] AsmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub profile: ProfileKind,
    pub variant: Variant,
    pub n_bits: usize,
    pub spec: EncoderSpec,
    pub received: BitVec,
}

impl WorkloadConfig {
    /// Config on the example encoder with the default received word for
    /// `n_bits`.
    pub fn new(
        profile: ProfileKind,
        variant: Variant,
        n_bits: usize,
    ) -> Result<Self, WorkloadError> {
        Self::with_seed(profile, variant, n_bits, &EXAMPLE_SPEC, DEFAULT_SEED)
    }

    pub fn with_seed(
        profile: ProfileKind,
        variant: Variant,
        n_bits: usize,
        spec: &EncoderSpec,
        seed: u64,
    ) -> Result<Self, WorkloadError> {
        let received = received_word(spec, n_bits, seed)?;
        Self::with_received(profile, variant, spec, received)
    }

    pub fn with_received(
        profile: ProfileKind,
        variant: Variant,
        spec: &EncoderSpec,
        received: BitVec,
    ) -> Result<Self, WorkloadError> {
        let cfg = Self {
            profile,
            variant,
            n_bits: received.len(),
            spec: *spec,
            received,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        check_bits(&self.spec, self.n_bits)?;
        if self.received.len() != self.n_bits {
            return Err(WorkloadError::LengthMismatch {
                want: self.n_bits,
                got: self.received.len(),
            });
        }
        Ok(())
    }

    pub fn n_stages(&self) -> usize {
        self.n_bits / 2
    }
}

fn check_bits(spec: &EncoderSpec, n_bits: usize) -> Result<(), WorkloadError> {
    if spec.constraint_length() > MAX_CONSTRAINT_LENGTH {
        return Err(WorkloadError::ConstraintLength(spec.constraint_length()));
    }
    let min = (2 * spec.memory_len() as usize).max(2);
    if n_bits % 2 != 0 || n_bits < min || n_bits > MAX_BITS {
        return Err(WorkloadError::BitCount {
            got: n_bits,
            min,
            max: MAX_BITS,
        });
    }
    Ok(())
}

/// Received word for a benchmark of `n_bits`.
///
/// Twelve bits on the example encoder give the worked example's word.
/// Otherwise a seeded random message plus flush bits is encoded and one
/// bit is flipped in every 12-bit block.
pub fn received_word(
    spec: &EncoderSpec,
    n_bits: usize,
    seed: u64,
) -> Result<BitVec, WorkloadError> {
    check_bits(spec, n_bits)?;
    if n_bits == 12 && *spec == EXAMPLE_SPEC {
        return Ok(EXAMPLE_RECEIVED.parse().expect("example word parses"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data_len = n_bits / 2 - spec.memory_len() as usize;
    let data = BitVec::from_bits((0..data_len).map(|_| rng.gen_range(0..2u8)));
    let codeword = encode(spec, &with_flush(spec, &data));
    let flips: Vec<usize> = (0..n_bits)
        .step_by(12)
        .map(|start| start + rng.gen_range(0..(n_bits - start).min(12)) + 1)
        .collect();
    Ok(codeword.flip_bits(&flips).expect("flip positions in range"))
}

/// A generated program and what running it must produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    pub source: String,
    /// Decoded inputs, flush bits included, as the oracle decoder reports.
    pub expected_output: BitVec,
    /// Trellis-expansion invocations the program performs (one per stage).
    pub expected_calls: usize,
    /// Live trellis nodes the oracle computes across all stages.
    pub node_expansions: usize,
}

fn comment_header(out: &mut String, cfg: &WorkloadConfig) {
    let (t1, t2) = cfg.spec.taps();
    let _ = writeln!(
        out,
        "; Viterbi decoder, {} profile, {} variant",
        cfg.profile, cfg.variant
    );
    let _ = writeln!(
        out,
        "; K={} taps {t1:#b}/{t2:#b}, {} received bits: {}",
        cfg.spec.constraint_length(),
        cfg.n_bits,
        cfg.received.to_pair_string()
    );
    let _ = writeln!(out, "; decoded bit t is written to {:#x} + t", OUT);
}

/// Builds the program for `cfg`.
pub fn gen_program(cfg: &WorkloadConfig) -> Result<Workload, WorkloadError> {
    cfg.validate()?;
    let oracle = viterbi_decode_traced(&cfg.spec, &cfg.received)?;
    let layout = TexpandLayout::new(&cfg.spec)?;
    let n = cfg.n_stages();

    let mut src = String::new();
    comment_header(&mut src, cfg);
    src.push_str("        .text\n");
    match cfg.profile {
        ProfileKind::Register => register_main(&mut src, cfg, &layout, n),
        ProfileKind::Stack => stack_main(&mut src, cfg, &layout, n),
    }
    if cfg.variant == Variant::AssemblyFunction {
        src.push('\n');
        src.push_str(&trellis_function_source(cfg.profile, &cfg.spec)?);
    }
    data_section(&mut src, cfg, &layout);

    Ok(Workload {
        source: src,
        expected_output: oracle.bits,
        expected_calls: oracle.trace.acs_calls,
        node_expansions: oracle.trace.node_expansions,
    })
}

fn register_main(src: &mut String, cfg: &WorkloadConfig, layout: &TexpandLayout, n: usize) {
    let call = match cfg.variant {
        Variant::Texpand => "TEXPAND".to_string(),
        Variant::AssemblyFunction => "JAL acs".to_string(),
    };
    let rcv = LAYOUT + layout.received();
    let sch = LAYOUT + layout.schedule();
    let h0 = LAYOUT + layout.history(0);
    let _ = write!(
        src,
        "\
main:   ADDI R1, R0, {LAYOUT}
        ADDI R20, R0, 0
        ADDI R21, R0, {n}
stage:  LD   R2, {RECV}(R20)
        SW   R2, {rcv}(R0)
        LD   R2, {SCHED}(R20)
        SW   R2, {sch}(R0)
        {call}
        ADDI R20, R20, 1
        SUB  R2, R20, R21
        BNEZ R2, stage
; traceback: the survivor of state 0 holds the whole path, newest bit lowest
        LD   R2, {h0}(R0)
        ADDI R20, R21, -1
back:   ANDI R3, R2, 1
        SW   R3, {OUT}(R20)
        SRLI R2, R2, 1
        ADDI R20, R20, -1
        SLT  R3, R20, R0
        BEQZ R3, back
        HALT
"
    );
}

fn stack_main(src: &mut String, cfg: &WorkloadConfig, layout: &TexpandLayout, n: usize) {
    let call = match cfg.variant {
        Variant::Texpand => "texpand",
        Variant::AssemblyFunction => "jsr acs",
    };
    let (rcv, sch, h0) = (layout.received(), layout.schedule(), layout.history(0));
    let last = n - 1;
    let _ = write!(
        src,
        "\
main:   bipush 0
        istore 20
stage:  sipush {LAYOUT}
        bipush {rcv}
        sipush {RECV}
        iload 20
        iaload
        iastore
        sipush {LAYOUT}
        bipush {sch}
        sipush {SCHED}
        iload 20
        iaload
        iastore
        sipush {LAYOUT}
        {call}
        iinc 20, 1
        iload 20
        bipush {n}
        if_icmplt stage
; traceback: the survivor of state 0 holds the whole path, newest bit lowest
        sipush {LAYOUT}
        bipush {h0}
        iaload
        istore 22
        bipush {last}
        istore 20
back:   sipush {OUT}
        iload 20
        iload 22
        bipush 1
        iand
        iastore
        iload 22
        bipush 1
        ishr
        istore 22
        iinc 20, -1
        bipush -1
        iload 20
        if_icmplt back
        halt
"
    );
}

fn data_section(src: &mut String, cfg: &WorkloadConfig, layout: &TexpandLayout) {
    let n = cfg.n_stages();
    let mut mem = vec![0u32; layout.size() as usize];
    layout.store_paths(&mut mem, 0, &PathState::initial(layout.n_states));
    let words = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
    let pairs: Vec<u32> = cfg.received.pairs().map(u32::from).collect();
    let sched: Vec<u32> = (0..n).map(|t| stage_schedule(&cfg.spec, n, t).0).collect();
    let _ = write!(
        src,
        "
        .data
        .org {LAYOUT:#x}
layout: .word {}
        .org {RECV:#x}
recv:   .word {}
        .org {SCHED:#x}
sched:  .word {}
        .org {OUT:#x}
out:    .word {}
",
        words(&mem),
        words(&pairs),
        words(&sched),
        words(&vec![0; n]),
    );
}

/// Base-ISA subroutine performing one trellis-expansion step on the layout
/// at the base address (R1, or the word below the return address on the
/// stack profile). New values are built in [`SCRATCH`] and copied back.
pub fn trellis_function_source(
    profile: ProfileKind,
    spec: &EncoderSpec,
) -> Result<String, WorkloadError> {
    if spec.constraint_length() > MAX_CONSTRAINT_LENGTH {
        return Err(WorkloadError::ConstraintLength(spec.constraint_length()));
    }
    let layout = TexpandLayout::new(spec)?;
    Ok(match profile {
        ProfileKind::Register => register_function(spec, &layout),
        ProfileKind::Stack => stack_function(spec, &layout),
    })
}

/// Assembly text builder; a label with an empty body attaches to the next
/// instruction.
#[derive(Default)]
struct Listing {
    text: String,
    pending: Vec<String>,
}

impl Listing {
    fn line(&mut self, label: &str, body: &str) {
        if !label.is_empty() {
            self.pending.push(format!("{label}:"));
        }
        if body.is_empty() {
            return;
        }
        let labels = self.pending.join(" ");
        self.pending.clear();
        let _ = writeln!(self.text, "{labels:<15} {body}");
    }
}

fn register_function(spec: &EncoderSpec, l: &TexpandLayout) -> String {
    let trellis = Trellis::new(spec);
    let n = l.n_states;
    let mut out = Listing::default();
    out.text
        .push_str("; acs: one trellis stage on the layout at R1, clobbers R2-R14\n");
    let mut emit = |label: &str, body: String| out.line(label, &body);
    let scr = |off: u32| SCRATCH + off;
    emit("acs", format!("LD R2, {}(R1)", l.received()));
    emit("", format!("LD R3, {}(R1)", l.schedule()));
    // R4+o = Hamming weight of (pair xor o)
    emit("", "SRLI R8, R2, 1".into());
    emit("", "SUB R4, R2, R8".into());
    emit("", "XORI R9, R2, 1".into());
    emit("", "SRLI R8, R9, 1".into());
    emit("", "SUB R5, R9, R8".into());
    emit("", "ADDI R8, R0, 2".into());
    emit("", "SUB R6, R8, R5".into());
    emit("", "SUB R7, R8, R4".into());
    emit("", "ADDI R13, R0, 0".into());
    emit("", "ADDI R14, R0, -1".into());
    emit("", "SRLI R14, R14, 1".into());
    for d in 0..n {
        let [e0, e1] = trellis.incoming(d);
        let (p0, p1, u) = (e0.from, e1.from, e0.input);
        let (m0, m1) = (4 + e0.output, 4 + e1.output);
        if d < 13 {
            emit("", format!("ANDI R8, R3, {}", 1u32 << d));
        } else {
            emit("", format!("SRLI R8, R3, {d}"));
            emit("", "ANDI R8, R8, 1".into());
        }
        emit("", format!("BEQZ R8, acs_dead{d}"));
        emit("", format!("LD R9, {}(R1)", l.alive(p0)));
        emit("", format!("BEQZ R9, acs_only{d}"));
        emit("", format!("LD R10, {}(R1)", l.weight(p0)));
        emit("", format!("ADD R10, R10, R{m0}"));
        emit("", format!("LD R9, {}(R1)", l.alive(p1)));
        emit("", format!("BEQZ R9, acs_first{d}"));
        emit("", format!("LD R11, {}(R1)", l.weight(p1)));
        emit("", format!("ADD R11, R11, R{m1}"));
        emit("", "SLT R9, R11, R10".into());
        emit("", format!("BNEZ R9, acs_second{d}"));
        emit(
            &format!("acs_first{d}"),
            format!("LD R12, {}(R1)", l.history(p0)),
        );
        emit("", format!("J acs_keep{d}"));
        emit(
            &format!("acs_only{d}"),
            format!("LD R9, {}(R1)", l.alive(p1)),
        );
        emit("", format!("BEQZ R9, acs_dead{d}"));
        emit("", format!("LD R11, {}(R1)", l.weight(p1)));
        emit("", format!("ADD R11, R11, R{m1}"));
        emit(&format!("acs_second{d}"), "ADD R10, R11, R0".into());
        emit("", format!("LD R12, {}(R1)", l.history(p1)));
        emit(&format!("acs_keep{d}"), "SLLI R12, R12, 1".into());
        if u == 1 {
            emit("", "ORI R12, R12, 1".into());
        }
        emit("", format!("SW R10, {}(R0)", scr(l.weight(d))));
        emit("", format!("SW R12, {}(R0)", scr(l.history(d))));
        emit("", "ADDI R9, R0, 1".into());
        emit("", format!("SW R9, {}(R0)", scr(l.alive(d))));
        emit("", "ADDI R13, R13, 1".into());
        emit("", format!("J acs_next{d}"));
        emit(
            &format!("acs_dead{d}"),
            format!("SW R14, {}(R0)", scr(l.weight(d))),
        );
        emit("", format!("SW R0, {}(R0)", scr(l.alive(d))));
        emit("", format!("SW R0, {}(R0)", scr(l.history(d))));
        emit(&format!("acs_next{d}"), String::new());
    }
    emit("", "BEQZ R13, acs_fail".into());
    for off in 0..3 * n as u32 {
        emit("", format!("LD R9, {}(R0)", scr(off)));
        emit("", format!("SW R9, {off}(R1)"));
    }
    emit("", format!("LD R9, {}(R1)", l.length()));
    emit("", "ADDI R9, R9, 1".into());
    emit("", format!("SW R9, {}(R1)", l.length()));
    emit("", "JR R31".into());
    emit("acs_fail", "TRAP".into());
    out.text
}

fn stack_function(spec: &EncoderSpec, l: &TexpandLayout) -> String {
    // Locals: 0 return address, 1 base, 2 pair, 3 mask, 4..7 metrics,
    // 8 survivor count, 9 dead weight, 10/11 candidates.
    let trellis = Trellis::new(spec);
    let n = l.n_states;
    let mut out = Listing::default();
    out.text
        .push_str("; acs ( base ret -- ): one trellis stage on the layout at base\n");
    let mut emit = |label: &str, body: &str| {
        for (i, instr) in body.split(';').map(str::trim).enumerate() {
            out.line(if i == 0 { label } else { "" }, instr);
        }
    };
    let scr = |off: u32| SCRATCH + off;
    emit("acs", "istore 0; istore 1");
    emit(
        "",
        &format!("iload 1; bipush {}; iaload; istore 2", l.received()),
    );
    emit(
        "",
        &format!("iload 1; bipush {}; iaload; istore 3", l.schedule()),
    );
    emit("", "iload 2; dup; bipush 1; ishr; isub; istore 4");
    emit(
        "",
        "iload 2; bipush 1; ixor; dup; bipush 1; ishr; isub; istore 5",
    );
    emit("", "bipush 2; iload 5; isub; istore 6");
    emit("", "bipush 2; iload 4; isub; istore 7");
    emit("", "bipush 0; istore 8");
    emit("", "bipush -1; bipush 1; ishr; istore 9");
    for d in 0..n {
        let [e0, e1] = trellis.incoming(d);
        let (p0, p1, u) = (e0.from, e1.from, e0.input);
        let (m0, m1) = (4 + e0.output, 4 + e1.output);
        if d < 14 {
            emit(
                "",
                &format!("iload 3; sipush {}; iand; ifeq acs_dead{d}", 1u32 << d),
            );
        } else {
            emit(
                "",
                &format!("iload 3; bipush {d}; ishr; bipush 1; iand; ifeq acs_dead{d}"),
            );
        }
        emit(
            "",
            &format!("iload 1; bipush {}; iaload; ifeq acs_only{d}", l.alive(p0)),
        );
        emit(
            "",
            &format!(
                "iload 1; bipush {}; iaload; iload {m0}; iadd; istore 10",
                l.weight(p0)
            ),
        );
        emit(
            "",
            &format!("iload 1; bipush {}; iaload; ifeq acs_first{d}", l.alive(p1)),
        );
        emit(
            "",
            &format!(
                "iload 1; bipush {}; iaload; iload {m1}; iadd; istore 11",
                l.weight(p1)
            ),
        );
        emit("", &format!("iload 11; iload 10; if_icmplt acs_second{d}"));
        emit(
            &format!("acs_first{d}"),
            &format!(
                "iload 1; bipush {}; iaload; goto acs_keep{d}",
                l.history(p0)
            ),
        );
        emit(
            &format!("acs_only{d}"),
            &format!("iload 1; bipush {}; iaload; ifeq acs_dead{d}", l.alive(p1)),
        );
        emit(
            "",
            &format!(
                "iload 1; bipush {}; iaload; iload {m1}; iadd; istore 11",
                l.weight(p1)
            ),
        );
        emit(&format!("acs_second{d}"), "iload 11; istore 10");
        emit("", &format!("iload 1; bipush {}; iaload", l.history(p1)));
        emit(&format!("acs_keep{d}"), "dup; iadd");
        if u == 1 {
            emit("", "bipush 1; ior");
        }
        emit("", "istore 11");
        emit(
            "",
            &format!("sipush {}; bipush 0; iload 11; iastore", scr(l.history(d))),
        );
        emit(
            "",
            &format!("sipush {}; bipush 0; iload 10; iastore", scr(l.weight(d))),
        );
        emit(
            "",
            &format!("sipush {}; bipush 0; bipush 1; iastore", scr(l.alive(d))),
        );
        emit("", &format!("iinc 8, 1; goto acs_next{d}"));
        emit(
            &format!("acs_dead{d}"),
            &format!("sipush {}; bipush 0; iload 9; iastore", scr(l.weight(d))),
        );
        emit(
            "",
            &format!("sipush {}; bipush 0; bipush 0; iastore", scr(l.alive(d))),
        );
        emit(
            "",
            &format!("sipush {}; bipush 0; bipush 0; iastore", scr(l.history(d))),
        );
        emit(&format!("acs_next{d}"), "");
    }
    emit("", "iload 8; ifeq acs_fail");
    for off in 0..3 * n as u32 {
        emit(
            "",
            &format!(
                "iload 1; bipush {off}; sipush {}; bipush 0; iaload; iastore",
                scr(off)
            ),
        );
    }
    let len = l.length();
    emit(
        "",
        &format!("iload 1; bipush {len}; iload 1; bipush {len}; iaload; bipush 1; iadd; iastore"),
    );
    emit("", "ret 0");
    emit("acs_fail", "athrow");
    out.text
}

/// Static instruction count of the trellis subroutine.
pub fn trellis_function_size(
    profile: ProfileKind,
    spec: &EncoderSpec,
) -> Result<usize, WorkloadError> {
    let src = trellis_function_source(profile, spec)?;
    Ok(assemble(&src, &Profile::new(profile))?.static_instructions())
}

/// Profile a config's program runs on.
pub fn profile_for(cfg: &WorkloadConfig) -> Result<Profile, WorkloadError> {
    Ok(match cfg.variant {
        Variant::Texpand => Profile::with_texpand(cfg.profile, &cfg.spec)?,
        Variant::AssemblyFunction => Profile::new(cfg.profile),
    })
}

/// Assembled program plus everything needed to run and check it.
#[derive(Debug, Clone)]
pub struct Built {
    pub config: WorkloadConfig,
    pub workload: Workload,
    pub profile: Profile,
    pub image: ProgramImage,
}

pub fn build(cfg: &WorkloadConfig) -> Result<Built, WorkloadError> {
    let workload = gen_program(cfg)?;
    let profile = profile_for(cfg)?;
    let image = assemble(&workload.source, &profile)?;
    Ok(Built {
        config: cfg.clone(),
        workload,
        profile,
        image,
    })
}

/// Outcome of simulating a workload to completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub stats: ExecStats,
    pub output: BitVec,
    pub decoded_ok: bool,
    /// Dynamic count of trellis-expansion invocations (TEXPAND executions or
    /// subroutine calls).
    pub calls: u64,
}

impl Built {
    pub fn run(&self, max_cycles: u64) -> Result<RunResult, WorkloadError> {
        let mut m = self.image.load(&self.profile)?;
        let stats = m.run(self.profile.store(), max_cycles);
        let n = self.config.n_stages();
        let out = &m.memory()[OUT as usize..OUT as usize + n];
        let output = BitVec::from_bits(out.iter().map(|&w| (w & 1) as u8));
        let call_op = match self.config.variant {
            Variant::Texpand => crate::isa::TEXPAND_OPCODE,
            Variant::AssemblyFunction => {
                let name = match self.config.profile {
                    ProfileKind::Register => "JAL",
                    ProfileKind::Stack => "jsr",
                };
                self.profile.lookup(name).expect("call instruction").opcode
            }
        };
        let clean = out.iter().all(|&w| w <= 1);
        let decoded_ok = stats.halt == Some(HaltReason::Halted)
            && clean
            && output == self.workload.expected_output;
        Ok(RunResult {
            calls: stats.opcode_count(call_op.0),
            stats,
            output,
            decoded_ok,
        })
    }
}

/// Relative path of a generated program inside the workloads directory.
pub fn program_path(profile: ProfileKind, variant: Variant, n_bits: usize) -> PathBuf {
    PathBuf::from(profile.name())
        .join(variant.name())
        .join(format!("viterbi_{n_bits}.{}", profile.extension()))
}

/// Writes every default-suite program under `root` and returns the paths.
pub fn write_programs(root: &Path, sizes: &[usize]) -> Result<Vec<PathBuf>, WorkloadError> {
    let mut written = Vec::new();
    for profile in ProfileKind::ALL {
        for variant in Variant::ALL {
            for &n in sizes {
                let cfg = WorkloadConfig::new(profile, variant, n)?;
                let path = root.join(program_path(profile, variant, n));
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(&path, gen_program(&cfg)?.source)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests;

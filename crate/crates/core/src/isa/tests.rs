use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layout::DEAD_WEIGHT;
use super::*;
use crate::bits::BitVec;
use crate::convcode::{
    acs_step, PathEntry, PathState, StateMask, Trellis, EXAMPLE_SPEC, STANDARD_75_SPEC,
};
use crate::micro::{Fault, HaltReason};

fn word(p: &Profile, mnemonic: &str, args: &[i64]) -> u32 {
    let d = p.lookup(mnemonic).unwrap();
    d.format.encode(&d.mnemonic, d.opcode, args).unwrap()
}

fn boot(p: &Profile, code: &[u32]) -> MachineState {
    p.boot(code, &[], 0).unwrap()
}

#[test]
fn register_and_takes_five_microinstructions() {
    let p = register::profile();
    let code = [word(&p, "AND", &[1, 2, 3])];
    let mut m = boot(&p, &code);
    m.set_gpr(2, 0b1100);
    m.set_gpr(3, 0b1010);
    let s = m.step_instruction(p.store());
    assert_eq!(m.gpr(1), 0b1000);
    assert_eq!(s.microinstructions, 5);
    assert_eq!(s.fetch_microsteps, 1);
    assert_eq!(s.cycles, 24);
}

#[test]
fn register_r0_reads_zero() {
    let p = register::profile();
    let code = [word(&p, "ADDI", &[0, 0, 77]), word(&p, "ADD", &[1, 0, 0])];
    let mut m = boot(&p, &code);
    m.set_gpr(1, 99);
    m.step_instruction(p.store());
    m.step_instruction(p.store());
    assert_eq!(m.gpr(0), 0);
    assert_eq!(m.gpr(1), 0);
}

#[test]
fn register_store_load_round_trip() {
    let p = register::profile();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let addr: i64 = rng.gen_range(0x400..0x1000);
        let value: u32 = rng.gen();
        let code = [word(&p, "SW", &[4, 100, 1]), word(&p, "LD", &[5, 100, 1])];
        let mut m = boot(&p, &code);
        m.set_gpr(1, (addr - 100) as u32);
        m.set_gpr(4, value);
        let s1 = m.step_instruction(p.store());
        let s2 = m.step_instruction(p.store());
        assert_eq!(m.memory()[addr as usize], value);
        assert_eq!(m.gpr(5), value);
        assert_eq!((s1.microinstructions, s2.microinstructions), (4, 4));
    }
}

#[test]
fn register_jal_links_r31_and_branches_are_relative() {
    let p = register::profile();
    let code = [
        word(&p, "JAL", &[3]),
        word(&p, "HALT", &[]),
        word(&p, "HALT", &[]),
        word(&p, "BEQZ", &[0, -3]),
    ];
    let mut m = boot(&p, &code);
    m.step_instruction(p.store());
    assert_eq!((m.pc(), m.gpr(31)), (3, 1));
    m.step_instruction(p.store());
    assert_eq!(m.pc(), 1);
}

#[test]
fn format_encode_decode_round_trip() {
    let cases: [(Format, &[i64]); 8] = [
        (Format::Rrr, &[31, 0, 17]),
        (Format::Rri { signed: true }, &[3, 4, -4096]),
        (Format::Mem, &[4, 100, 1]),
        (Format::BranchReg, &[9, -1]),
        (Format::Jump, &[0x7FFFFF]),
        (Format::Const { bits: 8 }, &[-128]),
        (Format::Branch, &[-300]),
        (Format::Iinc, &[255, -7]),
    ];
    for (f, args) in cases {
        let w = f.encode("x", Opcode::base(5), args).unwrap();
        assert_eq!(w >> 23, 5);
        assert_eq!(f.decode(w), args, "{f:?}");
    }
    assert!(matches!(
        Format::Rri { signed: false }.encode("ANDI", Opcode::base(1), &[1, 1, -1]),
        Err(IsaError::OperandRange { .. })
    ));
    assert!(matches!(
        Format::Rrr.encode("ADD", Opcode::base(1), &[1, 1]),
        Err(IsaError::Arity {
            expected: 3,
            got: 2,
            ..
        })
    ));
}

#[test]
fn register_base_isa_has_required_mnemonics() {
    let p = register::profile();
    for m in [
        "LD", "SW", "ADD", "SUB", "AND", "OR", "XOR", "SLL", "SRL", "SLT", "ADDI", "BEQZ", "BNEZ",
        "J", "JAL", "JR", "HALT",
    ] {
        assert!(p.lookup(m).is_some(), "{m}");
        assert!(p.store().routine(p.lookup(m).unwrap().opcode).is_some());
    }
    assert_eq!(
        register::base_isa().opcodes().count(),
        register::instruction_defs().len()
    );
}

#[test]
fn stack_base_isa_has_required_mnemonics() {
    let p = stack::profile();
    for m in [
        "iadd",
        "isub",
        "iand",
        "ior",
        "ixor",
        "iload",
        "istore",
        "bipush",
        "dup",
        "swap",
        "pop",
        "goto",
        "ifeq",
        "iflt",
        "if_icmplt",
        "halt",
    ] {
        assert!(p.lookup(m).is_some(), "{m}");
    }
    assert_eq!(p.routine_len("iadd"), Some(3));
    assert_eq!(p.routine_len("iload"), Some(3));
}

#[test]
fn stack_bipush_bipush_iadd() {
    let p = stack::profile();
    let code = [
        word(&p, "bipush", &[2]),
        word(&p, "bipush", &[3]),
        word(&p, "iadd", &[]),
        word(&p, "halt", &[]),
    ];
    let mut m = boot(&p, &code);
    let before = stack::depth(&m);
    m.step_instruction(p.store());
    m.step_instruction(p.store());
    let s = m.step_instruction(p.store());
    assert_eq!(s.microinstructions, 3);
    assert_eq!(m.reg("tos"), Some(5));
    assert_eq!(stack::depth(&m) - before, 1);
    assert_eq!(stack::stack_contents(&m), vec![5]);
}

#[test]
fn stack_istore_iload_round_trip() {
    let p = stack::profile();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let v: i64 = rng.gen_range(-32768..32768);
        let code = [
            word(&p, "sipush", &[v]),
            word(&p, "istore", &[0]),
            word(&p, "iload", &[0]),
            word(&p, "halt", &[]),
        ];
        let mut m = boot(&p, &code);
        let stats = m.run(p.store(), u64::MAX);
        assert_eq!(stats.halt, Some(HaltReason::Halted));
        assert_eq!(m.reg("tos"), Some(v as u32));
        assert_eq!(stack::depth(&m), 1);
    }
}

#[test]
fn stack_underflow_faults() {
    let p = stack::profile();
    let mut m = boot(&p, &[word(&p, "iadd", &[])]);
    m.step_instruction(p.store());
    assert!(matches!(
        m.halt_reason().and_then(HaltReason::fault),
        Some(Fault::StackUnderflow { needed: 2, .. })
    ));
}

#[test]
fn stack_branches_and_subroutines() {
    let p = stack::profile();
    // 0: bipush 1; 1: ifne +1 -> 3; 2: athrow; 3: jsr +2 -> 6; 4: halt
    // 6: istore 0; 7: ret 0
    let code = [
        word(&p, "bipush", &[1]),
        word(&p, "ifne", &[1]),
        word(&p, "athrow", &[]),
        word(&p, "jsr", &[2]),
        word(&p, "halt", &[]),
        word(&p, "athrow", &[]),
        word(&p, "istore", &[0]),
        word(&p, "ret", &[0]),
    ];
    let mut m = boot(&p, &code);
    let s = m.run(p.store(), u64::MAX);
    assert_eq!(s.halt, Some(HaltReason::Halted));
    assert_eq!(m.pc(), 5);
    assert_eq!(stack::depth(&m), 0);
}

/// Straight-line instructions whose stack effect is fixed.
fn straight_line(p: &Profile) -> Vec<InstrDef> {
    p.instructions()
        .filter(|d| {
            d.stack.is_some()
                && !matches!(d.format, Format::Branch)
                && !["halt", "ret", "iaload", "iastore"].contains(&d.mnemonic.as_str())
        })
        .cloned()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn stack_depth_follows_documented_effect(picks in proptest::collection::vec((0usize..64, -100i64..100), 1..40)) {
        let p = stack::profile();
        let defs = straight_line(&p);
        let mut code = Vec::new();
        let mut expected = Vec::new();
        let mut depth = 0i64;
        for (i, arg) in picks {
            let d = &defs[i % defs.len()];
            let eff = d.stack.unwrap();
            if depth < i64::from(eff.pops) {
                continue;
            }
            let args: Vec<i64> = match d.format {
                Format::None => vec![],
                Format::Index => vec![arg.rem_euclid(8)],
                Format::Const { .. } => vec![arg],
                Format::Iinc => vec![arg.rem_euclid(8), arg],
                _ => unreachable!(),
            };
            code.push(d.format.encode(&d.mnemonic, d.opcode, &args).unwrap());
            depth += eff.delta();
            expected.push(depth);
        }
        let mut m = boot(&p, &code);
        for want in expected {
            m.step_instruction(p.store());
            prop_assert!(!m.is_halted(), "{:?}", m.halt_reason());
            prop_assert_eq!(stack::depth(&m), want);
            if want > 0 {
                let sp = m.reg("sp").unwrap() as usize;
                prop_assert_eq!(m.reg("tos").unwrap(), m.memory()[sp]);
            }
        }
    }
}

// ---- trellis expansion ----

const BASE: u32 = 0x300;

fn random_paths(rng: &mut ChaCha8Rng, n: usize) -> PathState {
    let stages = rng.gen_range(0..32);
    let mut entries: Vec<Option<PathEntry>> = (0..n)
        .map(|_| {
            rng.gen_bool(0.6).then(|| PathEntry {
                weight: rng.gen_range(0..1000),
                history: BitVec::from_bits((0..stages).map(|_| rng.gen_range(0..2u8))),
            })
        })
        .collect();
    if rng.gen_bool(0.02) {
        entries.iter_mut().for_each(|e| *e = None);
    }
    PathState { stages, entries }
}

struct Run {
    before: Vec<u32>,
    after: MachineState,
    stats: crate::micro::ExecStats,
}

/// Executes exactly one TEXPAND on a layout preloaded with `paths`.
fn run_texpand(p: &Profile, paths: &PathState, pair: u8, mask: StateMask) -> Run {
    let layout = TexpandLayout::for_states(paths.n_states()).unwrap();
    let tex = word(p, expand::mnemonic(p.kind()), &[]);
    let mut m = match p.kind() {
        ProfileKind::Register => {
            let mut m = boot(p, &[tex]);
            m.set_gpr(1, BASE);
            m
        }
        ProfileKind::Stack => {
            let mut m = boot(p, &[word(p, "sipush", &[i64::from(BASE)]), tex]);
            m.step_instruction(p.store());
            m
        }
    };
    layout.store(m.memory_mut(), BASE, paths, pair, mask);
    let before = m.memory().to_vec();
    let stats = m.step_instruction(p.store());
    Run {
        before,
        after: m,
        stats,
    }
}

fn check_differential(
    kind: ProfileKind,
    spec: &crate::convcode::EncoderSpec,
    seed: u64,
    cases: usize,
) -> u64 {
    let p = Profile::with_texpand(kind, spec).unwrap();
    let trellis = Trellis::new(spec);
    let layout = TexpandLayout::new(spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_micro = 0;
    for case in 0..cases {
        let paths = random_paths(&mut rng, spec.n_states());
        let pair = rng.gen_range(0..4u8);
        let mask = StateMask(rng.gen_range(1..(1u32 << spec.n_states())));
        let run = run_texpand(&p, &paths, pair, mask);
        let range = BASE as usize..(BASE + layout.size()) as usize;
        match acs_step(&trellis, &paths, pair, mask) {
            Ok(next) => {
                assert!(
                    !run.after.is_halted(),
                    "case {case}: {:?}",
                    run.after.halt_reason()
                );
                assert_eq!(layout.load(run.after.memory(), BASE), next, "case {case}");
                let mut expected = run.before.clone();
                layout.store_paths(&mut expected, BASE, &next);
                for s in 0..spec.n_states() {
                    if next.entries[s].is_none() {
                        assert_eq!(
                            run.after.memory()[(BASE + layout.weight(s)) as usize],
                            DEAD_WEIGHT
                        );
                    }
                }
                for (i, (a, b)) in run.after.memory().iter().zip(&run.before).enumerate() {
                    if !range.contains(&i) {
                        assert_eq!(
                            a, b,
                            "case {case}: texpand wrote outside its layout at {i:#x}"
                        );
                    }
                }
                assert_eq!(run.after.memory(), &expected[..], "case {case}");
                max_micro = max_micro.max(run.stats.microinstructions);
            }
            Err(_) => {
                assert!(matches!(
                    run.after.halt_reason().and_then(HaltReason::fault),
                    Some(Fault::Trap { .. })
                ));
                assert_eq!(run.after.memory(), &run.before[..], "case {case}");
            }
        }
        if kind == ProfileKind::Stack && !run.after.is_halted() {
            assert_eq!(stack::depth(&run.after), 0);
        }
    }
    max_micro
}

#[test]
fn texpand_matches_acs_step_register() {
    let a = check_differential(ProfileKind::Register, &EXAMPLE_SPEC, 1, 300);
    let b = check_differential(ProfileKind::Register, &STANDARD_75_SPEC, 2, 300);
    assert!(a <= 150 && b <= 150);
}

#[test]
fn texpand_matches_acs_step_stack() {
    let a = check_differential(ProfileKind::Stack, &EXAMPLE_SPEC, 3, 300);
    let b = check_differential(ProfileKind::Stack, &STANDARD_75_SPEC, 4, 300);
    assert!(a <= 150 && b <= 150);
}

#[test]
fn texpand_first_stage_of_worked_example() {
    let spec = EXAMPLE_SPEC;
    let trellis = Trellis::new(&spec);
    for kind in ProfileKind::ALL {
        let p = Profile::with_texpand(kind, &spec).unwrap();
        let init = PathState::initial(4);
        let mask = crate::convcode::stage_schedule(&spec, 6, 0);
        let run = run_texpand(&p, &init, 0b10, mask);
        let layout = TexpandLayout::new(&spec).unwrap();
        let want = acs_step(&trellis, &init, 0b10, mask).unwrap();
        assert_eq!(layout.load(run.after.memory(), BASE), want);
        assert_eq!(want.alive_count(), 2);
    }
}

#[test]
fn texpand_final_stage_leaves_state_zero() {
    let spec = EXAMPLE_SPEC;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in ProfileKind::ALL {
        let p = Profile::with_texpand(kind, &spec).unwrap();
        let mut paths = random_paths(&mut rng, 4);
        paths.entries[0] = Some(PathEntry {
            weight: 3,
            history: BitVec::zeros(paths.stages),
        });
        let mask = crate::convcode::stage_schedule(&spec, 6, 5);
        let run = run_texpand(&p, &paths, 0, mask);
        let out = TexpandLayout::new(&spec)
            .unwrap()
            .load(run.after.memory(), BASE);
        assert_eq!(out.alive_mask(), StateMask::only(0));
    }
}

#[test]
fn texpand_on_empty_stack_underflows() {
    let p = Profile::with_texpand(ProfileKind::Stack, &EXAMPLE_SPEC).unwrap();
    let mut m = boot(&p, &[word(&p, "texpand", &[])]);
    m.step_instruction(p.store());
    assert!(matches!(
        m.halt_reason().and_then(HaltReason::fault),
        Some(Fault::StackUnderflow { needed: 1, .. })
    ));
}

#[test]
fn texpand_preserves_general_registers() {
    let p = Profile::with_texpand(ProfileKind::Register, &EXAMPLE_SPEC).unwrap();
    let mut m = boot(&p, &[word(&p, "TEXPAND", &[])]);
    for r in 1..32 {
        m.set_gpr(r, 1000 + r as u32);
    }
    m.set_gpr(1, BASE);
    TexpandLayout::new(&EXAMPLE_SPEC).unwrap().store(
        m.memory_mut(),
        BASE,
        &PathState::initial(4),
        0,
        StateMask::all(4),
    );
    let before = m.gprs().to_vec();
    m.step_instruction(p.store());
    assert!(!m.is_halted());
    assert_eq!(m.gprs(), &before[..]);
}

#[test]
fn texpand_slot_and_rebind() {
    let mut p = Profile::with_texpand(ProfileKind::Register, &EXAMPLE_SPEC).unwrap();
    assert!(p.has_texpand());
    assert_eq!(p.lookup("texpand").unwrap().opcode, TEXPAND_OPCODE);
    let r = expand::texpand_routine(
        ProfileKind::Register,
        &TexpandLayout::new(&STANDARD_75_SPEC).unwrap(),
        &STANDARD_75_SPEC,
    )
    .unwrap();
    let def = InstrDef::new("TEXPAND", TEXPAND_OPCODE, Format::None);
    assert!(p.add_instruction(def.clone(), r.clone(), false).is_err());
    p.add_instruction(def, r, true).unwrap();
    assert!(TexpandLayout::for_states(1).is_err());
}

#[test]
fn profile_names_parse() {
    assert_eq!(
        "register".parse::<ProfileKind>().unwrap(),
        ProfileKind::Register
    );
    assert_eq!("STACK".parse::<ProfileKind>().unwrap(), ProfileKind::Stack);
    assert!("vliw".parse::<ProfileKind>().is_err());
}

use super::*;
use crate::convcode::{viterbi_decode, STANDARD_75_SPEC};
use crate::isa::TEXPAND_OPCODE;

#[test]
fn example_config_decodes_to_worked_example() {
    let cfg = WorkloadConfig::new(ProfileKind::Register, Variant::Texpand, 12).unwrap();
    assert_eq!(cfg.received.to_pair_string(), "10 11 11 00 11 00");
    let w = gen_program(&cfg).unwrap();
    assert_eq!(w.expected_output.to_plain_string(), "110100");
    assert_eq!(w.expected_calls, 6);
    assert_eq!(w.node_expansions, 17);
}

#[test]
fn all_four_programs_decode_correctly() {
    for profile in ProfileKind::ALL {
        for variant in Variant::ALL {
            for n in [12, 24, 64] {
                let cfg = WorkloadConfig::new(profile, variant, n).unwrap();
                let built = build(&cfg).unwrap();
                let r = built.run(u64::MAX).unwrap();
                assert!(
                    r.decoded_ok,
                    "{profile} {variant} {n}: {:?} {:?}",
                    r.stats.halt, r.output
                );
                assert_eq!(r.calls as usize, built.workload.expected_calls);
            }
        }
    }
}

#[test]
fn other_encoders_decode_correctly() {
    let k4 = EncoderSpec::new(4, 0b1111, 0b1011).unwrap();
    let k5 = EncoderSpec::new(5, 0b10011, 0b11101).unwrap();
    for spec in [STANDARD_75_SPEC, k4, k5] {
        for profile in ProfileKind::ALL {
            for variant in Variant::ALL {
                let cfg = WorkloadConfig::with_seed(profile, variant, 30, &spec, 9).unwrap();
                let r = build(&cfg).unwrap().run(u64::MAX).unwrap();
                assert!(r.decoded_ok, "{spec:?} {profile} {variant}");
            }
        }
    }
}

#[test]
fn variants_agree_and_texpand_is_cheaper() {
    for profile in ProfileKind::ALL {
        let a =
            build(&WorkloadConfig::new(profile, Variant::AssemblyFunction, 12).unwrap()).unwrap();
        let t = build(&WorkloadConfig::new(profile, Variant::Texpand, 12).unwrap()).unwrap();
        assert_eq!(a.workload.expected_output, t.workload.expected_output);
        let (ra, rt) = (a.run(u64::MAX).unwrap(), t.run(u64::MAX).unwrap());
        assert_eq!(ra.output, rt.output);
        assert!(rt.stats.cycles < ra.stats.cycles);
    }
}

#[test]
fn assembly_variant_never_uses_texpand() {
    for profile in ProfileKind::ALL {
        let cfg = WorkloadConfig::new(profile, Variant::AssemblyFunction, 36).unwrap();
        let built = build(&cfg).unwrap();
        let extended = crate::isa::Profile::with_texpand(profile, &cfg.spec).unwrap();
        let image = assemble(&built.workload.source, &extended).unwrap();
        assert!(!image.uses_opcode(&extended, TEXPAND_OPCODE));
        let tex = build(&WorkloadConfig::new(profile, Variant::Texpand, 36).unwrap()).unwrap();
        assert!(tex.image.uses_opcode(&tex.profile, TEXPAND_OPCODE));
    }
}

#[test]
fn received_words_are_seeded_and_correctable() {
    let a = received_word(&EXAMPLE_SPEC, 48, DEFAULT_SEED).unwrap();
    let b = received_word(&EXAMPLE_SPEC, 48, DEFAULT_SEED).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, received_word(&EXAMPLE_SPEC, 48, 1).unwrap());
    assert_eq!(a.len(), 48);
    let decoded = viterbi_decode(&EXAMPLE_SPEC, &a).unwrap();
    assert_eq!(decoded.len(), 24);
}

#[test]
fn config_validation() {
    assert!(WorkloadConfig::new(ProfileKind::Register, Variant::Texpand, 0).is_err());
    assert!(WorkloadConfig::new(ProfileKind::Register, Variant::Texpand, 13).is_err());
    assert!(WorkloadConfig::new(ProfileKind::Register, Variant::Texpand, 66).is_err());
    assert!(WorkloadConfig::new(ProfileKind::Register, Variant::Texpand, 4).is_ok());
    let empty = WorkloadConfig::with_received(
        ProfileKind::Stack,
        Variant::Texpand,
        &EXAMPLE_SPEC,
        BitVec::new(),
    );
    assert!(matches!(empty, Err(WorkloadError::BitCount { .. })));
    assert_eq!("asm".parse::<Variant>().unwrap(), Variant::AssemblyFunction);
}

#[test]
fn trellis_functions_assemble_and_report_size() {
    for profile in ProfileKind::ALL {
        let n = trellis_function_size(profile, &EXAMPLE_SPEC).unwrap();
        assert!(n > 0);
    }
}

fn run_function(
    profile: ProfileKind,
    paths: &PathState,
    pair: u8,
    mask: u32,
) -> (crate::micro::MachineState, Profile) {
    let spec = EXAMPLE_SPEC;
    let layout = TexpandLayout::new(&spec).unwrap();
    let caller = match profile {
        ProfileKind::Register => format!("ADDI R1, R0, {LAYOUT}\nJAL acs\nHALT\n"),
        ProfileKind::Stack => format!("sipush {LAYOUT}\njsr acs\nhalt\n"),
    };
    let src = caller + &trellis_function_source(profile, &spec).unwrap();
    let p = Profile::new(profile);
    let image = assemble(&src, &p).unwrap();
    let mut m = image.load(&p).unwrap();
    layout.store(
        m.memory_mut(),
        LAYOUT,
        paths,
        pair,
        crate::convcode::StateMask(mask),
    );
    m.run(p.store(), u64::MAX);
    (m, p)
}

#[test]
fn trellis_functions_match_acs_step() {
    use rand::{Rng, SeedableRng};
    let spec = EXAMPLE_SPEC;
    let trellis = Trellis::new(&spec);
    let layout = TexpandLayout::new(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for profile in ProfileKind::ALL {
        for _ in 0..200 {
            let stages = rng.gen_range(0..31);
            let entries = (0..4)
                .map(|_| {
                    rng.gen_bool(0.7).then(|| crate::convcode::PathEntry {
                        weight: rng.gen_range(0..500),
                        history: BitVec::from_bits((0..stages).map(|_| rng.gen_range(0..2u8))),
                    })
                })
                .collect();
            let paths = PathState { stages, entries };
            let pair = rng.gen_range(0..4u8);
            let mask = rng.gen_range(1..16u32);
            let (m, _) = run_function(profile, &paths, pair, mask);
            match crate::convcode::acs_step(
                &trellis,
                &paths,
                pair,
                crate::convcode::StateMask(mask),
            ) {
                Ok(next) => {
                    assert_eq!(m.halt_reason(), Some(&HaltReason::Halted));
                    assert_eq!(layout.load(m.memory(), LAYOUT), next);
                    if profile == ProfileKind::Stack {
                        assert_eq!(crate::isa::stack::depth(&m), 0);
                    }
                }
                Err(_) => assert!(m.halt_reason().and_then(HaltReason::fault).is_some()),
            }
        }
    }
}

#[test]
fn trellis_function_faults_when_all_dead() {
    for profile in ProfileKind::ALL {
        let dead = PathState {
            stages: 0,
            entries: vec![None; 4],
        };
        let (m, _) = run_function(profile, &dead, 0, 0xF);
        assert!(matches!(
            m.halt_reason().and_then(HaltReason::fault),
            Some(crate::micro::Fault::Trap { .. })
        ));
    }
}

#[test]
fn programs_round_trip_through_disassembly() {
    for profile in ProfileKind::ALL {
        for variant in Variant::ALL {
            let built = build(&WorkloadConfig::new(profile, variant, 24).unwrap()).unwrap();
            let text = crate::asm::disassemble(&built.image, &built.profile).unwrap();
            let again = assemble(&text, &built.profile).unwrap();
            assert_eq!(again.code, built.image.code);
            assert_eq!(again.data, built.image.data);
        }
    }
}

#[test]
fn program_paths() {
    assert_eq!(
        program_path(ProfileKind::Stack, Variant::Texpand, 12),
        PathBuf::from("stack/texpand/viterbi_12.sasm")
    );
}

#[test]
fn oversized_encoders_are_rejected() {
    let k6 = EncoderSpec::new(6, 0b110101, 0b101111).unwrap();
    assert!(matches!(
        WorkloadConfig::with_seed(ProfileKind::Register, Variant::Texpand, 30, &k6, 1),
        Err(WorkloadError::ConstraintLength(6))
    ));
}

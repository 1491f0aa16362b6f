use super::*;

fn side(ai: u64, mi: u64) -> MicrocodedSide {
    MicrocodedSide {
        assembly_instructions: ai,
        microinstructions_per_call: mi,
        fetch_per_instruction: 1,
    }
}

#[test]
fn microcoded_totals_arithmetic() {
    let t = microcoded_totals(&side(10, 20), 3, 4);
    assert_eq!(t.total_micro, Some(90));
    assert_eq!(t.total_cycles, 360);
}

#[test]
fn improvement_truncates() {
    assert_eq!(improvement_tenths(1121, 665), 685);
    assert_eq!(improvement_tenths(25840, 7676), 2366);
    assert_eq!(improvement_tenths(100, 100), 0);
    let i = Improvement::new(300, 100);
    assert_eq!(
        (i.improvement_pct, i.improvement_pct_whole, i.speedup),
        (200.0, 200, 3.0)
    );
}

#[test]
fn validation_rejects_zero_counts() {
    let bad = CostModelParams::Microcoded {
        baseline: side(0, 277),
        custom: side(1, 100),
        calls: 19,
        cycles_per_micro: 4,
    };
    assert!(matches!(
        cost_model(&bad),
        Err(BenchError::NonPositive("assembly_instructions"))
    ));
    let bad = CostModelParams::PerCallCycles {
        baseline_cycles_per_call: 59,
        custom_cycles_per_call: 28,
        calls: 0,
    };
    assert!(cost_model(&bad).is_err());
    assert!(preset("vax").is_err());
}

#[test]
fn params_serialize_with_mode_tag() {
    let p = preset("nios_e").unwrap();
    let v = serde_json::to_value(p).unwrap();
    assert_eq!(v["mode"], "per_call_cycles");
    let back: CostModelParams = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
}

#[test]
fn empty_benchmark_rejected() {
    assert!(matches!(run_benchmark(&[]), Err(BenchError::NoConfigs)));
}

#[test]
fn small_benchmark_report_shapes() {
    let configs = default_configs(&[12, 24], workloads::DEFAULT_SEED).unwrap();
    let report = run_benchmark(&configs).unwrap();
    assert_eq!(report.schema, 1);
    assert_eq!(report.runs.len(), 8);
    assert_eq!(report.pairs.len(), 4);
    assert!(report.all_decoded());
    assert!(report
        .pairs
        .iter()
        .all(|p| p.valid && p.improvement.improvement_pct > 0.0));

    let json = render(&report, ReportFormat::Json).unwrap();
    assert_eq!(parse_report(&json).unwrap(), report);

    let csv = render(&report, ReportFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), report.runs.len() + 1);

    let dat = render(&report, ReportFormat::Plotdat).unwrap();
    let data_lines: Vec<_> = dat
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    assert_eq!(data_lines.len(), 4);
    assert!(data_lines.iter().all(|l| l.split_whitespace().count() == 3));
}

#[test]
fn emit_to_file_and_unwritable_path() {
    let configs = default_configs(&[12], workloads::DEFAULT_SEED).unwrap();
    let report = run_benchmark(&configs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit_report(&report, ReportFormat::Csv, &path).unwrap();
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("profile,variant"));
    let bad = dir.path().join("missing").join("r.json");
    assert!(matches!(
        emit_report(&report, ReportFormat::Json, &bad),
        Err(BenchError::Io(_))
    ));
}

#[test]
fn formats_parse() {
    assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
    assert!("xml".parse::<ReportFormat>().is_err());
}

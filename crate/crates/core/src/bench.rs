//! Benchmark runner, closed-form cost model and report emitters.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convcode::{EncoderSpec, EXAMPLE_SPEC};
use crate::isa::{Profile, ProfileKind, TEXPAND_OPCODE};
use crate::micro::HaltReason;
use crate::workloads::{self, Variant, WorkloadConfig, WorkloadError, DEFAULT_SIZES};

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;
/// Clock cycles per microinstruction on both microcoded profiles.
pub const CYCLES_PER_MICRO: u64 = 4;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no benchmark configurations given")]
    NoConfigs,
    #[error("{0} must be a positive integer")]
    NonPositive(&'static str),
    #[error("unknown report format '{0}'")]
    UnknownFormat(String),
    #[error("unknown cost-model preset '{0}'")]
    UnknownPreset(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

// ---------------------------------------------------------------- percentages

/// Relative improvement of `custom` over `baseline` cycles, in whole tenths
/// of a percent, rounded toward zero.
pub fn improvement_tenths(baseline: u64, custom: u64) -> i64 {
    let (b, c) = (i128::from(baseline), i128::from(custom));
    let t = 1000 * (b - c) / c;
    t as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    /// `(baseline - custom) / custom * 100`, truncated to one decimal.
    pub improvement_pct: f64,
    /// The same, truncated to a whole percent.
    pub improvement_pct_whole: i64,
    /// `baseline / custom`, truncated to two decimals.
    pub speedup: f64,
}

impl Improvement {
    pub fn new(baseline: u64, custom: u64) -> Self {
        let tenths = improvement_tenths(baseline, custom);
        let hundredths = (u128::from(baseline) * 100 / u128::from(custom)) as u64;
        Self {
            improvement_pct: tenths as f64 / 10.0,
            improvement_pct_whole: tenths / 10,
            speedup: hundredths as f64 / 100.0,
        }
    }
}

// ---------------------------------------------------------------- cost model

/// One side of a microcoded comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicrocodedSide {
    pub assembly_instructions: u64,
    pub microinstructions_per_call: u64,
    pub fetch_per_instruction: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CostModelParams {
    Microcoded {
        baseline: MicrocodedSide,
        custom: MicrocodedSide,
        calls: u64,
        cycles_per_micro: u64,
    },
    PerCallCycles {
        baseline_cycles_per_call: u64,
        custom_cycles_per_call: u64,
        calls: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideTotals {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_micro: Option<u64>,
    pub total_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModelResult {
    pub baseline: SideTotals,
    pub custom: SideTotals,
    #[serde(flatten)]
    pub improvement: Improvement,
}

fn positive(v: u64, name: &'static str) -> Result<u64, BenchError> {
    if v == 0 {
        Err(BenchError::NonPositive(name))
    } else {
        Ok(v)
    }
}

/// `(micro per call + instructions * fetch steps) * calls` microinstructions,
/// each costing `cycles_per_micro` cycles.
pub fn microcoded_totals(side: &MicrocodedSide, calls: u64, cycles_per_micro: u64) -> SideTotals {
    let micro = (side.microinstructions_per_call
        + side.assembly_instructions * side.fetch_per_instruction)
        * calls;
    SideTotals {
        total_micro: Some(micro),
        total_cycles: micro * cycles_per_micro,
    }
}

pub fn cost_model(params: &CostModelParams) -> Result<CostModelResult, BenchError> {
    let (baseline, custom) = match *params {
        CostModelParams::Microcoded {
            baseline,
            custom,
            calls,
            cycles_per_micro,
        } => {
            for side in [&baseline, &custom] {
                positive(side.assembly_instructions, "assembly_instructions")?;
                positive(
                    side.microinstructions_per_call,
                    "microinstructions_per_call",
                )?;
                positive(side.fetch_per_instruction, "fetch_per_instruction")?;
            }
            positive(calls, "calls")?;
            positive(cycles_per_micro, "cycles_per_micro")?;
            (
                microcoded_totals(&baseline, calls, cycles_per_micro),
                microcoded_totals(&custom, calls, cycles_per_micro),
            )
        }
        CostModelParams::PerCallCycles {
            baseline_cycles_per_call,
            custom_cycles_per_call,
            calls,
        } => {
            positive(baseline_cycles_per_call, "baseline_cycles_per_call")?;
            positive(custom_cycles_per_call, "custom_cycles_per_call")?;
            positive(calls, "calls")?;
            let side = |c: u64| SideTotals {
                total_micro: None,
                total_cycles: c * calls,
            };
            (side(baseline_cycles_per_call), side(custom_cycles_per_call))
        }
    };
    Ok(CostModelResult {
        baseline,
        custom,
        improvement: Improvement::new(baseline.total_cycles, custom.total_cycles),
    })
}

/// Trellis-expansion calls assumed by the cost-model presets.
pub const PRESET_CALLS: u64 = 19;

/// Named parameter sets: the two microcoded machines and three soft-core
/// configurations measured in cycles per call.
pub fn presets() -> Vec<(&'static str, CostModelParams)> {
    let micro = |ai: u64, mi: u64, cmi: u64| CostModelParams::Microcoded {
        baseline: MicrocodedSide {
            assembly_instructions: ai,
            microinstructions_per_call: mi,
            fetch_per_instruction: 1,
        },
        custom: MicrocodedSide {
            assembly_instructions: 1,
            microinstructions_per_call: cmi,
            fetch_per_instruction: 1,
        },
        calls: PRESET_CALLS,
        cycles_per_micro: CYCLES_PER_MICRO,
    };
    let per_call = |b: u64, c: u64| CostModelParams::PerCallCycles {
        baseline_cycles_per_call: b,
        custom_cycles_per_call: c,
        calls: PRESET_CALLS,
    };
    vec![
        ("dlx", micro(63, 277, 100)),
        ("picojava", micro(41, 255, 102)),
        ("nios_f", per_call(59, 28)),
        ("nios_s", per_call(59, 35)),
        ("nios_e", per_call(264, 151)),
    ]
}

pub fn preset(name: &str) -> Result<CostModelParams, BenchError> {
    presets()
        .into_iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, p)| p)
        .ok_or_else(|| BenchError::UnknownPreset(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModelRow {
    pub name: String,
    pub params: CostModelParams,
    pub result: CostModelResult,
}

pub fn preset_table() -> Vec<CostModelRow> {
    presets()
        .into_iter()
        .map(|(name, params)| CostModelRow {
            name: name.to_string(),
            params,
            result: cost_model(&params).expect("presets are valid"),
        })
        .collect()
}

// ---------------------------------------------------------------- benchmark

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub profile: ProfileKind,
    pub variant: Variant,
    pub n_bits: usize,
    pub encoder: EncoderSpec,
    pub received: String,
    pub expected: String,
    pub output: String,
    pub assembly_instructions: u64,
    pub microinstructions: u64,
    pub fetch_steps: u64,
    pub total_micro: u64,
    pub cycles: u64,
    /// Executed TEXPAND instructions, or subroutine calls in the assembly
    /// variant.
    pub texpand_or_function_calls: u64,
    /// One trellis-expansion per stage.
    pub expected_calls: usize,
    /// Live trellis nodes the reference decoder computes.
    pub node_expansions: usize,
    /// Microinstructions spent inside TEXPAND (texpand variant only).
    pub texpand_micro: Option<u64>,
    pub decoded_ok: bool,
    pub halt: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub profile: ProfileKind,
    pub n_bits: usize,
    pub cycles_baseline: u64,
    pub cycles_custom: u64,
    #[serde(flatten)]
    pub improvement: Improvement,
    /// Both runs decoded correctly.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticCounts {
    pub profile: ProfileKind,
    /// Instructions in the base-ISA trellis subroutine.
    pub trellis_function_instructions: usize,
    /// Microinstructions in the TEXPAND routine (static length).
    pub texpand_routine_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub cycles_per_micro: u64,
    pub runs: Vec<RunRecord>,
    pub pairs: Vec<PairRecord>,
    pub static_counts: Vec<StaticCounts>,
    pub cost_model: Vec<CostModelRow>,
    pub notes: Vec<String>,
}

impl BenchReport {
    pub fn all_decoded(&self) -> bool {
        self.runs.iter().all(|r| r.decoded_ok)
    }

    pub fn any_fault(&self) -> bool {
        self.runs.iter().any(|r| r.error.is_some())
    }
}

/// Every profile and variant on the example encoder at `sizes`.
pub fn default_configs(sizes: &[usize], seed: u64) -> Result<Vec<WorkloadConfig>, BenchError> {
    let mut out = Vec::new();
    for profile in ProfileKind::ALL {
        for variant in Variant::ALL {
            for &n in sizes {
                out.push(WorkloadConfig::with_seed(
                    profile,
                    variant,
                    n,
                    &EXAMPLE_SPEC,
                    seed,
                )?);
            }
        }
    }
    Ok(out)
}

pub fn default_suite() -> Result<Vec<WorkloadConfig>, BenchError> {
    default_configs(&DEFAULT_SIZES, workloads::DEFAULT_SEED)
}

fn run_one(cfg: &WorkloadConfig) -> RunRecord {
    let mut rec = RunRecord {
        profile: cfg.profile,
        variant: cfg.variant,
        n_bits: cfg.n_bits,
        encoder: cfg.spec,
        received: cfg.received.to_pair_string(),
        expected: String::new(),
        output: String::new(),
        assembly_instructions: 0,
        microinstructions: 0,
        fetch_steps: 0,
        total_micro: 0,
        cycles: 0,
        texpand_or_function_calls: 0,
        expected_calls: 0,
        node_expansions: 0,
        texpand_micro: None,
        decoded_ok: false,
        halt: String::new(),
        error: None,
    };
    let built = match workloads::build(cfg) {
        Ok(b) => b,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.expected = built.workload.expected_output.to_plain_string();
    rec.expected_calls = built.workload.expected_calls;
    rec.node_expansions = built.workload.node_expansions;
    match built.run(crate::micro::DEFAULT_MAX_CYCLES) {
        Ok(r) => {
            let s = &r.stats;
            rec.output = r.output.to_plain_string();
            rec.assembly_instructions = s.assembly_instructions;
            rec.microinstructions = s.microinstructions;
            rec.fetch_steps = s.fetch_microsteps;
            rec.total_micro = s.total_micro();
            rec.cycles = s.cycles;
            rec.texpand_or_function_calls = r.calls;
            rec.texpand_micro =
                (cfg.variant == Variant::Texpand).then(|| s.opcode_micro(TEXPAND_OPCODE.0));
            rec.decoded_ok = r.decoded_ok;
            rec.halt = s.halt.as_ref().map(ToString::to_string).unwrap_or_default();
            if let Some(HaltReason::Fault { fault }) = &s.halt {
                rec.error = Some(fault.to_string());
            } else if s.halt == Some(HaltReason::CycleLimit) {
                rec.error = Some("cycle limit reached".into());
            }
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn static_counts(spec: &EncoderSpec) -> Vec<StaticCounts> {
    ProfileKind::ALL
        .iter()
        .filter_map(|&p| {
            Some(StaticCounts {
                profile: p,
                trellis_function_instructions: workloads::trellis_function_size(p, spec).ok()?,
                texpand_routine_lines: Profile::with_texpand(p, spec)
                    .ok()?
                    .routine_len(crate::isa::expand::mnemonic(p))?,
            })
        })
        .collect()
}

/// Assembles and simulates every config (in parallel), checks each output
/// against the reference decoder and pairs the two variants of each
/// (profile, size). Run order in the report follows `configs`.
pub fn run_benchmark(configs: &[WorkloadConfig]) -> Result<BenchReport, BenchError> {
    if configs.is_empty() {
        return Err(BenchError::NoConfigs);
    }
    for c in configs {
        c.validate()?;
    }
    let runs: Vec<RunRecord> = configs.par_iter().map(run_one).collect();

    let mut by_key: BTreeMap<(ProfileKind, usize), [Option<&RunRecord>; 2]> = BTreeMap::new();
    for r in &runs {
        let slot = match r.variant {
            Variant::AssemblyFunction => 0,
            Variant::Texpand => 1,
        };
        by_key.entry((r.profile, r.n_bits)).or_default()[slot].get_or_insert(r);
    }
    let pairs = by_key
        .into_iter()
        .filter_map(|((profile, n_bits), [a, t])| {
            let (a, t) = (a?, t?);
            (a.cycles > 0 && t.cycles > 0).then(|| PairRecord {
                profile,
                n_bits,
                cycles_baseline: a.cycles,
                cycles_custom: t.cycles,
                improvement: Improvement::new(a.cycles, t.cycles),
                valid: a.decoded_ok && t.decoded_ok,
            })
        })
        .collect();

    let notes = vec![
        "improvement_pct = (cycles_baseline - cycles_custom) / cycles_custom * 100, truncated to one decimal; \
         improvement_pct_whole truncates to a whole percent"
            .to_string(),
        "speedup = cycles_baseline / cycles_custom, truncated to two decimals".to_string(),
        format!(
            "cycles = {CYCLES_PER_MICRO} x (microinstructions + fetch_steps); each fetch is one microinstruction"
        ),
        "expected_calls counts one trellis expansion per stage (n_bits / 2); node_expansions counts the live \
         trellis nodes computed over all stages"
            .to_string(),
        "cost_model rows use 19 calls per decode; the nios_s row repeats the nios_f baseline of 59 cycles per call \
         (1121 in total) as tabulated"
            .to_string(),
    ];

    Ok(BenchReport {
        schema: SCHEMA,
        cycles_per_micro: CYCLES_PER_MICRO,
        runs,
        pairs,
        static_counts: static_counts(&configs[0].spec),
        cost_model: preset_table(),
        notes,
    })
}

// ---------------------------------------------------------------- output

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Plotdat,
}

impl FromStr for ReportFormat {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "plotdat" | "dat" => Ok(ReportFormat::Plotdat),
            _ => Err(BenchError::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Plotdat => "plotdat",
        })
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    profile: ProfileKind,
    variant: Variant,
    n_bits: usize,
    assembly_instructions: u64,
    microinstructions: u64,
    fetch_steps: u64,
    total_micro: u64,
    cycles: u64,
    texpand_or_function_calls: u64,
    texpand_micro: Option<u64>,
    decoded_ok: bool,
    output: &'a str,
    halt: &'a str,
}

pub fn render(report: &BenchReport, format: ReportFormat) -> Result<String, BenchError> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &report.runs {
                w.serialize(CsvRow {
                    profile: r.profile,
                    variant: r.variant,
                    n_bits: r.n_bits,
                    assembly_instructions: r.assembly_instructions,
                    microinstructions: r.microinstructions,
                    fetch_steps: r.fetch_steps,
                    total_micro: r.total_micro,
                    cycles: r.cycles,
                    texpand_or_function_calls: r.texpand_or_function_calls,
                    texpand_micro: r.texpand_micro,
                    decoded_ok: r.decoded_ok,
                    output: &r.output,
                    halt: &r.halt,
                })?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        ReportFormat::Plotdat => {
            let mut out = String::new();
            for profile in ProfileKind::ALL {
                let rows: Vec<_> = report
                    .pairs
                    .iter()
                    .filter(|p| p.profile == profile)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                if !out.is_empty() {
                    out.push_str("\n\n");
                }
                out.push_str(&format!(
                    "# profile {profile}\n# n_bits cycles_baseline cycles_custom\n"
                ));
                for p in rows {
                    out.push_str(&format!(
                        "{} {} {}\n",
                        p.n_bits, p.cycles_baseline, p.cycles_custom
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Writes the report to `path` in `format`.
pub fn emit_report(
    report: &BenchReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), BenchError> {
    std::fs::write(path, render(report, format)?)?;
    Ok(())
}

pub fn parse_report(json: &str) -> Result<BenchReport, BenchError> {
    Ok(serde_json::from_str(json)?)
}

#[cfg(test)]
mod tests;

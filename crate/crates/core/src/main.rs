use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use texpand::asm::{assemble, disassemble, ProgramImage};
use texpand::bench::{
    self, CostModelParams, MicrocodedSide, ReportFormat, CYCLES_PER_MICRO, PRESET_CALLS,
};
use texpand::bits::BitVec;
use texpand::convcode::{self, EncoderSpec, EXAMPLE_SPEC, STANDARD_75_SPEC};
use texpand::isa::{Profile, ProfileKind};
use texpand::workloads::{self, Variant, WorkloadConfig, DEFAULT_SIZES};

#[derive(Parser)]
#[command(
    name = "texpand",
    version,
    about = "Trellis-expansion instruction simulator and benchmark"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CodeArg {
    /// Encoder: `example`, `75`, or `K:TAPS1:TAPS2` (taps in binary with 0b, octal with 0o, else decimal)
    #[arg(long, default_value = "example")]
    code: String,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Fmt,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
    Plotdat,
}

impl From<Fmt> for ReportFormat {
    fn from(f: Fmt) -> Self {
        match f {
            Fmt::Json => ReportFormat::Json,
            Fmt::Csv => ReportFormat::Csv,
            Fmt::Plotdat => ReportFormat::Plotdat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CostMode {
    Microcoded,
    PerCall,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a data word
    Encode {
        data: String,
        #[command(flatten)]
        code: CodeArg,
        /// Append K-1 zero flush bits first
        #[arg(long)]
        flush: bool,
    },
    /// Flip bits of a codeword at 1-based positions
    Corrupt {
        codeword: String,
        #[arg(long, value_delimiter = ',', required = true)]
        flip: Vec<usize>,
    },
    /// Viterbi-decode a received word
    Decode {
        received: String,
        #[command(flatten)]
        code: CodeArg,
    },
    /// Assemble a source file into a JSON image, or disassemble an image
    Asm {
        input: PathBuf,
        #[arg(long, default_value = "register")]
        profile: String,
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        disasm: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one workload on the simulator
    Run {
        #[arg(long, default_value = "register")]
        profile: String,
        #[arg(long, default_value = "texpand")]
        variant: String,
        #[arg(long, default_value_t = 12)]
        bits: usize,
        #[arg(long, default_value = "0xC0DE")]
        seed: String,
        /// Use this received word instead of a generated one
        #[arg(long)]
        received: Option<String>,
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both variants on both profiles and emit a report
    Bench {
        #[arg(long, value_delimiter = ',')]
        bits: Vec<usize>,
        #[arg(long, default_value = "0xC0DE")]
        seed: String,
        /// Restrict to one profile
        #[arg(long)]
        profile: Option<String>,
        #[command(flatten)]
        code: CodeArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form cost model
    Costmodel {
        /// dlx, picojava, nios_f, nios_s, nios_e or all
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<CostMode>,
        #[arg(long)]
        baseline_instructions: Option<u64>,
        #[arg(long)]
        baseline_micro: Option<u64>,
        #[arg(long)]
        custom_instructions: Option<u64>,
        #[arg(long)]
        custom_micro: Option<u64>,
        #[arg(long, default_value_t = 1)]
        fetch: u64,
        #[arg(long, default_value_t = CYCLES_PER_MICRO)]
        cycles_per_micro: u64,
        #[arg(long)]
        baseline_cycles: Option<u64>,
        #[arg(long)]
        custom_cycles: Option<u64>,
        #[arg(long, default_value_t = PRESET_CALLS)]
        calls: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a saved JSON bench report to another format
    Report {
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write the generated workload programs under a directory
    Gen {
        #[arg(long, default_value = "workloads")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        bits: Vec<usize>,
    },
}

enum Failure {
    Validation(String),
    Mismatch(String),
    Fault(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Fault(_) => 3,
        }
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Validation(e.to_string())
}

fn parse_num(s: &str) -> Result<u32, Failure> {
    let s = s.trim();
    let r = if let Some(b) = s.strip_prefix("0b") {
        u32::from_str_radix(b, 2)
    } else if let Some(o) = s.strip_prefix("0o") {
        u32::from_str_radix(o, 8)
    } else if let Some(h) = s.strip_prefix("0x") {
        u32::from_str_radix(h, 16)
    } else {
        s.parse()
    };
    r.map_err(|_| invalid(format!("bad number '{s}'")))
}

fn parse_seed(s: &str) -> Result<u64, Failure> {
    let t = s.trim();
    let r = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => t.parse().or_else(|_| u64::from_str_radix(t, 16)),
    };
    r.map_err(|_| invalid(format!("bad seed '{s}'")))
}

impl CodeArg {
    fn spec(&self) -> Result<EncoderSpec, Failure> {
        match self.code.as_str() {
            "example" => Ok(EXAMPLE_SPEC),
            "75" | "7,5" => Ok(STANDARD_75_SPEC),
            other => {
                let parts: Vec<_> = other.split(':').collect();
                let [k, a, b] = parts[..] else {
                    return Err(invalid(format!(
                        "bad encoder '{other}', expected K:TAPS1:TAPS2"
                    )));
                };
                EncoderSpec::new(parse_num(k)?, parse_num(a)?, parse_num(b)?).map_err(invalid)
            }
        }
    }
}

fn bits(s: &str) -> Result<BitVec, Failure> {
    s.parse().map_err(invalid)
}

fn write_out(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn profiles(arg: Option<&str>) -> Result<Vec<ProfileKind>, Failure> {
    match arg {
        Some(p) => Ok(vec![p.parse().map_err(invalid)?]),
        None => Ok(ProfileKind::ALL.to_vec()),
    }
}

fn costmodel_params(cmd: &Cmd) -> Result<Vec<(String, CostModelParams)>, Failure> {
    let Cmd::Costmodel {
        preset,
        mode,
        baseline_instructions,
        baseline_micro,
        custom_instructions,
        custom_micro,
        fetch,
        cycles_per_micro,
        baseline_cycles,
        custom_cycles,
        calls,
        ..
    } = cmd
    else {
        unreachable!()
    };
    let need =
        |v: &Option<u64>, name: &str| v.ok_or_else(|| invalid(format!("--{name} is required")));
    match (preset.as_deref(), mode) {
        (Some("all") | None, None) => Ok(bench::presets()
            .into_iter()
            .map(|(n, p)| (n.to_string(), p))
            .collect()),
        (Some(name), None) => Ok(vec![(
            name.to_string(),
            bench::preset(name).map_err(invalid)?,
        )]),
        (None, Some(CostMode::Microcoded)) => {
            let side = |ai, mi| MicrocodedSide {
                assembly_instructions: ai,
                microinstructions_per_call: mi,
                fetch_per_instruction: *fetch,
            };
            Ok(vec![(
                "custom".into(),
                CostModelParams::Microcoded {
                    baseline: side(
                        need(baseline_instructions, "baseline-instructions")?,
                        need(baseline_micro, "baseline-micro")?,
                    ),
                    custom: side(
                        need(custom_instructions, "custom-instructions")?,
                        need(custom_micro, "custom-micro")?,
                    ),
                    calls: *calls,
                    cycles_per_micro: *cycles_per_micro,
                },
            )])
        }
        (None, Some(CostMode::PerCall)) => Ok(vec![(
            "custom".into(),
            CostModelParams::PerCallCycles {
                baseline_cycles_per_call: need(baseline_cycles, "baseline-cycles")?,
                custom_cycles_per_call: need(custom_cycles, "custom-cycles")?,
                calls: *calls,
            },
        )]),
        (Some(_), Some(_)) => Err(invalid("--preset and --mode are exclusive")),
    }
}

fn execute(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Encode { data, code, flush } => {
            let spec = code.spec()?;
            let data = bits(&data)?;
            let data = if flush {
                convcode::with_flush(&spec, &data)
            } else {
                data
            };
            println!("{}", convcode::encode(&spec, &data).to_pair_string());
        }
        Cmd::Corrupt { codeword, flip } => {
            let c = bits(&codeword)?.flip_bits(&flip).map_err(invalid)?;
            println!("{}", c.to_pair_string());
        }
        Cmd::Decode { received, code } => {
            let d = convcode::viterbi_decode_traced(&code.spec()?, &bits(&received)?)
                .map_err(invalid)?;
            println!("{}", d.bits);
            println!("weight {}", d.weight);
            println!("acs_calls {}", d.trace.acs_calls);
            println!("node_expansions {}", d.trace.node_expansions);
        }
        Cmd::Asm {
            input,
            profile,
            code,
            disasm,
            out,
        } => {
            let kind: ProfileKind = profile.parse().map_err(invalid)?;
            let prof = Profile::with_texpand(kind, &code.spec()?).map_err(invalid)?;
            let text = fs::read_to_string(&input)
                .map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            let result = if disasm {
                let image = ProgramImage::from_json(&text).map_err(invalid)?;
                disassemble(&image, &prof).map_err(invalid)?
            } else {
                assemble(&text, &prof).map_err(invalid)?.to_json() + "\n"
            };
            write_out(&result, out.as_ref())?;
        }
        Cmd::Run {
            profile,
            variant,
            bits: n,
            seed,
            received,
            code,
            out,
        } => {
            let kind: ProfileKind = profile.parse().map_err(invalid)?;
            let variant: Variant = variant.parse().map_err(invalid)?;
            let spec = code.spec()?;
            let cfg = match received {
                Some(r) => WorkloadConfig::with_received(kind, variant, &spec, bits(&r)?),
                None => WorkloadConfig::with_seed(kind, variant, n, &spec, parse_seed(&seed)?),
            }
            .map_err(invalid)?;
            let report = bench::run_benchmark(&[cfg]).map_err(invalid)?;
            let run = &report.runs[0];
            let json = serde_json::to_string_pretty(run).map_err(invalid)? + "\n";
            write_out(&json, out.as_ref())?;
            if let Some(e) = &run.error {
                return Err(Failure::Fault(e.clone()));
            }
            if !run.decoded_ok {
                return Err(Failure::Mismatch(format!(
                    "decoded {} expected {}",
                    run.output, run.expected
                )));
            }
        }
        Cmd::Bench {
            bits: sizes,
            seed,
            profile,
            code,
            out,
        } => {
            let sizes = if sizes.is_empty() {
                DEFAULT_SIZES.to_vec()
            } else {
                sizes
            };
            let spec = code.spec()?;
            let seed = parse_seed(&seed)?;
            let mut configs = Vec::new();
            for p in profiles(profile.as_deref())? {
                for v in Variant::ALL {
                    for &n in &sizes {
                        configs.push(
                            WorkloadConfig::with_seed(p, v, n, &spec, seed).map_err(invalid)?,
                        );
                    }
                }
            }
            let report = bench::run_benchmark(&configs).map_err(invalid)?;
            write_out(
                &bench::render(&report, out.format.into()).map_err(invalid)?,
                out.out.as_ref(),
            )?;
            if report.any_fault() {
                return Err(Failure::Fault("at least one run faulted".into()));
            }
            if !report.all_decoded() {
                return Err(Failure::Mismatch(
                    "at least one run decoded incorrectly".into(),
                ));
            }
        }
        ref c @ Cmd::Costmodel { ref out, .. } => {
            let mut rows = Vec::new();
            for (name, params) in costmodel_params(c)? {
                let result = bench::cost_model(&params).map_err(invalid)?;
                rows.push(bench::CostModelRow {
                    name,
                    params,
                    result,
                });
            }
            let json = serde_json::to_string_pretty(&rows).map_err(invalid)? + "\n";
            write_out(&json, out.as_ref())?;
        }
        Cmd::Report { input, out } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            let report = bench::parse_report(&text).map_err(invalid)?;
            write_out(
                &bench::render(&report, out.format.into()).map_err(invalid)?,
                out.out.as_ref(),
            )?;
        }
        Cmd::Gen { out, bits: sizes } => {
            let sizes = if sizes.is_empty() {
                DEFAULT_SIZES.to_vec()
            } else {
                sizes
            };
            for p in workloads::write_programs(&out, &sizes).map_err(invalid)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Validation(m) => format!("error: {m}"),
                Failure::Mismatch(m) => format!("oracle mismatch: {m}"),
                Failure::Fault(m) => format!("simulation fault: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(f.code())
        }
    }
}

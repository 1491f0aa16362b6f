//! Two-pass assembler and disassembler for both profiles.
//!
//! ```text
//! ; comment
//!         .data
//!         .org 0x400
//! table:  .word 1, 2, 0x10
//!         .text
//! start:  LD   R4, table(R0)
//!         BEQZ R4, done
//!         ADDI R4, R4, -1
//! done:   HALT
//! ```
//!
//! Code is assembled from address 0, one word per instruction. Data defaults
//! to [`DEFAULT_DATA_ORIGIN`]. Labels are case-sensitive, mnemonics are not.
//! An immediate operand may be a number or a label (its address); a branch
//! operand given as a number is a raw offset from the next instruction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::{Format, IsaError, Profile, ProfileKind, Slot};
use crate::micro::{MachineState, Opcode};

pub const DEFAULT_DATA_ORIGIN: u32 = 0x400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataWord {
    pub addr: u32,
    pub word: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramImage {
    pub profile: ProfileKind,
    pub entry: u32,
    pub code: Vec<u32>,
    pub data: Vec<DataWord>,
    pub symbols: BTreeMap<String, u32>,
    /// Source line of each code word; empty for images not built from text.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub source_lines: Vec<usize>,
}

impl ProgramImage {
    /// Number of instructions in the code segment.
    pub fn static_instructions(&self) -> usize {
        self.code.len()
    }

    /// Whether any code word carries `opcode`.
    pub fn uses_opcode(&self, profile: &Profile, opcode: Opcode) -> bool {
        self.code
            .iter()
            .any(|&w| profile.store().decode_opcode(w) == opcode)
    }

    /// Machine with this image loaded.
    pub fn load(&self, profile: &Profile) -> Result<MachineState, AsmError> {
        if profile.kind() != self.profile {
            return Err(AsmError::new(
                0,
                AsmErrorKind::ProfileMismatch(self.profile, profile.kind()),
            ));
        }
        let data: Vec<(u32, u32)> = self.data.iter().map(|d| (d.addr, d.word)).collect();
        profile
            .boot(&self.code, &data, self.entry)
            .map_err(|e| AsmError::new(0, AsmErrorKind::Isa(e)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("image serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic '{0}'")]
    UnknownMnemonic(String),
    #[error("unresolved label '{0}'")]
    UnresolvedLabel(String),
    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),
    #[error("{mnemonic} takes {expected} operand(s), got {got}")]
    Arity {
        mnemonic: String,
        expected: usize,
        got: usize,
    },
    #[error("bad operand '{0}'")]
    BadOperand(String),
    #[error("bad directive: {0}")]
    Directive(String),
    #[error("data word at {0:#x} overlaps the code segment")]
    Overlap(u32),
    #[error(transparent)]
    Isa(IsaError),
    #[error("image was built for the {0} profile, not {1}")]
    ProfileMismatch(ProfileKind, ProfileKind),
    #[error("unknown opcode in word {word:#010x} at address {addr:#x}")]
    UnknownOpcode { addr: u32, word: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct AsmError {
    /// 1-based source line; 0 when not tied to a line.
    pub line: usize,
    pub kind: AsmErrorKind,
}

impl AsmError {
    fn new(line: usize, kind: AsmErrorKind) -> Self {
        Self { line, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Text,
    Data,
}

enum Item<'a> {
    Instr {
        line: usize,
        addr: u32,
        mnemonic: &'a str,
        operands: Vec<&'a str>,
    },
    Words {
        line: usize,
        addr: u32,
        values: Vec<&'a str>,
    },
}

fn is_label(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_' || ch == '.')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '.')
}

fn parse_int(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let v = match body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        Some(h) => i64::from_str_radix(h, 16).ok()?,
        None if body.bytes().all(|b| b.is_ascii_digit()) && !body.is_empty() => {
            body.parse().ok()?
        }
        None => return None,
    };
    Some(if neg { -v } else { v })
}

fn split_operands(s: &str) -> Vec<&str> {
    let s = s.trim();
    if s.is_empty() {
        return Vec::new();
    }
    if s.contains(',') {
        s.split(',').map(str::trim).collect()
    } else {
        s.split_whitespace().collect()
    }
}

/// Assembles `text` for `profile`.
pub fn assemble(text: &str, profile: &Profile) -> Result<ProgramImage, AsmError> {
    // Pass 1: labels and addresses.
    let mut symbols: BTreeMap<String, u32> = BTreeMap::new();
    let mut items = Vec::new();
    let mut section = Section::Text;
    let mut text_pc = 0u32;
    let mut data_pc = DEFAULT_DATA_ORIGIN;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |k| AsmError::new(line, k);
        let mut rest = raw.split(';').next().unwrap_or("").trim();
        while let Some((head, tail)) = rest.split_once(':') {
            let head = head.trim();
            if !is_label(head) {
                break;
            }
            let here = if section == Section::Text {
                text_pc
            } else {
                data_pc
            };
            if symbols.insert(head.to_string(), here).is_some() {
                return Err(err(AsmErrorKind::DuplicateLabel(head.to_string())));
            }
            rest = tail.trim();
        }
        if rest.is_empty() {
            continue;
        }
        let (word, args) = match rest.split_once(char::is_whitespace) {
            Some((w, a)) => (w, a.trim()),
            None => (rest, ""),
        };
        if let Some(directive) = word.strip_prefix('.') {
            match directive.to_ascii_lowercase().as_str() {
                "text" => section = Section::Text,
                "data" => section = Section::Data,
                "org" => {
                    let addr = parse_int(args)
                        .filter(|&v| (0..=i64::from(u32::MAX)).contains(&v))
                        .ok_or_else(|| {
                            err(AsmErrorKind::Directive(format!(
                                ".org needs an address, got '{args}'"
                            )))
                        })? as u32;
                    match section {
                        Section::Data => data_pc = addr,
                        Section::Text => {
                            if addr < text_pc {
                                return Err(err(AsmErrorKind::Directive(format!(
                                    ".org {addr:#x} moves the code location backwards"
                                ))));
                            }
                            text_pc = addr;
                        }
                    }
                }
                "word" => {
                    let values = split_operands(args);
                    if values.is_empty() {
                        return Err(err(AsmErrorKind::Directive(
                            ".word needs at least one value".into(),
                        )));
                    }
                    let n = values.len() as u32;
                    let pc = if section == Section::Text {
                        &mut text_pc
                    } else {
                        &mut data_pc
                    };
                    items.push(Item::Words {
                        line,
                        addr: *pc,
                        values,
                    });
                    *pc += n;
                }
                other => {
                    return Err(err(AsmErrorKind::Directive(format!(
                        "unknown directive '.{other}'"
                    ))))
                }
            }
            continue;
        }
        if section == Section::Data {
            return Err(err(AsmErrorKind::Directive(format!(
                "instruction '{word}' in the data section"
            ))));
        }
        items.push(Item::Instr {
            line,
            addr: text_pc,
            mnemonic: word,
            operands: split_operands(args),
        });
        text_pc += 1;
    }

    // Pass 2: encoding.
    let mut code = vec![0u32; text_pc as usize];
    let mut source_lines = vec![0usize; text_pc as usize];
    let mut data = Vec::new();
    let resolve = |tok: &str, line: usize| -> Result<i64, AsmError> {
        if let Some(v) = parse_int(tok) {
            return Ok(v);
        }
        if is_label(tok) {
            return symbols.get(tok).map(|&a| i64::from(a)).ok_or_else(|| {
                AsmError::new(line, AsmErrorKind::UnresolvedLabel(tok.to_string()))
            });
        }
        Err(AsmError::new(
            line,
            AsmErrorKind::BadOperand(tok.to_string()),
        ))
    };

    for item in &items {
        match item {
            Item::Words { line, addr, values } => {
                for (i, v) in values.iter().enumerate() {
                    let w = resolve(v, *line)? as u32;
                    let a = addr + i as u32;
                    if a < text_pc && !matches_text_words(&items, a) {
                        return Err(AsmError::new(*line, AsmErrorKind::Overlap(a)));
                    }
                    if a < text_pc {
                        code[a as usize] = w;
                        source_lines[a as usize] = *line;
                    } else {
                        data.push(DataWord { addr: a, word: w });
                    }
                }
            }
            Item::Instr {
                line,
                addr,
                mnemonic,
                operands,
            } => {
                let def = profile.lookup(mnemonic).ok_or_else(|| {
                    AsmError::new(*line, AsmErrorKind::UnknownMnemonic(mnemonic.to_string()))
                })?;
                let args =
                    operand_values(def.format, &def.mnemonic, operands, *addr, *line, &resolve)?;
                code[*addr as usize] = def
                    .format
                    .encode(&def.mnemonic, def.opcode, &args)
                    .map_err(|e| AsmError::new(*line, AsmErrorKind::Isa(e)))?;
                source_lines[*addr as usize] = *line;
            }
        }
    }
    data.sort_by_key(|d| d.addr);
    for pair in data.windows(2) {
        if pair[0].addr == pair[1].addr {
            return Err(AsmError::new(
                0,
                AsmErrorKind::Directive(format!("data address {:#x} written twice", pair[0].addr)),
            ));
        }
    }
    Ok(ProgramImage {
        profile: profile.kind(),
        entry: 0,
        code,
        data,
        symbols,
        source_lines,
    })
}

/// Whether `addr` below the code end is covered by a `.word` placed in the
/// text section (as opposed to a data-section word landing on code).
fn matches_text_words(items: &[Item<'_>], addr: u32) -> bool {
    !items
        .iter()
        .any(|it| matches!(it, Item::Instr { addr: a, .. } if *a == addr))
}

fn operand_values(
    format: Format,
    mnemonic: &str,
    operands: &[&str],
    addr: u32,
    line: usize,
    resolve: &dyn Fn(&str, usize) -> Result<i64, AsmError>,
) -> Result<Vec<i64>, AsmError> {
    let bad = |t: &str| AsmError::new(line, AsmErrorKind::BadOperand(t.to_string()));
    // `rd, imm(rs1)` is written with two operands but fills three slots.
    let expanded: Vec<&str> = if format == Format::Mem {
        if operands.len() != 2 {
            return Err(AsmError::new(
                line,
                AsmErrorKind::Arity {
                    mnemonic: mnemonic.to_string(),
                    expected: 2,
                    got: operands.len(),
                },
            ));
        }
        let m = operands[1];
        let (imm, reg) = m
            .strip_suffix(')')
            .and_then(|s| s.split_once('('))
            .ok_or_else(|| bad(m))?;
        let imm = imm.trim();
        vec![
            operands[0],
            if imm.is_empty() { "0" } else { imm },
            reg.trim(),
        ]
    } else {
        operands.to_vec()
    };
    let slots = format.slots();
    if expanded.len() != slots.len() {
        return Err(AsmError::new(
            line,
            AsmErrorKind::Arity {
                mnemonic: mnemonic.to_string(),
                expected: slots.len(),
                got: expanded.len(),
            },
        ));
    }
    slots
        .iter()
        .zip(expanded)
        .map(|(slot, tok)| match slot {
            Slot::Reg => tok
                .strip_prefix(['R', 'r'])
                .and_then(|n| n.parse::<i64>().ok())
                .filter(|n| (0..32).contains(n))
                .ok_or_else(|| bad(tok)),
            Slot::Imm | Slot::AbsLabel => resolve(tok, line),
            Slot::RelLabel => {
                if let Some(off) = parse_int(tok) {
                    Ok(off)
                } else {
                    Ok(resolve(tok, line)? - i64::from(addr) - 1)
                }
            }
        })
        .collect()
}

/// Canonical assembly text for `image`; reassembling it yields the same
/// code and data. Branch and jump targets inside the code segment become
/// labels, reusing the image's symbol names where they exist.
pub fn disassemble(image: &ProgramImage, profile: &Profile) -> Result<String, AsmError> {
    let code_end = image.code.len() as u32;
    let mut names: HashMap<u32, String> = HashMap::new();
    for (name, &addr) in &image.symbols {
        names.entry(addr).or_insert_with(|| name.clone());
    }
    let mut decoded = Vec::with_capacity(image.code.len());
    let mut targets: BTreeMap<u32, String> = BTreeMap::new();
    for (addr, &word) in image.code.iter().enumerate() {
        let addr = addr as u32;
        let def = profile
            .by_opcode(profile.store().decode_opcode(word))
            .ok_or(AsmError::new(0, AsmErrorKind::UnknownOpcode { addr, word }))?;
        let args = def.format.decode(word);
        if def.format.encode(&def.mnemonic, def.opcode, &args).ok() != Some(word) {
            return Err(AsmError::new(0, AsmErrorKind::UnknownOpcode { addr, word }));
        }
        for (slot, &v) in def.format.slots().iter().zip(&args) {
            let target = match slot {
                Slot::RelLabel => i64::from(addr) + 1 + v,
                Slot::AbsLabel => v,
                _ => continue,
            };
            if (0..i64::from(code_end)).contains(&target) {
                let t = target as u32;
                let name = names
                    .get(&t)
                    .cloned()
                    .unwrap_or_else(|| format!("L{t:04x}"));
                targets.insert(t, name);
            }
        }
        decoded.push((def, args));
    }

    let mut out = String::new();
    if !image.code.is_empty() {
        out.push_str("        .text\n");
    }
    for (addr, (def, args)) in decoded.iter().enumerate() {
        let addr = addr as u32;
        let label = targets
            .get(&addr)
            .map(|n| format!("{n}:"))
            .unwrap_or_default();
        let operand = |slot: &Slot, v: i64| -> String {
            match slot {
                Slot::Reg => format!("R{v}"),
                Slot::Imm => v.to_string(),
                Slot::RelLabel => {
                    let t = i64::from(addr) + 1 + v;
                    match u32::try_from(t).ok().and_then(|t| targets.get(&t)) {
                        Some(n) => n.clone(),
                        None => v.to_string(),
                    }
                }
                Slot::AbsLabel => match u32::try_from(v).ok().and_then(|t| targets.get(&t)) {
                    Some(n) => n.clone(),
                    None => v.to_string(),
                },
            }
        };
        let slots = def.format.slots();
        let ops: Vec<String> = slots
            .iter()
            .zip(args)
            .map(|(s, &v)| operand(s, v))
            .collect();
        let body = if def.format == Format::Mem {
            format!("{} {}, {}({})", def.mnemonic, ops[0], ops[1], ops[2])
        } else if ops.is_empty() {
            def.mnemonic.clone()
        } else {
            format!("{} {}", def.mnemonic, ops.join(", "))
        };
        out.push_str(&format!("{label:<15} {body}\n"));
    }
    if !image.data.is_empty() {
        out.push_str("        .data\n");
        let mut next: Option<u32> = None;
        for d in &image.data {
            if next != Some(d.addr) {
                out.push_str(&format!("        .org {:#x}\n", d.addr));
            }
            out.push_str(&format!("        .word {}\n", d.word));
            next = Some(d.addr + 1);
        }
    }
    Ok(out)
}

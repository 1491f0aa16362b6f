//! Text form of control stores.
//!
//! ```text
//! # comment
//! routine AND:
//!     reg[ir(12-8)] -> b
//!     reg[ir(17-13)] -> a
//!     acc <- a & b
//!     acc -> reg[ir(22-18)]
//!     end
//!
//! routine iadd pops=2:
//!     mar = sp = sp - 1; rd
//!     h = tos
//!     mdr = tos = mdr + h; wr; end
//! ```
//!
//! One line is one microinstruction; `;` separates the micro-operations it
//! bundles. `label:` names the next microinstruction. Register names are
//! case-insensitive.

use super::op::{AluOp, Cond, IrField, MicroInstruction, MicroOp, MicroRoutine, Operand, Target};
use super::{validate_routine, MicroError};

pub fn parse_control_store(text: &str) -> Result<Vec<MicroRoutine>, MicroError> {
    let mut routines: Vec<MicroRoutine> = Vec::new();
    let mut pending_labels: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| MicroError::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();

        if let Some(rest) = lower.strip_prefix("routine ") {
            finish_routine(&mut routines, &mut pending_labels)?;
            let rest = rest.trim();
            let rest = rest
                .strip_suffix(':')
                .ok_or_else(|| err("routine header must end with ':'".into()))?;
            let mut parts = rest.split_whitespace();
            // Keep the original case of the routine name.
            let name_lower = parts
                .next()
                .ok_or_else(|| err("missing routine name".into()))?;
            let start = line.to_ascii_lowercase().find(name_lower).unwrap();
            let name = line[start..start + name_lower.len()].to_string();
            let mut routine = MicroRoutine::new(name);
            for attr in parts {
                let value = attr
                    .strip_prefix("pops=")
                    .ok_or_else(|| err(format!("unknown routine attribute '{attr}'")))?;
                routine.stack_inputs = value
                    .parse()
                    .map_err(|_| err(format!("bad pops value '{value}'")))?;
            }
            routines.push(routine);
            continue;
        }

        let Some(routine) = routines.last_mut() else {
            return Err(err("micro-operation outside of a routine".into()));
        };

        if let Some(rest) = lower.strip_prefix("scratch:") {
            routine
                .scratch
                .extend(rest.split_whitespace().map(str::to_string));
            continue;
        }

        let mut body = lower.as_str();
        if let Some((head, tail)) = body.split_once(':') {
            let head = head.trim();
            if is_ident(head) {
                pending_labels.push((head.to_string(), line_no));
                body = tail.trim();
                if body.is_empty() {
                    continue;
                }
            }
        }

        let index = routine.instructions.len();
        for (label, label_line) in pending_labels.drain(..) {
            if routine.labels.insert(label.clone(), index).is_some() {
                return Err(MicroError::Parse {
                    line: label_line,
                    message: format!("duplicate label '{label}'"),
                });
            }
        }
        let ops = body
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_op(s).map_err(&err))
            .collect::<Result<Vec<_>, _>>()?;
        routine
            .instructions
            .push(MicroInstruction { ops, line: line_no });
    }
    finish_routine(&mut routines, &mut pending_labels)?;
    Ok(routines)
}

fn finish_routine(
    routines: &mut [MicroRoutine],
    pending: &mut Vec<(String, usize)>,
) -> Result<(), MicroError> {
    if let Some((label, line)) = pending.first() {
        return Err(MicroError::Parse {
            line: *line,
            message: format!("label '{label}' does not precede a microinstruction"),
        });
    }
    pending.clear();
    if let Some(r) = routines.last() {
        validate_routine(r)?;
    }
    Ok(())
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_op(s: &str) -> Result<MicroOp, String> {
    match s {
        "end" => return Ok(MicroOp::End),
        "halt" => return Ok(MicroOp::Halt),
        "rd" => {
            return Ok(MicroOp::MemRead {
                addr: "mar".into(),
                data: Target::Reg("mdr".into()),
            })
        }
        "wr" => {
            return Ok(MicroOp::MemWrite {
                addr: "mar".into(),
                data: Operand::Reg("mdr".into()),
            })
        }
        _ => {}
    }
    if let Some(reason) = s.strip_prefix("fault") {
        let reason = reason.trim();
        return Ok(MicroOp::Fault {
            reason: if reason.is_empty() {
                "fault".into()
            } else {
                reason.into()
            },
        });
    }
    if let Some(label) = s.strip_prefix("goto ") {
        return Ok(MicroOp::Jump {
            target: label_name(label)?,
        });
    }
    if let Some(rest) = s.strip_prefix("if ") {
        let (cond_part, label) = rest
            .split_once(" goto ")
            .ok_or_else(|| format!("expected 'goto' in '{s}'"))?;
        let cond_part = cond_part.trim();
        let open = cond_part
            .find('(')
            .ok_or_else(|| format!("expected cond(operand) in '{s}'"))?;
        let inner = cond_part[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| format!("unbalanced parentheses in '{s}'"))?;
        let cond = Cond::from_name(cond_part[..open].trim())
            .ok_or_else(|| format!("unknown condition in '{s}'"))?;
        return Ok(MicroOp::Branch {
            cond,
            value: parse_operand(inner)?,
            target: label_name(label)?,
        });
    }
    if let Some((lhs, rhs)) = s.split_once("<-") {
        let dsts = parse_targets(lhs)?;
        return expr_to_op(rhs.trim(), dsts, false);
    }
    if let Some((lhs, rhs)) = s.split_once("->") {
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if let Some(addr) = memory_ref(rhs) {
            return Ok(MicroOp::MemWrite {
                addr,
                data: parse_operand(lhs)?,
            });
        }
        let dsts = parse_targets(rhs)?;
        return expr_to_op(lhs, dsts, false);
    }
    if s.contains('=') {
        let mut parts: Vec<&str> = s.split('=').map(str::trim).collect();
        let expr = parts.pop().unwrap();
        let dsts = parts
            .into_iter()
            .map(parse_target)
            .collect::<Result<Vec<_>, _>>()?;
        if dsts.is_empty() {
            return Err(format!("missing destination in '{s}'"));
        }
        return expr_to_op(expr, dsts, true);
    }
    Err(format!("unrecognised micro-operation '{s}'"))
}

fn label_name(s: &str) -> Result<String, String> {
    let s = s.trim();
    if is_ident(s) {
        Ok(s.to_string())
    } else {
        Err(format!("bad label '{s}'"))
    }
}

/// `main[reg]` -> `reg`.
fn memory_ref(s: &str) -> Option<String> {
    let s = s.replace(' ', "");
    let inner = s.strip_prefix("main[")?.strip_suffix(']')?;
    is_ident(inner).then(|| inner.to_string())
}

/// Builds the op for `dsts <- expr`. A plain operand becomes a bus transfer,
/// or an ALU pass-through when written in `a = b` form.
fn expr_to_op(expr: &str, dsts: Vec<Target>, via_alu: bool) -> Result<MicroOp, String> {
    if let Some(addr) = memory_ref(expr) {
        if dsts.len() != 1 {
            return Err("a memory read has exactly one destination".into());
        }
        return Ok(MicroOp::MemRead {
            addr,
            data: dsts.into_iter().next().unwrap(),
        });
    }
    if let Some(args) = expr.strip_prefix("min(").and_then(|r| r.strip_suffix(')')) {
        let (a, b) = split_top_level_comma(args)
            .ok_or_else(|| format!("min needs two arguments in '{expr}'"))?;
        return Ok(MicroOp::Alu {
            op: AluOp::Min,
            a: parse_operand(a)?,
            b: parse_operand(b)?,
            dsts,
        });
    }
    if let Some((pos, len, op)) = find_binary_op(expr) {
        return Ok(MicroOp::Alu {
            op,
            a: parse_operand(&expr[..pos])?,
            b: parse_operand(&expr[pos + len..])?,
            dsts,
        });
    }
    let src = parse_operand(expr)?;
    Ok(if via_alu {
        MicroOp::Alu {
            op: AluOp::Pass,
            a: src,
            b: Operand::Imm(0),
            dsts,
        }
    } else {
        MicroOp::Transfer { src, dsts }
    })
}

fn split_top_level_comma(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn find_binary_op(expr: &str) -> Option<(usize, usize, AluOp)> {
    let bytes = expr.as_bytes();
    let mut depth = 0i32;
    let mut seen_operand = false;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ if depth > 0 => {}
            ' ' => {}
            _ => {
                if seen_operand {
                    if i + 1 < bytes.len() {
                        if let Some(op) = AluOp::from_symbol(&expr[i..i + 2]) {
                            return Some((i, 2, op));
                        }
                    }
                    if let Some(op) = AluOp::from_symbol(&expr[i..i + 1]) {
                        return Some((i, 1, op));
                    }
                }
                seen_operand = true;
            }
        }
        i += 1;
    }
    None
}

fn parse_field(s: &str) -> Option<IrField> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once('-')?;
    let (a, b): (u8, u8) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a < 32 && b < 32).then(|| IrField::new(a, b))
}

fn parse_gpr(s: &str) -> Option<u8> {
    let digits = s.strip_prefix('r')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&n: &u8| n < 32)
}

fn parse_int(s: &str) -> Option<u32> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let value = if let Some(hex) = body.strip_prefix("0x") {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        body.parse::<i64>().ok()?
    };
    let value = if neg { -value } else { value };
    (i64::from(i32::MIN)..=i64::from(u32::MAX))
        .contains(&value)
        .then_some(value as u32)
}

pub(crate) fn parse_operand(s: &str) -> Result<Operand, String> {
    let s = s.trim().replace(' ', "");
    if s.is_empty() {
        return Err("missing operand".into());
    }
    if let Some(v) = parse_int(&s) {
        return Ok(Operand::Imm(v));
    }
    if let Some(rest) = s.strip_prefix("irs") {
        let field = parse_field(rest).ok_or_else(|| format!("bad field '{s}'"))?;
        return Ok(Operand::Field {
            field,
            signed: true,
        });
    }
    if let Some(rest) = s.strip_prefix("ir(") {
        let field = parse_field(&format!("({rest}")).ok_or_else(|| format!("bad field '{s}'"))?;
        return Ok(Operand::Field {
            field,
            signed: false,
        });
    }
    if let Some(field) = gpr_at(&s) {
        return Ok(Operand::GprAt(field?));
    }
    if let Some(n) = parse_gpr(&s) {
        return Ok(Operand::Gpr(n));
    }
    if is_ident(&s) && s != "main" {
        return Ok(Operand::Reg(s));
    }
    Err(format!("bad operand '{s}'"))
}

fn gpr_at(s: &str) -> Option<Result<IrField, String>> {
    let inner = s.strip_prefix("reg[")?.strip_suffix(']')?;
    Some(
        inner
            .strip_prefix("ir")
            .and_then(parse_field)
            .ok_or_else(|| format!("bad register selector '{s}'")),
    )
}

fn parse_target(s: &str) -> Result<Target, String> {
    let s = s.trim().replace(' ', "");
    if let Some(field) = gpr_at(&s) {
        return Ok(Target::GprAt(field?));
    }
    if let Some(n) = parse_gpr(&s) {
        return Ok(Target::Gpr(n));
    }
    if is_ident(&s) && s != "main" {
        return Ok(Target::Reg(s));
    }
    Err(format!("bad destination '{s}'"))
}

fn parse_targets(s: &str) -> Result<Vec<Target>, String> {
    s.split(',').map(parse_target).collect()
}

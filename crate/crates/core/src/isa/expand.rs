//! Micro-routine generator for the trellis-expansion instruction.
//!
//! The trellis of the encoder is wired into the routine: every destination
//! state gets a straight-line add-compare-select block reading its two
//! predecessors. The routine operates on a [`TexpandLayout`] whose base comes
//! from R1 (register profile) or is popped from the operand stack.

use std::fmt::Write;

use super::{IsaError, ProfileKind, TexpandLayout};
use crate::convcode::{EncoderSpec, Trellis};
use crate::micro::{parse_control_store, MicroRoutine};

pub fn mnemonic(kind: ProfileKind) -> &'static str {
    match kind {
        ProfileKind::Register => "TEXPAND",
        ProfileKind::Stack => "texpand",
    }
}

/// Control-store text of the routine.
pub fn texpand_source(
    kind: ProfileKind,
    layout: &TexpandLayout,
    spec: &EncoderSpec,
) -> Result<String, IsaError> {
    if layout.n_states != spec.n_states() {
        return Err(IsaError::TexpandStates(layout.n_states));
    }
    let trellis = Trellis::new(spec);
    let n = layout.n_states;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    let header = match kind {
        ProfileKind::Register => format!("routine {}:", mnemonic(kind)),
        ProfileKind::Stack => format!("routine {} pops=1:", mnemonic(kind)),
    };
    line(header);
    let per_state = |p: &str| {
        (0..n)
            .map(|s| format!("{p}{s}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    line(format!(
        "    scratch: xbase xrcv xsch xt xh xc0 xc1 xd0 xd1 xd2 xd3 {} {} {} {} {}",
        per_state("xw"),
        per_state("xal"),
        per_state("xnw"),
        per_state("xnh"),
        per_state("xna")
    ));

    let src = match kind {
        ProfileKind::Register => "r1",
        ProfileKind::Stack => "tos",
    };
    line(format!(
        "    mar <- {src} + {}; Main[mar] -> xrcv; {src} -> xbase",
        layout.received()
    ));
    line(format!(
        "    mar <- xbase + {}; Main[mar] -> xsch",
        layout.schedule()
    ));

    // Branch metric d_o = popcount(rcv ^ o) for each edge output o in use;
    // for a 2-bit x, popcount(x) = x - (x >> 1).
    let mut used = [false; 4];
    for e in trellis.edges() {
        used[usize::from(e.output)] = true;
    }
    let mut have = [false; 4];
    for o in 0..4 {
        if !used[o] {
            continue;
        }
        if have[o ^ 3] {
            line(format!("    xd{o} <- 2 - xd{}", o ^ 3));
        } else if o == 0 {
            line("    xh <- xrcv >> 1".into());
            line("    xd0 <- xrcv - xh".into());
        } else {
            line(format!("    xt <- xrcv ^ {o}"));
            line("    xh <- xt >> 1".into());
            line(format!("    xd{o} <- xt - xh"));
        }
        have[o] = true;
    }

    for s in 0..n {
        line(format!(
            "    mar <- xbase + {}; Main[mar] -> xw{s}",
            layout.weight(s)
        ));
        line(format!(
            "    mar <- xbase + {}; Main[mar] -> xal{s}",
            layout.alive(s)
        ));
    }

    for d in 0..n {
        let [e0, e1] = trellis.incoming(d);
        let (p0, p1) = (e0.from, e1.from);
        let u = e0.input;
        debug_assert_eq!(u, e1.input);
        let take = |line: &mut dyn FnMut(String), c: &str, p: usize| {
            line(format!(
                "    mar <- xbase + {}; Main[mar] -> xh; 1 -> xna{d}",
                layout.history(p)
            ));
            if u == 0 {
                line(format!(
                    "    xnh{d} <- xh << 1; {c} -> xnw{d}; goto next{d}"
                ));
            } else {
                line(format!("    xnh{d} <- xh << 1; {c} -> xnw{d}"));
                line(format!("    xnh{d} <- xnh{d} | 1; goto next{d}"));
            }
        };
        line(format!(
            "    xt <- xsch & {}; if zero(xt) goto dead{d}",
            1u32 << d
        ));
        line(format!("    if zero(xal{p0}) goto only{d}"));
        line(format!("    xc0 <- xw{p0} + xd{}", e0.output));
        line(format!("    if zero(xal{p1}) goto take0_{d}"));
        line(format!("    xc1 <- xw{p1} + xd{}", e1.output));
        // Strictly smaller wins, so equal weights keep the lower predecessor.
        line(format!("    xt <- xc1 - xc0; if neg(xt) goto take1_{d}"));
        line(format!("take0_{d}:"));
        take(&mut line, "xc0", p0);
        line(format!("only{d}:"));
        line(format!("    if zero(xal{p1}) goto dead{d}"));
        line(format!("    xc1 <- xw{p1} + xd{}", e1.output));
        line(format!("take1_{d}:"));
        take(&mut line, "xc1", p1);
        line(format!("dead{d}:"));
        line(format!("    0 -> xna{d}, xnh{d}"));
        line(format!("    0x7fffffff -> xnw{d}"));
        line(format!("next{d}:"));
    }

    let mut any = String::from("    xt <- xna0 | xna1");
    for s in 2..n {
        line(any);
        any = format!("    xt <- xt | xna{s}");
    }
    line(format!("{any}; if zero(xt) goto fail"));

    for s in 0..n {
        line(format!(
            "    mar <- xbase + {}; xnw{s} -> Main[mar]",
            layout.weight(s)
        ));
        line(format!(
            "    mar <- xbase + {}; xna{s} -> Main[mar]",
            layout.alive(s)
        ));
        line(format!(
            "    mar <- xbase + {}; xnh{s} -> Main[mar]",
            layout.history(s)
        ));
    }
    line(format!(
        "    mar <- xbase + {}; Main[mar] -> xt",
        layout.length()
    ));
    match kind {
        ProfileKind::Register => line("    xt <- xt + 1; xt -> Main[mar]; end".into()),
        ProfileKind::Stack => {
            line("    xt <- xt + 1; xt -> Main[mar]".into());
            line("    mar = sp = sp - 1; Main[mar] -> tos; end".into());
        }
    }
    line("fail:".into());
    line("    fault texpand_no_survivor".into());

    let mut header_comment = String::new();
    let _ = writeln!(
        header_comment,
        "# trellis expansion, K={}, taps {:#b}/{:#b}",
        spec.constraint_length(),
        spec.taps().0,
        spec.taps().1
    );
    Ok(header_comment + &out)
}

pub fn texpand_routine(
    kind: ProfileKind,
    layout: &TexpandLayout,
    spec: &EncoderSpec,
) -> Result<MicroRoutine, IsaError> {
    let text = texpand_source(kind, layout, spec)?;
    let mut routines = parse_control_store(&text)?;
    Ok(routines.remove(0))
}

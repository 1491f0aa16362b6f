//! Rate-1/2 convolutional coding: encoder, trellis and a reference
//! hard-decision Viterbi decoder.
//!
//! Every simulated decoder run in this crate is checked against
//! [`viterbi_decode`].

mod trellis;
mod viterbi;

pub use trellis::{Edge, Trellis};
pub use viterbi::{
    acs_step, stage_schedule, viterbi_decode, viterbi_decode_traced, AcsTrace, Decoded, PathEntry,
    PathState, StateMask,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitVec;

/// Largest supported constraint length. Keeps state numbers inside a `u32` mask.
pub const MAX_CONSTRAINT_LENGTH: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("constraint length {0} is outside 2..={MAX_CONSTRAINT_LENGTH}")]
    ConstraintLength(u32),
    #[error("both generator tap masks are zero")]
    ZeroTaps,
    #[error("tap mask {mask:#b} uses positions beyond constraint length {k}")]
    TapsTooWide { mask: u32, k: u32 },
    #[error("received word has odd length {0}")]
    OddLength(usize),
    #[error("received word of {len} bits is shorter than the {min} bits termination requires")]
    TooShort { len: usize, min: usize },
    #[error("no admissible destination state has a live predecessor")]
    NoSurvivors,
    #[error("path state covers {got} states but the trellis has {expected}")]
    StateCount { expected: usize, got: usize },
}

/// Generator description of a rate-1/2 feed-forward encoder.
///
/// Tap masks cover the positions `(u, m1, ..., m_{K-1})` with `u` in the most
/// significant bit, so the standard `(7, 5)` octal code is `taps_v1 = 0b111`,
/// `taps_v2 = 0b101`. The encoder state is `m1 m2 ... m_{K-1}` read as a
/// binary number, `m1` most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncoderSpec {
    constraint_length: u32,
    taps_v1: u32,
    taps_v2: u32,
}

/// Taps reproducing the worked example `110100 -> 10 01 11 10 11 00`:
/// `V1 = u xor m1`, `V2 = m1`. Found by exhaustive search over all K = 3 tap
/// pairs; the search is re-run in the test suite.
pub const EXAMPLE_SPEC: EncoderSpec = EncoderSpec {
    constraint_length: 3,
    taps_v1: 0b110,
    taps_v2: 0b010,
};

/// The standard K = 3, `(7, 5)` octal code.
pub const STANDARD_75_SPEC: EncoderSpec = EncoderSpec {
    constraint_length: 3,
    taps_v1: 0b111,
    taps_v2: 0b101,
};

impl EncoderSpec {
    pub fn new(constraint_length: u32, taps_v1: u32, taps_v2: u32) -> Result<Self, CodeError> {
        if !(2..=MAX_CONSTRAINT_LENGTH).contains(&constraint_length) {
            return Err(CodeError::ConstraintLength(constraint_length));
        }
        if taps_v1 == 0 && taps_v2 == 0 {
            return Err(CodeError::ZeroTaps);
        }
        for mask in [taps_v1, taps_v2] {
            if mask >> constraint_length != 0 {
                return Err(CodeError::TapsTooWide {
                    mask,
                    k: constraint_length,
                });
            }
        }
        Ok(Self {
            constraint_length,
            taps_v1,
            taps_v2,
        })
    }

    pub fn constraint_length(&self) -> u32 {
        self.constraint_length
    }

    pub fn taps(&self) -> (u32, u32) {
        (self.taps_v1, self.taps_v2)
    }

    pub fn memory_len(&self) -> u32 {
        self.constraint_length - 1
    }

    pub fn n_states(&self) -> usize {
        1 << self.memory_len()
    }

    /// State reached from `state` on input `bit`.
    pub fn next_state(&self, state: usize, bit: u8) -> usize {
        ((usize::from(bit) << self.memory_len()) | state) >> 1
    }

    /// Output pair `V1 << 1 | V2` emitted on the edge `(state, bit)`.
    pub fn output(&self, state: usize, bit: u8) -> u8 {
        let register = (u32::from(bit) << self.memory_len()) | state as u32;
        let v1 = (register & self.taps_v1).count_ones() & 1;
        let v2 = (register & self.taps_v2).count_ones() & 1;
        ((v1 << 1) | v2) as u8
    }

    /// Whether distinct inputs from the same state always produce distinct
    /// output pairs.
    pub fn is_stage_injective(&self) -> bool {
        (0..self.n_states()).all(|s| self.output(s, 0) != self.output(s, 1))
    }
}

/// Encodes `data` starting from the all-zero state. Flush bits are the
/// caller's responsibility.
pub fn encode(spec: &EncoderSpec, data: &BitVec) -> BitVec {
    let mut state = 0usize;
    let mut out = BitVec::new();
    for bit in data.iter() {
        let pair = spec.output(state, bit);
        out.push(pair >> 1);
        out.push(pair & 1);
        state = spec.next_state(state, bit);
    }
    out
}

/// Hamming distance between two 2-bit pairs.
pub fn branch_metric(received_pair: u8, edge_output: u8) -> u32 {
    ((received_pair ^ edge_output) & 0b11).count_ones()
}

/// Appends the `K - 1` zero flush bits.
pub fn with_flush(spec: &EncoderSpec, data: &BitVec) -> BitVec {
    let mut out = data.clone();
    for _ in 0..spec.memory_len() {
        out.push(0);
    }
    out
}

/// All K-bit tap pairs that map `data` onto `codeword`.
pub fn search_taps(constraint_length: u32, data: &BitVec, codeword: &BitVec) -> Vec<EncoderSpec> {
    let limit = 1u32 << constraint_length;
    let mut found = Vec::new();
    for t1 in 0..limit {
        for t2 in 0..limit {
            if let Ok(spec) = EncoderSpec::new(constraint_length, t1, t2) {
                if &encode(&spec, data) == codeword {
                    found.push(spec);
                }
            }
        }
    }
    found
}

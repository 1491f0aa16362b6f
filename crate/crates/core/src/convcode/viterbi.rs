use serde::{Deserialize, Serialize};

use super::{branch_metric, CodeError, EncoderSpec, Trellis};
use crate::bits::BitVec;

/// Set of trellis states, bit `s` standing for state `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateMask(pub u32);

impl StateMask {
    pub fn all(n_states: usize) -> Self {
        if n_states >= 32 {
            Self(u32::MAX)
        } else {
            Self((1u32 << n_states) - 1)
        }
    }

    pub fn only(state: usize) -> Self {
        Self(1 << state)
    }

    pub fn contains(&self, state: usize) -> bool {
        state < 32 && (self.0 >> state) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

/// Survivor of one state: accumulated Hamming weight and decoded inputs so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEntry {
    pub weight: u32,
    pub history: BitVec,
}

/// Survivors for every trellis state after some number of stages; `None`
/// marks a dead state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathState {
    pub stages: usize,
    pub entries: Vec<Option<PathEntry>>,
}

impl PathState {
    /// Only state 0 alive, weight 0, no history.
    pub fn initial(n_states: usize) -> Self {
        let mut entries = vec![None; n_states];
        entries[0] = Some(PathEntry {
            weight: 0,
            history: BitVec::new(),
        });
        Self { stages: 0, entries }
    }

    pub fn n_states(&self) -> usize {
        self.entries.len()
    }

    pub fn alive_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn alive_mask(&self) -> StateMask {
        StateMask(
            self.entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.is_some())
                .fold(0, |m, (s, _)| m | (1 << s)),
        )
    }
}

/// Destination states admissible after stage `stage` (0-based) of an
/// `n_stages`-stage terminated trellis: paths leave state 0 during the first
/// `K - 1` stages and are driven back to it during the last `K - 1`.
pub fn stage_schedule(spec: &EncoderSpec, n_stages: usize, stage: usize) -> StateMask {
    let m = spec.memory_len() as usize;
    let mut mask = 0u32;
    let inputs_seen = stage + 1;
    let flushed = (stage + 1 + m).saturating_sub(n_stages).min(m);
    for s in 0..spec.n_states() {
        // Bits not yet shifted in still hold the initial zeros (low end).
        let startup_ok = inputs_seen >= m || s & ((1 << (m - inputs_seen)) - 1) == 0;
        // The newest `flushed` inputs (high end) are flush zeros.
        let flush_ok = s >> (m - flushed) == 0;
        if startup_ok && flush_ok {
            mask |= 1 << s;
        }
    }
    StateMask(mask)
}

/// One add-compare-select stage over every admissible destination.
///
/// Candidates are visited in increasing source-state order and only a
/// strictly smaller weight replaces the current best, so ties go to the
/// lowest-numbered predecessor.
pub fn acs_step(
    trellis: &Trellis,
    paths: &PathState,
    received_pair: u8,
    admissible: StateMask,
) -> Result<PathState, CodeError> {
    let n = trellis.n_states();
    if paths.n_states() != n {
        return Err(CodeError::StateCount {
            expected: n,
            got: paths.n_states(),
        });
    }
    let mut entries = vec![None; n];
    for (to, slot) in entries.iter_mut().enumerate() {
        if !admissible.contains(to) {
            continue;
        }
        let mut best: Option<(u32, usize, u8)> = None;
        for edge in trellis.incoming(to) {
            let Some(prev) = &paths.entries[edge.from] else {
                continue;
            };
            let weight = prev.weight + branch_metric(received_pair, edge.output);
            if best.is_none_or(|(w, _, _)| weight < w) {
                best = Some((weight, edge.from, edge.input));
            }
        }
        if let Some((weight, from, input)) = best {
            let mut history = paths.entries[from].as_ref().unwrap().history.clone();
            history.push(input);
            *slot = Some(PathEntry { weight, history });
        }
    }
    if entries.iter().all(Option::is_none) {
        return Err(CodeError::NoSurvivors);
    }
    Ok(PathState {
        stages: paths.stages + 1,
        entries,
    })
}

/// Counts gathered while decoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcsTrace {
    /// One per trellis stage.
    pub acs_calls: usize,
    /// Live destination nodes computed across all stages.
    pub node_expansions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Decoded inputs including the flush bits.
    pub bits: BitVec,
    /// Hamming distance between the received word and the re-encoded path.
    pub weight: u32,
    pub trace: AcsTrace,
}

/// Hard-decision Viterbi decoding of a terminated code word.
pub fn viterbi_decode(spec: &EncoderSpec, received: &BitVec) -> Result<BitVec, CodeError> {
    viterbi_decode_traced(spec, received).map(|d| d.bits)
}

pub fn viterbi_decode_traced(spec: &EncoderSpec, received: &BitVec) -> Result<Decoded, CodeError> {
    if received.len() % 2 != 0 {
        return Err(CodeError::OddLength(received.len()));
    }
    let min = 2 * spec.memory_len() as usize;
    if received.len() < min.max(2) {
        return Err(CodeError::TooShort {
            len: received.len(),
            min: min.max(2),
        });
    }
    let trellis = Trellis::new(spec);
    let n_stages = received.len() / 2;
    let mut paths = PathState::initial(trellis.n_states());
    let mut trace = AcsTrace::default();
    for (stage, pair) in received.pairs().enumerate() {
        paths = acs_step(
            &trellis,
            &paths,
            pair,
            stage_schedule(spec, n_stages, stage),
        )?;
        trace.acs_calls += 1;
        trace.node_expansions += paths.alive_count();
    }
    // The schedule leaves state 0 as the only survivor.
    let end = paths.entries[0].take().ok_or(CodeError::NoSurvivors)?;
    Ok(Decoded {
        bits: end.history,
        weight: end.weight,
        trace,
    })
}

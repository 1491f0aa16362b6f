//! Memory image of one trellis stage as read and written by `TEXPAND`.
//!
//! For `S` states starting at `base`:
//!
//! | offset        | contents                                        |
//! |---------------|-------------------------------------------------|
//! | `0..S`        | path weights, [`DEAD_WEIGHT`] for dead states    |
//! | `S..2S`       | alive flags (0 or 1)                            |
//! | `2S..3S`      | survivor histories, newest input in bit 0       |
//! | `3S`          | received pair, first bit in bit 1               |
//! | `3S + 1`      | admissible-destination mask                     |
//! | `3S + 2`      | stage count (history length)                    |

use serde::{Deserialize, Serialize};

use super::IsaError;
use crate::bits::BitVec;
use crate::convcode::{EncoderSpec, PathEntry, PathState, StateMask};

/// Weight word stored for a dead state.
pub const DEAD_WEIGHT: u32 = 0x7FFF_FFFF;
/// Longest history a packed survivor word holds.
pub const MAX_STAGES: usize = 32;
/// Most states a schedule mask word can describe.
pub const MAX_STATES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TexpandLayout {
    pub n_states: usize,
}

impl TexpandLayout {
    pub fn new(spec: &EncoderSpec) -> Result<Self, IsaError> {
        Self::for_states(spec.n_states())
    }

    pub fn for_states(n_states: usize) -> Result<Self, IsaError> {
        if !(2..=MAX_STATES).contains(&n_states) {
            return Err(IsaError::TexpandStates(n_states));
        }
        Ok(Self { n_states })
    }

    pub fn weight(&self, s: usize) -> u32 {
        s as u32
    }

    pub fn alive(&self, s: usize) -> u32 {
        (self.n_states + s) as u32
    }

    pub fn history(&self, s: usize) -> u32 {
        (2 * self.n_states + s) as u32
    }

    pub fn received(&self) -> u32 {
        3 * self.n_states as u32
    }

    pub fn schedule(&self) -> u32 {
        self.received() + 1
    }

    pub fn length(&self) -> u32 {
        self.received() + 2
    }

    /// Words occupied from the base address.
    pub fn size(&self) -> u32 {
        self.received() + 3
    }

    /// Writes `paths` plus the stage inputs at `base`.
    pub fn store(
        &self,
        mem: &mut [u32],
        base: u32,
        paths: &PathState,
        received_pair: u8,
        admissible: StateMask,
    ) {
        self.store_paths(mem, base, paths);
        mem[(base + self.received()) as usize] = u32::from(received_pair);
        mem[(base + self.schedule()) as usize] = admissible.0;
    }

    /// Writes weights, flags, histories and the stage count.
    pub fn store_paths(&self, mem: &mut [u32], base: u32, paths: &PathState) {
        assert_eq!(paths.n_states(), self.n_states, "state count mismatch");
        assert!(paths.stages <= MAX_STAGES, "history longer than one word");
        let at = |off: u32| (base + off) as usize;
        for (s, e) in paths.entries.iter().enumerate() {
            let (w, a, h) = match e {
                Some(e) => (e.weight, 1, e.history.to_word_msb_first() as u32),
                None => (DEAD_WEIGHT, 0, 0),
            };
            mem[at(self.weight(s))] = w;
            mem[at(self.alive(s))] = a;
            mem[at(self.history(s))] = h;
        }
        mem[at(self.length())] = paths.stages as u32;
    }

    /// Reads the path state back. Alive entries get a history of the stored
    /// stage count.
    pub fn load(&self, mem: &[u32], base: u32) -> PathState {
        let at = |off: u32| mem[(base + off) as usize];
        let stages = (at(self.length()) as usize).min(MAX_STAGES);
        let entries = (0..self.n_states)
            .map(|s| {
                (at(self.alive(s)) != 0).then(|| PathEntry {
                    weight: at(self.weight(s)),
                    history: BitVec::from_word_msb_first(u64::from(at(self.history(s))), stages),
                })
            })
            .collect();
        PathState { stages, entries }
    }
}

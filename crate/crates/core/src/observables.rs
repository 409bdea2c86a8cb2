//! Observables over configurations: the agreement energy and the
//! rank-frequency census of conveyed words.
//!
//! The energy of a configuration is
//!
//! ```text
//! E = -(1/n) * sum_u (1/|V_u|) * sum_{v in V_u} agree(x_u, x_v)
//! ```
//!
//! where `agree` is 1 when the conveyed words match and 0 otherwise. It lives
//! in `[-1, 0]`: `-1` at global agreement, `0` when no neighbor pair agrees.
//!
//! [`energy_full`] evaluates the double sum from scratch; [`energy_incremental`]
//! reads the configuration's integer agreement counters, dividing only at read
//! time, so the two routes agree to float round-off over arbitrarily long runs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::automaton::{Configuration, Word};

/// Incremental and full evaluation must never drift apart by more than this.
pub const ENERGY_CHECK_TOLERANCE: f64 = 1e-9;

/// Census of conveyed words: how many agents currently show each word, plus
/// the rank-frequency view (descending count, ties broken by ascending word).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCensus {
    pub counts: BTreeMap<Word, u32>,
    pub ranked: Vec<RankEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankEntry {
    /// 1-based rank.
    pub rank: u32,
    pub word: Word,
    pub count: u32,
}

impl WordCensus {
    /// Total number of agents counted; always the vertex count.
    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }
}

/// Exact evaluation of the energy by the from-scratch double sum.
pub fn energy_full(config: &Configuration) -> f64 {
    let topology = config.topology();
    let n = topology.vertex_count();
    let states = config.states();
    let mut sum = 0.0;
    for u in 0..n as u32 {
        let xu = states[u as usize].conveyed();
        let neighborhood = topology.neighborhood(u);
        let mut agree = 0u32;
        for &v in neighborhood {
            if states[v as usize].conveyed() == xu {
                agree += 1;
            }
        }
        sum += agree as f64 / neighborhood.len() as f64;
    }
    // 0.0 - x rather than -x keeps the zero-agreement case at +0.0.
    0.0 - sum / n as f64
}

/// Energy from the configuration's running agreement counters. O(#degree
/// classes), exact up to the final divisions.
pub fn energy_incremental(config: &Configuration) -> f64 {
    let topology = config.topology();
    let n = topology.vertex_count();
    let mut sum = 0.0;
    for (agree, &size) in config
        .class_agree()
        .iter()
        .zip(topology.class_sizes().iter())
    {
        sum += *agree as f64 / size as f64;
    }
    0.0 - sum / n as f64
}

/// Both energy routes: (incremental, full). A disagreement beyond
/// [`ENERGY_CHECK_TOLERANCE`] indicates a bookkeeping bug.
pub fn energy_pair(config: &Configuration) -> (f64, f64) {
    (energy_incremental(config), energy_full(config))
}

/// True iff the running bookkeeping matches the from-scratch evaluation.
pub fn energy_incremental_check(config: &Configuration) -> bool {
    let (incremental, full) = energy_pair(config);
    abs(incremental - full) <= ENERGY_CHECK_TOLERANCE
}

fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Census over conveyed words (memories are not counted).
pub fn word_census(config: &Configuration) -> WordCensus {
    let mut counts: BTreeMap<Word, u32> = BTreeMap::new();
    for state in config.states() {
        *counts.entry(state.conveyed()).or_insert(0) += 1;
    }
    let mut ranked: Vec<RankEntry> = counts
        .iter()
        .map(|(&word, &count)| RankEntry {
            rank: 0,
            word,
            count,
        })
        .collect();
    // BTreeMap iteration is word-ascending, so a stable sort by descending
    // count leaves ties in ascending word order.
    ranked.sort_by_key(|e| core::cmp::Reverse(e.count));
    for (i, entry) in ranked.iter_mut().enumerate() {
        entry.rank = i as u32 + 1;
    }
    WordCensus { counts, ranked }
}

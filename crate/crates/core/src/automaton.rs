//! Agent states and the local forget/add/collapse rule under fully
//! asynchronous updating.
//!
//! Each agent holds a word memory plus one conveyed word it shows to its
//! neighbors. When a vertex is selected it acts as hearer: it gathers the
//! words conveyed in its radius-r neighborhood, and either
//!
//! * some heard words are unknown — it forgets a p-fraction of its
//!   non-conveyed memory, then adds all unknown heard words (`ForgetAdd`), or
//! * every heard word is known — it collapses memory and conveyed word to the
//!   minimum heard word (`Collapse`).
//!
//! A [`Configuration`] also maintains exact integer agreement counters so the
//! energy observable and the consensus check are O(1) per step.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::mem;

use crate::rng::Xoshiro256PlusPlus;
use crate::topology::Topology;

/// A word. The integer order is the total order used by the collapse action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub u32);

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One agent: a non-empty word memory and the conveyed word, which is always
/// a member of the memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    memory: Vec<Word>,
    conveyed: Word,
}

impl AgentState {
    /// Builds a state from an arbitrary memory list (sorted and deduplicated
    /// here). Returns `None` if the memory is empty or missing `conveyed`.
    pub fn new(mut memory: Vec<Word>, conveyed: Word) -> Option<AgentState> {
        memory.sort_unstable();
        memory.dedup();
        if memory.is_empty() || memory.binary_search(&conveyed).is_err() {
            return None;
        }
        Some(AgentState { memory, conveyed })
    }

    /// Memory contents, sorted ascending.
    pub fn memory(&self) -> &[Word] {
        &self.memory
    }

    pub fn conveyed(&self) -> Word {
        self.conveyed
    }

    pub fn knows(&self, w: Word) -> bool {
        self.memory.binary_search(&w).is_ok()
    }
}

/// How the initial configuration assigns words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Vertex u starts with word u: n agents, n distinct words.
    Unique,
    /// Each vertex draws one word uniformly from 0..n-1.
    UniformRandom,
}

/// Rounding applied to `p * (|M| - 1)` when sizing the forgetfulness set.
/// `Floor` is the default; `Round` is half-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    Round,
    Ceil,
}

/// Which branch of the local rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionTag {
    ForgetAdd,
    Collapse,
}

/// What a hearer receives from its neighborhood: the set of conveyed words,
/// split into those it already knows and those it does not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HearingContext {
    /// Distinct conveyed words of the neighborhood, sorted.
    pub conveyed_words: Vec<Word>,
    /// Heard words present in the hearer's memory, sorted.
    pub known: Vec<Word>,
    /// Heard words absent from the hearer's memory, sorted.
    pub unknown: Vec<Word>,
}

/// Number of words removed by the forgetfulness action for a memory of the
/// given size: `p * (memory_size - 1)` under the chosen rounding, never more
/// than `memory_size - 1`, and never touching the conveyed word.
pub fn forgetfulness_count(memory_size: usize, p: f64, rounding: Rounding) -> usize {
    debug_assert!(memory_size >= 1);
    debug_assert!((0.0..=1.0).contains(&p));
    let q = p * (memory_size - 1) as f64;
    let k = match rounding {
        Rounding::Floor => q as u64,
        Rounding::Round => (q + 0.5) as u64,
        Rounding::Ceil => {
            let t = q as u64;
            if q > t as f64 {
                t + 1
            } else {
                t
            }
        }
    };
    (k as usize).min(memory_size - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateError {
    WrongLength { expected: usize, got: usize },
    EmptyMemory { vertex: u32 },
    ConveyedNotInMemory { vertex: u32 },
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::WrongLength { expected, got } => {
                write!(f, "expected {expected} agent states, got {got}")
            }
            StateError::EmptyMemory { vertex } => {
                write!(f, "vertex {vertex} has an empty memory")
            }
            StateError::ConveyedNotInMemory { vertex } => {
                write!(f, "vertex {vertex} conveys a word missing from its memory")
            }
        }
    }
}

impl core::error::Error for StateError {}

#[derive(Debug, Clone, Default)]
struct Scratch {
    heard: Vec<Word>,
    unknown: Vec<Word>,
    pool: Vec<Word>,
    next: Vec<Word>,
}

/// The full system state: one agent per vertex, the generator, the step
/// counter, and incremental agreement bookkeeping.
///
/// A configuration is mutated strictly sequentially; share the immutable
/// [`Topology`] across configurations instead.
#[derive(Debug, Clone)]
pub struct Configuration {
    topology: Arc<Topology>,
    states: Vec<AgentState>,
    rng: Xoshiro256PlusPlus,
    step_count: u64,
    // Ordered (hearer, speaker) pairs currently agreeing, total and grouped
    // by neighborhood-size class. Integers, so the consensus check is exact.
    agreeing_pairs: u64,
    class_agree: Vec<u64>,
    scratch: Scratch,
}

impl Configuration {
    /// Initial configuration per the chosen mode, with agreement bookkeeping
    /// seeded by a full recount.
    pub fn init(topology: Arc<Topology>, mode: InitMode, seed: u64) -> Configuration {
        let n = topology.vertex_count();
        let mut rng = Xoshiro256PlusPlus::from_seed(seed);
        let states = match mode {
            InitMode::Unique => (0..n)
                .map(|u| AgentState {
                    memory: vec![Word(u as u32)],
                    conveyed: Word(u as u32),
                })
                .collect(),
            InitMode::UniformRandom => (0..n)
                .map(|_| {
                    let w = Word(rng.below(n as u64) as u32);
                    AgentState {
                        memory: vec![w],
                        conveyed: w,
                    }
                })
                .collect(),
        };
        Self::assemble(topology, states, rng, 0)
    }

    /// All agents share a single word. Useful as a diagnostic injection and
    /// as the canonical fixed point in tests.
    pub fn consensus(topology: Arc<Topology>, word: Word, seed: u64) -> Configuration {
        let n = topology.vertex_count();
        let states = (0..n)
            .map(|_| AgentState {
                memory: vec![word],
                conveyed: word,
            })
            .collect();
        let rng = Xoshiro256PlusPlus::from_seed(seed);
        Self::assemble(topology, states, rng, 0)
    }

    /// Rebuilds a configuration from explicit parts (snapshot restore,
    /// targeted test setups). Validates every agent state.
    pub fn from_parts(
        topology: Arc<Topology>,
        states: Vec<AgentState>,
        rng_state: [u64; 4],
        step_count: u64,
    ) -> Result<Configuration, StateError> {
        if states.len() != topology.vertex_count() {
            return Err(StateError::WrongLength {
                expected: topology.vertex_count(),
                got: states.len(),
            });
        }
        for (u, st) in states.iter().enumerate() {
            if st.memory.is_empty() {
                return Err(StateError::EmptyMemory { vertex: u as u32 });
            }
            if st.memory.binary_search(&st.conveyed).is_err() {
                return Err(StateError::ConveyedNotInMemory { vertex: u as u32 });
            }
        }
        let rng = Xoshiro256PlusPlus::from_state(rng_state);
        Ok(Self::assemble(topology, states, rng, step_count))
    }

    fn assemble(
        topology: Arc<Topology>,
        states: Vec<AgentState>,
        rng: Xoshiro256PlusPlus,
        step_count: u64,
    ) -> Configuration {
        let classes = topology.class_sizes().len();
        let mut config = Configuration {
            topology,
            states,
            rng,
            step_count,
            agreeing_pairs: 0,
            class_agree: vec![0; classes],
            scratch: Scratch::default(),
        };
        config.recount_agreement();
        config
    }

    /// Full recount of the agreement counters from the current states.
    fn recount_agreement(&mut self) {
        self.class_agree.fill(0);
        let mut total = 0u64;
        for u in 0..self.states.len() as u32 {
            let xu = self.states[u as usize].conveyed;
            let mut agree = 0u64;
            for &v in self.topology.neighborhood(u) {
                if self.states[v as usize].conveyed == xu {
                    agree += 1;
                }
            }
            self.class_agree[self.topology.class_of(u)] += agree;
            total += agree;
        }
        self.agreeing_pairs = total;
    }

    /// Adjusts the agreement counters after vertex `u` switched its conveyed
    /// word. Both pair directions are covered via neighborhood symmetry.
    fn conveyed_changed(&mut self, u: u32, old: Word, new: Word) {
        let topology = &self.topology;
        let mut delta_u = 0i64;
        for &v in topology.neighborhood(u) {
            let xv = self.states[v as usize].conveyed;
            let d = (xv == new) as i64 - (xv == old) as i64;
            if d != 0 {
                delta_u += d;
                let cv = topology.class_of(v);
                self.class_agree[cv] = (self.class_agree[cv] as i64 + d) as u64;
            }
        }
        let cu = topology.class_of(u);
        self.class_agree[cu] = (self.class_agree[cu] as i64 + delta_u) as u64;
        self.agreeing_pairs = (self.agreeing_pairs as i64 + 2 * delta_u) as u64;
    }

    /// The hearer's view at vertex `u`: distinct heard words, partitioned
    /// into known and unknown.
    pub fn gather_context(&self, u: u32) -> HearingContext {
        let mut conveyed_words: Vec<Word> = self
            .topology
            .neighborhood(u)
            .iter()
            .map(|&v| self.states[v as usize].conveyed)
            .collect();
        conveyed_words.sort_unstable();
        conveyed_words.dedup();
        let hearer = &self.states[u as usize];
        let mut known = Vec::new();
        let mut unknown = Vec::new();
        for &w in &conveyed_words {
            if hearer.knows(w) {
                known.push(w);
            } else {
                unknown.push(w);
            }
        }
        HearingContext {
            conveyed_words,
            known,
            unknown,
        }
    }

    /// Applies the local rule at vertex `u` and reports which branch fired.
    ///
    /// The heard word set is gathered once, before forgetting, and is not
    /// recomputed between the forgetfulness and addition steps.
    pub fn apply_local_rule(&mut self, u: u32, p: f64, rounding: Rounding) -> ActionTag {
        let mut heard = mem::take(&mut self.scratch.heard);
        let mut unknown = mem::take(&mut self.scratch.unknown);
        heard.clear();
        unknown.clear();

        heard.extend(
            self.topology
                .neighborhood(u)
                .iter()
                .map(|&v| self.states[v as usize].conveyed),
        );
        heard.sort_unstable();
        heard.dedup();
        // Neighborhoods are never empty, so a hearer always hears something.
        assert!(!heard.is_empty(), "vertex {u} heard no words");

        {
            let hearer = &self.states[u as usize];
            for &w in &heard {
                if !hearer.knows(w) {
                    unknown.push(w);
                }
            }
        }

        let tag = if unknown.is_empty() {
            // Collapse: memory and conveyed word become the minimum heard word.
            let target = heard[0];
            let state = &mut self.states[u as usize];
            let old = state.conveyed;
            state.memory.clear();
            state.memory.push(target);
            state.conveyed = target;
            if old != target {
                self.conveyed_changed(u, old, target);
            }
            ActionTag::Collapse
        } else {
            // Forgetfulness: drop a random p-fraction of the non-conveyed
            // memory, then add every unknown heard word.
            let mut pool = mem::take(&mut self.scratch.pool);
            let mut next = mem::take(&mut self.scratch.next);
            pool.clear();
            next.clear();

            let state = &self.states[u as usize];
            let conveyed = state.conveyed;
            let count = forgetfulness_count(state.memory.len(), p, rounding);
            pool.extend(state.memory.iter().copied().filter(|&w| w != conveyed));
            // Partial Fisher-Yates over the sorted pool: uniform without
            // replacement, deterministic under the seed.
            for i in 0..count {
                let j = i + self.rng.below((pool.len() - i) as u64) as usize;
                pool.swap(i, j);
            }
            let removed = &mut pool[..count];
            removed.sort_unstable();

            // next = (memory \ removed) merged with unknown; all inputs sorted,
            // unknown is disjoint from memory.
            let mut ri = 0;
            let mut ui = 0;
            for &w in &self.states[u as usize].memory {
                if ri < removed.len() && removed[ri] == w {
                    ri += 1;
                    continue;
                }
                while ui < unknown.len() && unknown[ui] < w {
                    next.push(unknown[ui]);
                    ui += 1;
                }
                next.push(w);
            }
            next.extend_from_slice(&unknown[ui..]);

            mem::swap(&mut self.states[u as usize].memory, &mut next);

            self.scratch.pool = pool;
            self.scratch.next = next;
            ActionTag::ForgetAdd
        };

        self.scratch.heard = heard;
        self.scratch.unknown = unknown;
        tag
    }

    /// One time step of the fully asynchronous scheme: a uniformly random
    /// vertex is selected and updated.
    pub fn step(&mut self, p: f64, rounding: Rounding) -> (u32, ActionTag) {
        let u = self.rng.below(self.states.len() as u64) as u32;
        let tag = self.apply_local_rule(u, p, rounding);
        self.step_count += 1;
        // Debug builds re-derive the energy from scratch once per sweep-worth
        // of steps to catch any bookkeeping drift immediately.
        #[cfg(debug_assertions)]
        if self.step_count.is_multiple_of(self.states.len() as u64) {
            debug_assert!(
                crate::observables::energy_incremental_check(self),
                "agreement bookkeeping drifted from the full recount at step {}",
                self.step_count
            );
        }
        (u, tag)
    }

    /// True iff no vertex update can change the configuration: every vertex
    /// hears only known words and already collapsed onto the minimum heard
    /// word. On a connected topology this is exactly global consensus.
    pub fn is_fixed_point(&self) -> bool {
        for u in 0..self.states.len() as u32 {
            let hearer = &self.states[u as usize];
            let mut min_heard = Word(u32::MAX);
            for &v in self.topology.neighborhood(u) {
                let w = self.states[v as usize].conveyed;
                if !hearer.knows(w) {
                    return false;
                }
                min_heard = min_heard.min(w);
            }
            if hearer.conveyed != min_heard || hearer.memory.as_slice() != [min_heard] {
                return false;
            }
        }
        true
    }

    /// O(1) exact consensus test: every ordered neighbor pair agrees.
    pub fn is_consensus(&self) -> bool {
        self.agreeing_pairs == self.topology.total_ordered_pairs()
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    pub fn state(&self, u: u32) -> &AgentState {
        &self.states[u as usize]
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn rng_state(&self) -> [u64; 4] {
        self.rng.state()
    }

    pub(crate) fn class_agree(&self) -> &[u64] {
        &self.class_agree
    }
}

//! Word-consensus automata on graphs.
//!
//! Agents sit on the vertices of a graph, each holding a finite word memory
//! and conveying one word to everyone within graph distance r. A uniformly
//! random vertex updates per time step: unknown heard words are added to
//! memory after a p-fraction of the non-conveyed memory is forgotten, and
//! when every heard word is known the agent collapses onto the minimum heard
//! word. Depending on the memory-loss parameter p and the neighborhood
//! radius r, the population either reaches a single shared word or freezes
//! into a fragmented mix — the experiment layer measures that transition.
//!
//! The crate is `no_std` (with `alloc`): pure deterministic compute with no
//! IO. File formats, the CLI, and parallel sweep execution live in the
//! companion binary crate.
//!
//! * [`topology`] — lattice and edge-list graphs with precomputed radius-r
//!   neighborhoods.
//! * [`automaton`] — agent states, the local rule, and the asynchronous
//!   scheduler with exact agreement bookkeeping.
//! * [`observables`] — the agreement energy and the word census.
//! * [`experiment`] — single runs, (radius, p) sweeps, and critical-point
//!   refinement.
//! * [`snapshot`] — canonical text snapshots of a configuration.
//! * [`rng`] — the seedable, platform-independent generator behind it all.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod automaton;
pub mod experiment;
pub mod observables;
pub mod rng;
pub mod snapshot;
pub mod topology;

pub use automaton::{
    forgetfulness_count, ActionTag, AgentState, Configuration, HearingContext, InitMode, Rounding,
    Word,
};
pub use experiment::{
    aggregate_sweep, find_critical, find_critical_with, run, run_configuration, run_jobs, run_on,
    run_with_progress, sweep, sweep_jobs, sweep_with, CriticalEstimate, ExperimentError, RunJob,
    RunResult, RunSpec, SweepRow, SweepTable,
};
pub use observables::{
    energy_full, energy_incremental, energy_incremental_check, energy_pair, word_census, RankEntry,
    WordCensus, ENERGY_CHECK_TOLERANCE,
};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotError};
pub use topology::{
    build_from_edge_list, build_periodic_lattice, parse_edge_list, Topology, TopologyError,
};

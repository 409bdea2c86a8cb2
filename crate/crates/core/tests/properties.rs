//! Property tests for the dynamics, observables, and snapshot format.
//!
//! The centerpiece is a reference model: a straightforward set-semantics
//! implementation of the hearer rule over `BTreeSet`s, consuming random draws
//! in the same order as the optimized engine. Driving both from the same seed
//! must reproduce identical trajectories; everything else (incremental energy,
//! census invariants, snapshots) is checked along the way.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use namegame_core::rng::Xoshiro256PlusPlus;
use namegame_core::{
    build_from_edge_list, build_periodic_lattice, energy_full, energy_incremental,
    energy_incremental_check, read_snapshot, word_census, write_snapshot, AgentState,
    Configuration, InitMode, Rounding, Topology, Word, ENERGY_CHECK_TOLERANCE,
};

// ---------------------------------------------------------------------------
// Reference model: plain sets, no incremental bookkeeping, no scratch reuse.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
struct RefAgent {
    memory: BTreeSet<u32>,
    conveyed: u32,
}

struct RefModel {
    agents: Vec<RefAgent>,
    rng: Xoshiro256PlusPlus,
}

impl RefModel {
    fn mirror_of(config: &Configuration) -> RefModel {
        let agents = config
            .states()
            .iter()
            .map(|st| RefAgent {
                memory: st.memory().iter().map(|w| w.0).collect(),
                conveyed: st.conveyed().0,
            })
            .collect();
        RefModel {
            agents,
            rng: Xoshiro256PlusPlus::from_state(config.rng_state()),
        }
    }

    /// One asynchronous update, written straight from the rule definition.
    fn step(&mut self, topology: &Topology, p: f64, rounding: Rounding) {
        let n = self.agents.len();
        let u = self.rng.below(n as u64) as usize;

        let heard: BTreeSet<u32> = topology
            .neighborhood(u as u32)
            .iter()
            .map(|&v| self.agents[v as usize].conveyed)
            .collect();
        assert!(!heard.is_empty());
        let unknown: BTreeSet<u32> = heard
            .iter()
            .copied()
            .filter(|w| !self.agents[u].memory.contains(w))
            .collect();

        if unknown.is_empty() {
            let min = *heard.iter().next().unwrap();
            let agent = &mut self.agents[u];
            agent.memory = BTreeSet::from([min]);
            agent.conveyed = min;
        } else {
            // Forgetfulness count, restated from the definition.
            let m = self.agents[u].memory.len();
            let q = p * (m as f64 - 1.0);
            let count = match rounding {
                Rounding::Floor => q.floor(),
                Rounding::Round => (q + 0.5).floor(),
                Rounding::Ceil => q.ceil(),
            } as usize;
            let count = count.min(m - 1);

            let conveyed = self.agents[u].conveyed;
            let mut pool: Vec<u32> = self.agents[u]
                .memory
                .iter()
                .copied()
                .filter(|&w| w != conveyed)
                .collect();
            for i in 0..count {
                let j = i + self.rng.below((pool.len() - i) as u64) as usize;
                pool.swap(i, j);
            }
            let agent = &mut self.agents[u];
            for w in &pool[..count] {
                agent.memory.remove(w);
            }
            agent.memory.extend(unknown);
        }
    }

    fn agrees_with(&self, config: &Configuration) -> bool {
        config.states().iter().zip(&self.agents).all(|(st, re)| {
            st.conveyed().0 == re.conveyed
                && st.memory().len() == re.memory.len()
                && st.memory().iter().all(|w| re.memory.contains(&w.0))
        })
    }

    /// Energy by the definition, over the reference agents.
    fn energy(&self, topology: &Topology) -> f64 {
        let n = self.agents.len();
        let mut sum = 0.0;
        for u in 0..n as u32 {
            let hood = topology.neighborhood(u);
            let agree = hood
                .iter()
                .filter(|&&v| self.agents[v as usize].conveyed == self.agents[u as usize].conveyed)
                .count();
            sum += agree as f64 / hood.len() as f64;
        }
        -sum / n as f64
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn lattice_params() -> impl Strategy<Value = (u32, u32, u32)> {
    (3u32..=8, 3u32..=8).prop_flat_map(|(w, h)| {
        let max_r = (w.min(h) - 1) / 2;
        (Just(w), Just(h), 1u32..=max_r.max(1))
    })
}

fn any_rounding() -> impl Strategy<Value = Rounding> {
    prop_oneof![
        Just(Rounding::Floor),
        Just(Rounding::Round),
        Just(Rounding::Ceil)
    ]
}

fn any_init() -> impl Strategy<Value = InitMode> {
    prop_oneof![Just(InitMode::Unique), Just(InitMode::UniformRandom)]
}

/// Random connected simple graph: a random spanning tree plus extra edges.
fn connected_graph(seed: u64, n: usize, extra: usize) -> Vec<(u32, u32)> {
    let mut rng = Xoshiro256PlusPlus::from_seed(seed);
    let mut edges = BTreeSet::new();
    for v in 1..n as u32 {
        let parent = rng.below(v as u64) as u32;
        edges.insert((parent.min(v), parent.max(v)));
    }
    for _ in 0..extra {
        let a = rng.below(n as u64) as u32;
        let b = rng.below(n as u64) as u32;
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Trajectory equivalence and running invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_matches_reference_model(
        (width, height, radius) in lattice_params(),
        p in 0.0f64..=1.0,
        rounding in any_rounding(),
        init in any_init(),
        seed in any::<u64>(),
        steps in 1usize..300,
    ) {
        let topology = Arc::new(build_periodic_lattice(width, height, radius).unwrap());
        let mut config = Configuration::init(topology.clone(), init, seed);
        let mut reference = RefModel::mirror_of(&config);
        let n = topology.vertex_count() as u64;

        for step in 0..steps {
            config.step(p, rounding);
            reference.step(&topology, p, rounding);

            // Cheap invariants every step.
            let st = config.states();
            prop_assert!(st.iter().all(|s| !s.memory().is_empty()));
            prop_assert!(st.iter().all(|s| s.knows(s.conveyed())));

            if step % 50 == 0 {
                prop_assert!(reference.agrees_with(&config), "diverged at step {step}");
            }
        }
        prop_assert!(reference.agrees_with(&config));

        // Observables agree across all three routes.
        let incremental = energy_incremental(&config);
        let full = energy_full(&config);
        let reference_energy = reference.energy(&topology);
        prop_assert!((incremental - full).abs() <= ENERGY_CHECK_TOLERANCE);
        prop_assert!((reference_energy - full).abs() <= ENERGY_CHECK_TOLERANCE);
        prop_assert!((-1.0..=0.0).contains(&full));

        // Census invariants.
        let census = word_census(&config);
        prop_assert_eq!(census.total(), n);
        prop_assert!(census
            .ranked
            .windows(2)
            .all(|w| w[0].count >= w[1].count));
        prop_assert!(census
            .ranked
            .iter()
            .enumerate()
            .all(|(i, e)| e.rank == i as u32 + 1));
    }

    #[test]
    fn forget_add_extremes(
        (width, height, radius) in lattice_params(),
        seed in any::<u64>(),
        warmup in 0usize..100,
        full_loss in proptest::bool::ANY,
    ) {
        let topology = Arc::new(build_periodic_lattice(width, height, radius).unwrap());
        let mut config = Configuration::init(topology.clone(), InitMode::Unique, seed);
        for _ in 0..warmup {
            config.step(0.3, Rounding::Floor);
        }
        // Find a vertex with unknown heard words, if any survives the warmup.
        let target = (0..topology.vertex_count() as u32)
            .find(|&u| !config.gather_context(u).unknown.is_empty());
        if let Some(u) = target {
            let before = config.state(u).clone();
            let ctx = config.gather_context(u);
            let p = if full_loss { 1.0 } else { 0.0 };
            config.apply_local_rule(u, p, Rounding::Floor);
            let after = config.state(u);

            let mut expected: BTreeSet<Word> = if full_loss {
                // p = 1: everything except the conveyed word is forgotten.
                BTreeSet::from([before.conveyed()])
            } else {
                // p = 0: pure growth.
                before.memory().iter().copied().collect()
            };
            expected.extend(ctx.unknown.iter().copied());
            let got: BTreeSet<Word> = after.memory().iter().copied().collect();
            prop_assert_eq!(got, expected);
            prop_assert_eq!(after.conveyed(), before.conveyed());
        }
    }

    #[test]
    fn random_graph_neighborhoods_are_symmetric_and_bfs_exact(
        seed in any::<u64>(),
        n in 2usize..24,
        extra in 0usize..16,
        radius in 1u32..4,
    ) {
        let edges = connected_graph(seed, n, extra);
        let topology = build_from_edge_list(&edges, radius).unwrap();
        prop_assert_eq!(topology.vertex_count(), n);

        // Independent oracle: Floyd-Warshall distances.
        let inf = u32::MAX / 2;
        let mut dist = vec![vec![inf; n]; n];
        for v in 0..n {
            dist[v][v] = 0;
        }
        for &(a, b) in &edges {
            dist[a as usize][b as usize] = 1;
            dist[b as usize][a as usize] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let through = dist[i][k] + dist[k][j];
                    if through < dist[i][j] {
                        dist[i][j] = through;
                    }
                }
            }
        }

        for u in 0..n {
            let expected: Vec<u32> = (0..n)
                .filter(|&v| v != u && dist[u][v] <= radius)
                .map(|v| v as u32)
                .collect();
            prop_assert_eq!(topology.neighborhood(u as u32), expected.as_slice());
            for &v in topology.neighborhood(u as u32) {
                prop_assert!(topology.neighborhood(v).binary_search(&(u as u32)).is_ok());
            }
        }
    }

    #[test]
    fn snapshot_round_trip_preserves_trajectories(
        (width, height, radius) in lattice_params(),
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
        pre in 0usize..200,
        post in 1usize..100,
    ) {
        let topology = Arc::new(build_periodic_lattice(width, height, radius).unwrap());
        let mut config = Configuration::init(topology.clone(), InitMode::UniformRandom, seed);
        for _ in 0..pre {
            config.step(p, Rounding::Floor);
        }

        let text = write_snapshot(&config, p);
        let (mut restored, p_read) = read_snapshot(&text, topology).unwrap();
        prop_assert_eq!(p_read, p);
        prop_assert_eq!(write_snapshot(&restored, p_read), text.clone());

        for _ in 0..post {
            prop_assert_eq!(
                config.step(p, Rounding::Floor),
                restored.step(p, Rounding::Floor)
            );
        }
        prop_assert_eq!(config.states(), restored.states());
        prop_assert!(energy_incremental_check(&restored));
    }
}

// ---------------------------------------------------------------------------
// Deterministic (non-proptest) properties
// ---------------------------------------------------------------------------

#[test]
fn consensus_absorbs_all_update_sequences() {
    for seed in [0u64, 1, 2, 3, 4] {
        let topology = Arc::new(build_periodic_lattice(5, 4, 1).unwrap());
        let mut config = Configuration::consensus(topology, Word(9), seed);
        assert!(config.is_fixed_point());
        let before = config.states().to_vec();
        for _ in 0..1000 {
            config.step(0.8, Rounding::Floor);
        }
        assert_eq!(config.states(), before.as_slice());
        assert_eq!(energy_full(&config), -1.0);
    }
}

#[test]
fn trajectories_hash_identically_per_seed() {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};

    let hash_of = |seed: u64| {
        let topology = Arc::new(build_periodic_lattice(8, 8, 2).unwrap());
        let mut config = Configuration::init(topology, InitMode::UniformRandom, seed);
        let mut hasher = DefaultHasher::new();
        for _ in 0..2000 {
            let (vertex, _) = config.step(0.4, Rounding::Floor);
            vertex.hash(&mut hasher);
        }
        for st in config.states() {
            st.conveyed().0.hash(&mut hasher);
            for w in st.memory() {
                w.0.hash(&mut hasher);
            }
        }
        hasher.finish()
    };

    assert_eq!(hash_of(123), hash_of(123));
    assert_ne!(hash_of(123), hash_of(124));
}

#[test]
fn mixed_degree_graph_keeps_incremental_energy_exact() {
    // Star plus a tail: neighborhood sizes differ across vertices, so each
    // degree class gets its own accumulator.
    let edges = [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)];
    let topology = Arc::new(build_from_edge_list(&edges, 2).unwrap());
    let mut config = Configuration::init(topology, InitMode::Unique, 5);
    for _ in 0..5000 {
        config.step(0.5, Rounding::Floor);
        assert!(energy_incremental_check(&config));
        if config.is_consensus() {
            break;
        }
    }
    let consensus_state: Vec<AgentState> = config.states().to_vec();
    drop(consensus_state);
}

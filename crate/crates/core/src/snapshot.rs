//! Text snapshots of a configuration, for debugging and targeted resumes.
//!
//! The format is line-oriented and canonical, so writing and re-parsing a
//! snapshot reproduces it byte for byte:
//!
//! ```text
//! # namegame snapshot v1
//! n=4
//! radius=1
//! p=0.3
//! step_count=17
//! rng=0123456789abcdef 0123456789abcdef 0123456789abcdef 0123456789abcdef
//! 0 : 2 : 1 2 7
//! 1 : 0 : 0
//! ...
//! ```
//!
//! One `u : x_u : sorted memory` line per vertex. The parameter p travels in
//! the header because the local rule needs it; the topology itself is not
//! embedded and must be supplied (and match `n` and `radius`) on load.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::automaton::{AgentState, Configuration, StateError, Word};
use crate::topology::Topology;

const MAGIC: &str = "# namegame snapshot v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnapshotError {
    BadHeader,
    /// A malformed or missing line; `expected` names what the parser wanted.
    BadLine {
        line: usize,
        expected: &'static str,
    },
    TopologyMismatch {
        field: &'static str,
        expected: u64,
        got: u64,
    },
    State(StateError),
}

impl fmt::Display for SnapshotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotError::BadHeader => write!(f, "missing snapshot magic line"),
            SnapshotError::BadLine { line, expected } => {
                write!(f, "line {line}: expected {expected}")
            }
            SnapshotError::TopologyMismatch {
                field,
                expected,
                got,
            } => write!(
                f,
                "snapshot {field} = {got} does not match topology ({expected})"
            ),
            SnapshotError::State(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SnapshotError {}

impl From<StateError> for SnapshotError {
    fn from(e: StateError) -> Self {
        SnapshotError::State(e)
    }
}

/// Renders the configuration (plus the rule parameter p) as snapshot text.
pub fn write_snapshot(config: &Configuration, p: f64) -> String {
    let topology = config.topology();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "n={}", topology.vertex_count());
    let _ = writeln!(out, "radius={}", topology.radius());
    let _ = writeln!(out, "p={p}");
    let _ = writeln!(out, "step_count={}", config.step_count());
    let [s0, s1, s2, s3] = config.rng_state();
    let _ = writeln!(out, "rng={s0:016x} {s1:016x} {s2:016x} {s3:016x}");
    for (u, state) in config.states().iter().enumerate() {
        let _ = write!(out, "{u} : {} :", state.conveyed());
        for w in state.memory() {
            let _ = write!(out, " {w}");
        }
        let _ = writeln!(out);
    }
    out
}

/// Parses snapshot text against a topology, returning the restored
/// configuration and the rule parameter p recorded in the header.
pub fn read_snapshot(
    text: &str,
    topology: Arc<Topology>,
) -> Result<(Configuration, f64), SnapshotError> {
    let mut lines = text.lines().enumerate();

    let (_, magic) = lines.next().ok_or(SnapshotError::BadHeader)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadHeader);
    }

    fn field<'a>(
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
        key: &'static str,
    ) -> Result<(usize, &'a str), SnapshotError> {
        let (i, line) = lines.next().ok_or(SnapshotError::BadLine {
            line: 0,
            expected: key,
        })?;
        let value = line.strip_prefix(key).ok_or(SnapshotError::BadLine {
            line: i + 1,
            expected: key,
        })?;
        Ok((i + 1, value))
    }

    let (line_no, value) = field(&mut lines, "n=")?;
    let n: usize = value.parse().map_err(|_| SnapshotError::BadLine {
        line: line_no,
        expected: "n=<integer>",
    })?;
    if n != topology.vertex_count() {
        return Err(SnapshotError::TopologyMismatch {
            field: "n",
            expected: topology.vertex_count() as u64,
            got: n as u64,
        });
    }

    let (line_no, value) = field(&mut lines, "radius=")?;
    let radius: u32 = value.parse().map_err(|_| SnapshotError::BadLine {
        line: line_no,
        expected: "radius=<integer>",
    })?;
    if radius != topology.radius() {
        return Err(SnapshotError::TopologyMismatch {
            field: "radius",
            expected: topology.radius() as u64,
            got: radius as u64,
        });
    }

    let (line_no, value) = field(&mut lines, "p=")?;
    let p: f64 = value.parse().map_err(|_| SnapshotError::BadLine {
        line: line_no,
        expected: "p=<float>",
    })?;

    let (line_no, value) = field(&mut lines, "step_count=")?;
    let step_count: u64 = value.parse().map_err(|_| SnapshotError::BadLine {
        line: line_no,
        expected: "step_count=<integer>",
    })?;

    let (line_no, value) = field(&mut lines, "rng=")?;
    let mut words = value.split(' ');
    let mut rng_state = [0u64; 4];
    for slot in &mut rng_state {
        let w = words.next().ok_or(SnapshotError::BadLine {
            line: line_no,
            expected: "rng=<4 hex words>",
        })?;
        *slot = u64::from_str_radix(w, 16).map_err(|_| SnapshotError::BadLine {
            line: line_no,
            expected: "rng=<4 hex words>",
        })?;
    }
    if words.next().is_some() {
        return Err(SnapshotError::BadLine {
            line: line_no,
            expected: "rng=<4 hex words>",
        });
    }

    let mut states = Vec::with_capacity(n);
    for expected_u in 0..n {
        let (i, line) = lines.next().ok_or(SnapshotError::BadLine {
            line: 0,
            expected: "vertex line",
        })?;
        let bad = || SnapshotError::BadLine {
            line: i + 1,
            expected: "\"u : x_u : w1 w2 ...\"",
        };
        let mut parts = line.splitn(3, " : ");
        let u: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if u != expected_u {
            return Err(bad());
        }
        let conveyed: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let memory: Vec<Word> = parts
            .next()
            .ok_or_else(bad)?
            .split_whitespace()
            .map(|w| w.parse::<u32>().map(Word).map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let state = AgentState::new(memory, Word(conveyed)).ok_or(SnapshotError::State(
            StateError::ConveyedNotInMemory {
                vertex: expected_u as u32,
            },
        ))?;
        states.push(state);
    }
    if lines.next().is_some() {
        return Err(SnapshotError::BadLine {
            line: n + 7,
            expected: "end of snapshot",
        });
    }

    let config = Configuration::from_parts(topology, states, rng_state, step_count)?;
    Ok((config, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{InitMode, Rounding};
    use crate::topology::build_periodic_lattice;

    #[test]
    fn round_trip_is_bit_exact() {
        let topology = Arc::new(build_periodic_lattice(4, 4, 1).unwrap());
        let mut config = Configuration::init(topology.clone(), InitMode::Unique, 12345);
        for _ in 0..500 {
            config.step(0.35, Rounding::Floor);
        }
        let text = write_snapshot(&config, 0.35);
        let (restored, p) = read_snapshot(&text, topology).unwrap();
        assert_eq!(p, 0.35);
        assert_eq!(restored.states(), config.states());
        assert_eq!(restored.rng_state(), config.rng_state());
        assert_eq!(restored.step_count(), config.step_count());
        assert_eq!(write_snapshot(&restored, p), text);
    }

    #[test]
    fn restored_configuration_continues_identically() {
        let topology = Arc::new(build_periodic_lattice(4, 4, 1).unwrap());
        let mut config = Configuration::init(topology.clone(), InitMode::UniformRandom, 9);
        for _ in 0..100 {
            config.step(0.6, Rounding::Floor);
        }
        let text = write_snapshot(&config, 0.6);
        let (mut restored, p) = read_snapshot(&text, topology).unwrap();
        for _ in 0..200 {
            assert_eq!(
                config.step(p, Rounding::Floor),
                restored.step(p, Rounding::Floor)
            );
        }
        assert_eq!(config.states(), restored.states());
    }

    #[test]
    fn rejects_mismatched_topology() {
        let topology = Arc::new(build_periodic_lattice(4, 4, 1).unwrap());
        let config = Configuration::init(topology, InitMode::Unique, 1);
        let text = write_snapshot(&config, 0.0);

        let other = Arc::new(build_periodic_lattice(5, 5, 1).unwrap());
        assert_eq!(
            read_snapshot(&text, other).unwrap_err(),
            SnapshotError::TopologyMismatch {
                field: "n",
                expected: 25,
                got: 16
            }
        );

        let five = Arc::new(build_periodic_lattice(5, 5, 1).unwrap());
        let text = write_snapshot(&Configuration::init(five, InitMode::Unique, 1), 0.0);
        let other_radius = Arc::new(build_periodic_lattice(5, 5, 2).unwrap());
        assert!(matches!(
            read_snapshot(&text, other_radius),
            Err(SnapshotError::TopologyMismatch {
                field: "radius",
                ..
            })
        ));
    }

    #[test]
    fn rejects_corrupt_lines() {
        let topology = Arc::new(build_periodic_lattice(4, 4, 1).unwrap());
        let config = Configuration::init(topology.clone(), InitMode::Unique, 1);
        let good = write_snapshot(&config, 0.5);

        let no_magic = good.replace("# namegame snapshot v1", "# something else");
        assert_eq!(
            read_snapshot(&no_magic, topology.clone()).unwrap_err(),
            SnapshotError::BadHeader
        );

        let bad_vertex = good.replace("0 : 0 : 0", "0 : 7 : 0");
        assert!(matches!(
            read_snapshot(&bad_vertex, topology.clone()),
            Err(SnapshotError::State(_))
        ));

        let truncated: String = good.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(read_snapshot(&truncated, topology).is_err());
    }
}

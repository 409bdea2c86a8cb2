//! Interaction graphs with precomputed radius-r neighborhoods.
//!
//! A [`Topology`] is immutable after construction: direct adjacency plus, for
//! every vertex `u`, the sorted set of vertices within graph distance `r`
//! (excluding `u` itself). All dynamics and observables read from it
//! concurrently without synchronization.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Immutable graph plus radius-r neighborhoods.
///
/// Adjacency and neighborhoods are stored in compressed sparse rows with each
/// row sorted, so iteration order is identical on every platform.
#[derive(Debug, Clone)]
pub struct Topology {
    n: usize,
    radius: u32,
    adj_offsets: Vec<u32>,
    adj: Vec<u32>,
    nbr_offsets: Vec<u32>,
    nbrs: Vec<u32>,
    // Vertices grouped by neighborhood size; the energy ledger keeps one
    // exact integer accumulator per class (one class on any torus).
    class_of: Vec<u32>,
    class_sizes: Vec<u32>,
    total_pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyError {
    ZeroDimension,
    ZeroRadius,
    /// 2r+1 must fit in the smaller lattice side, otherwise wrapped
    /// neighborhoods double-count vertices.
    RadiusTooLarge {
        radius: u32,
        min_side: u32,
    },
    EmptyEdgeList,
    SelfLoop {
        vertex: u32,
    },
    DuplicateEdge {
        a: u32,
        b: u32,
    },
    Disconnected {
        from: u32,
        to: u32,
    },
    InvalidEdgeLine {
        line: usize,
    },
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::ZeroDimension => write!(f, "lattice sides must be at least 2"),
            TopologyError::ZeroRadius => write!(f, "radius must be at least 1"),
            TopologyError::RadiusTooLarge { radius, min_side } => write!(
                f,
                "radius {radius} too large: 2r+1 = {} exceeds lattice side {min_side}",
                2 * radius + 1
            ),
            TopologyError::EmptyEdgeList => write!(f, "edge list is empty"),
            TopologyError::SelfLoop { vertex } => {
                write!(f, "self-loop on vertex {vertex}")
            }
            TopologyError::DuplicateEdge { a, b } => {
                write!(f, "duplicate edge between {a} and {b}")
            }
            TopologyError::Disconnected { from, to } => {
                write!(f, "graph is disconnected: no path from {from} to {to}")
            }
            TopologyError::InvalidEdgeLine { line } => {
                write!(f, "line {line}: expected two vertex ids \"u v\"")
            }
        }
    }
}

impl core::error::Error for TopologyError {}

impl Topology {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Direct graph neighbors of `u`, sorted.
    pub fn adjacent(&self, u: u32) -> &[u32] {
        let lo = self.adj_offsets[u as usize] as usize;
        let hi = self.adj_offsets[u as usize + 1] as usize;
        &self.adj[lo..hi]
    }

    /// All vertices within graph distance `radius` of `u`, sorted, `u` excluded.
    pub fn neighborhood(&self, u: u32) -> &[u32] {
        let lo = self.nbr_offsets[u as usize] as usize;
        let hi = self.nbr_offsets[u as usize + 1] as usize;
        &self.nbrs[lo..hi]
    }

    pub fn neighborhood_size(&self, u: u32) -> usize {
        self.neighborhood(u).len()
    }

    /// Number of ordered (hearer, speaker) pairs, i.e. the sum of all
    /// neighborhood sizes. Full agreement means this many agreeing pairs.
    pub fn total_ordered_pairs(&self) -> u64 {
        self.total_pairs
    }

    /// Undirected edge list with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n as u32 {
            for &v in self.adjacent(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub(crate) fn class_of(&self, u: u32) -> usize {
        self.class_of[u as usize] as usize
    }

    pub(crate) fn class_sizes(&self) -> &[u32] {
        &self.class_sizes
    }

    /// Builds the CSR neighborhood tables and degree classes from per-vertex
    /// neighbor lists (already sorted).
    fn assemble(radius: u32, adjacency: Vec<Vec<u32>>, neighborhoods: Vec<Vec<u32>>) -> Topology {
        let n = adjacency.len();
        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        adj_offsets.push(0);
        for row in &adjacency {
            adj.extend_from_slice(row);
            adj_offsets.push(adj.len() as u32);
        }

        let mut nbr_offsets = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::new();
        nbr_offsets.push(0);
        for row in &neighborhoods {
            nbrs.extend_from_slice(row);
            nbr_offsets.push(nbrs.len() as u32);
        }

        let mut class_sizes: Vec<u32> = neighborhoods.iter().map(|r| r.len() as u32).collect();
        class_sizes.sort_unstable();
        class_sizes.dedup();
        let class_of = neighborhoods
            .iter()
            .map(|r| {
                class_sizes
                    .binary_search(&(r.len() as u32))
                    .expect("class resolved") as u32
            })
            .collect();
        let total_pairs = nbrs.len() as u64;

        Topology {
            n,
            radius,
            adj_offsets,
            adj,
            nbr_offsets,
            nbrs,
            class_of,
            class_sizes,
            total_pairs,
        }
    }
}

/// Builds a periodic 2D lattice (torus) with 4-neighbor adjacency and
/// radius-r neighborhoods under the toroidal Manhattan metric.
///
/// Requires `2*radius + 1 <= min(width, height)` so that the offset stencil
/// maps to distinct vertices; every neighborhood then has exactly
/// `2r(r+1)` members.
pub fn build_periodic_lattice(
    width: u32,
    height: u32,
    radius: u32,
) -> Result<Topology, TopologyError> {
    if width < 2 || height < 2 {
        return Err(TopologyError::ZeroDimension);
    }
    if radius == 0 {
        return Err(TopologyError::ZeroRadius);
    }
    let min_side = width.min(height);
    if 2 * radius + 1 > min_side {
        return Err(TopologyError::RadiusTooLarge { radius, min_side });
    }

    let w = width as i64;
    let h = height as i64;
    let n = (width as usize) * (height as usize);
    let r = radius as i64;

    // Offset stencil: all (dx, dy) with 1 <= |dx|+|dy| <= r. Because
    // 2r+1 <= side, toroidal distance equals |dx|+|dy| for the whole stencil.
    let mut stencil = Vec::new();
    for dx in -r..=r {
        for dy in -r..=r {
            let d = dx.abs() + dy.abs();
            if d >= 1 && d <= r {
                stencil.push((dx, dy));
            }
        }
    }
    debug_assert_eq!(stencil.len() as i64, 2 * r * (r + 1));

    let index = |x: i64, y: i64| -> u32 { (y.rem_euclid(h) * w + x.rem_euclid(w)) as u32 };

    let mut adjacency = Vec::with_capacity(n);
    let mut neighborhoods = Vec::with_capacity(n);
    for y in 0..h {
        for x in 0..w {
            let mut adj = vec![
                index(x + 1, y),
                index(x - 1, y),
                index(x, y + 1),
                index(x, y - 1),
            ];
            adj.sort_unstable();
            adjacency.push(adj);

            let mut nbr: Vec<u32> = stencil
                .iter()
                .map(|&(dx, dy)| index(x + dx, y + dy))
                .collect();
            nbr.sort_unstable();
            neighborhoods.push(nbr);
        }
    }

    Ok(Topology::assemble(radius, adjacency, neighborhoods))
}

/// Builds a topology from an undirected simple edge list; neighborhoods are
/// found by breadth-first search to depth `radius`.
///
/// Vertex ids must be 0-based; the vertex count is `max id + 1`. The graph
/// must be connected.
pub fn build_from_edge_list(edges: &[(u32, u32)], radius: u32) -> Result<Topology, TopologyError> {
    if radius == 0 {
        return Err(TopologyError::ZeroRadius);
    }
    if edges.is_empty() {
        return Err(TopologyError::EmptyEdgeList);
    }

    let mut n = 0usize;
    for &(a, b) in edges {
        if a == b {
            return Err(TopologyError::SelfLoop { vertex: a });
        }
        n = n.max(a as usize + 1).max(b as usize + 1);
    }

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        adjacency[a as usize].push(b);
        adjacency[b as usize].push(a);
    }
    for (u, row) in adjacency.iter_mut().enumerate() {
        row.sort_unstable();
        if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
            return Err(TopologyError::DuplicateEdge {
                a: u as u32,
                b: w[0],
            });
        }
    }

    // Connectivity: BFS from vertex 0 must reach everything.
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0u32);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    if let Some(unreached) = seen.iter().position(|&s| !s) {
        return Err(TopologyError::Disconnected {
            from: 0,
            to: unreached as u32,
        });
    }

    // Depth-bounded BFS per vertex.
    let mut neighborhoods = Vec::with_capacity(n);
    let mut dist = vec![u32::MAX; n];
    let mut touched: Vec<u32> = Vec::new();
    for start in 0..n as u32 {
        let mut nbr = Vec::new();
        dist[start as usize] = 0;
        touched.push(start);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du == radius {
                continue;
            }
            for &v in &adjacency[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    touched.push(v);
                    nbr.push(v);
                    queue.push_back(v);
                }
            }
        }
        for &t in &touched {
            dist[t as usize] = u32::MAX;
        }
        touched.clear();
        nbr.sort_unstable();
        neighborhoods.push(nbr);
    }

    Ok(Topology::assemble(radius, adjacency, neighborhoods))
}

/// Parses the plain-text edge list format: one `u v` pair per line,
/// 0-based ids, `#` starts a comment line, blank lines ignored.
pub fn parse_edge_list(text: &str) -> Result<Vec<(u32, u32)>, TopologyError> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let err = || TopologyError::InvalidEdgeLine { line: i + 1 };
        let a: u32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let b: u32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        if parts.next().is_some() {
            return Err(err());
        }
        edges.push((a, b));
    }
    Ok(edges)
}

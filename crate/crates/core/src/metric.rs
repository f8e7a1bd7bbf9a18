//! Finite weighted graphs with exact path metric: the substrate for the
//! bottleneck and tree-approximation computations.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::Zero;

use crate::rat::{rat, Rat};
use crate::{Error, Result};

/// A finite connected graph with positive rational edge lengths, stored in
/// integer "atomic" units (`unit` converts back to the original scale).
///
/// `subdivide` inserts the midpoint of every edge and keeps each half at the
/// full atomic length of its parent, so distances double and every pair of
/// original vertices acquires an exactly realizable midpoint; results are
/// then reported in these subdivided units.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<(u32, u32, u64)>,
    adjacency: Vec<Vec<(u32, u64)>>,
    /// Original length represented by one atomic unit.
    pub unit: Rat,
    pub subdivided: bool,
    /// Number of vertices that existed before subdivision.
    pub original_vertices: usize,
}

impl MetricGraph {
    /// Build from rational edge lengths. Lengths are converted to a common
    /// integer unit; zero or negative lengths are rejected.
    pub fn new(vertex_count: usize, edges: Vec<(u32, u32, Rat)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Precondition("graph needs at least one vertex".into()));
        }
        let mut denom: i128 = 1;
        for (u, v, len) in &edges {
            if (*u as usize) >= vertex_count || (*v as usize) >= vertex_count {
                return Err(Error::Precondition("edge endpoint out of range".into()));
            }
            if len <= &Rat::zero() {
                return Err(Error::Precondition("edge lengths must be positive".into()));
            }
            denom = num_integer::lcm(denom, *len.denom());
        }
        let unit = Rat::new(1, denom);
        let scaled: Vec<(u32, u32, u64)> = edges
            .iter()
            .map(|(u, v, len)| {
                let atoms = (len * rat(denom)).to_integer();
                (*u, *v, atoms as u64)
            })
            .collect();
        Ok(Self::from_atomic(vertex_count, scaled, unit, false, vertex_count))
    }

    /// Build from unit-length edges.
    pub fn unit_edges(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        Self::new(vertex_count, edges.iter().map(|&(u, v)| (u, v, rat(1))).collect())
    }

    fn from_atomic(
        vertex_count: usize,
        edges: Vec<(u32, u32, u64)>,
        unit: Rat,
        subdivided: bool,
        original_vertices: usize,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v, w) in &edges {
            adjacency[u as usize].push((v, w));
            if u != v {
                adjacency[v as usize].push((u, w));
            }
        }
        MetricGraph { vertex_count, edges, adjacency, unit, subdivided, original_vertices }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32, u64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[(u32, u64)] {
        &self.adjacency[v as usize]
    }

    /// Smallest atomic edge length, the "one step" of radius sweeps.
    pub fn min_step(&self) -> u64 {
        self.edges.iter().map(|&(_, _, w)| w).min().unwrap_or(1)
    }

    /// Barycentric subdivision with the distance-doubling convention: each
    /// edge `(u, v, w)` becomes `(u, m, w)` and `(m, v, w)`.
    pub fn subdivide(&self) -> MetricGraph {
        let mut edges = Vec::with_capacity(self.edges.len() * 2);
        let mut next = self.vertex_count as u32;
        for &(u, v, w) in &self.edges {
            let m = next;
            next += 1;
            edges.push((u, m, w));
            edges.push((m, v, w));
        }
        MetricGraph::from_atomic(
            next as usize,
            edges,
            self.unit / rat(2),
            true,
            self.original_vertices,
        )
    }

    /// Exact single-source distances in atomic units; `u64::MAX` marks
    /// unreachable vertices.
    pub fn distances_from(&self, source: u32) -> Vec<u64> {
        let n = self.vertex_count;
        let mut dist = vec![u64::MAX; n];
        dist[source as usize] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, source)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v as usize] {
                continue;
            }
            for &(t, w) in &self.adjacency[v as usize] {
                let nd = d + w;
                if nd < dist[t as usize] {
                    dist[t as usize] = nd;
                    heap.push(Reverse((nd, t)));
                }
            }
        }
        dist
    }

    /// Multi-source distances.
    pub fn distances_from_set(&self, sources: &[u32]) -> Vec<u64> {
        let n = self.vertex_count;
        let mut dist = vec![u64::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s as usize] = 0;
            heap.push(Reverse((0u64, s)));
        }
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v as usize] {
                continue;
            }
            for &(t, w) in &self.adjacency[v as usize] {
                let nd = d + w;
                if nd < dist[t as usize] {
                    dist[t as usize] = nd;
                    heap.push(Reverse((nd, t)));
                }
            }
        }
        dist
    }
}

/// Exact all-pairs shortest-path matrix in atomic units.
///
/// Errors with a separated pair if the graph is disconnected.
pub fn apsp(g: &MetricGraph) -> Result<Vec<Vec<u64>>> {
    let n = g.vertex_count();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n as u32 {
        let row = g.distances_from(s);
        if let Some(t) = row.iter().position(|&d| d == u64::MAX) {
            return Err(Error::Disconnected(s as usize, t));
        }
        rows.push(row);
    }
    #[cfg(debug_assertions)]
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[i], 0);
        for (j, &d) in row.iter().enumerate() {
            assert_eq!(d, rows[j][i], "symmetry");
        }
    }
    Ok(rows)
}

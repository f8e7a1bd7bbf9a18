//! Cutting the Cayley 2-complex along `f^{-1}(Z + 1/2)` into vertex spaces
//! and tracks, and assembling the finite-radius approximation of the tree
//! `T` with its level map.
//!
//! Tracks are represented combinatorially by their crossing-edge sets; the
//! tree structure is recovered from the 1-skeleton plus 2-cell gluing, so
//! no geometric normal arcs are ever materialized.

use std::collections::HashMap;

use num_traits::Signed;

use crate::group::{CayleyBall, GroupOracle, Letter};
use crate::pseudochar::PseudocharacterScaled;
use crate::rat::{is_half_integer, nearest_level, ratio, Rat};
use crate::{Error, Result};

/// A connected component of the ball minus all crossing edges, living in
/// `f^{-1}(n - 1/2, n + 1/2)` for its level `n`.
#[derive(Debug, Clone)]
pub struct VertexSpace {
    pub id: u32,
    pub level: i64,
    pub members: Vec<u32>,
    /// No member within graph distance 1 of the ball boundary sphere.
    pub interior: bool,
    /// Smallest |unscaled f| over members.
    pub min_abs_unscaled: Rat,
    /// Largest unscaled f over members.
    pub max_unscaled: Rat,
    /// Smallest unscaled f over members.
    pub min_unscaled: Rat,
}

/// A track at half-integer level `below + 1/2`: a set of crossing edges
/// glued through 2-cells, bounding the two vertex spaces `sides`.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: u32,
    /// The track sits at level `below + 1/2`.
    pub below: i64,
    /// Indices into the ball's edge list.
    pub crossings: Vec<usize>,
    /// (lower-level side, upper-level side).
    pub sides: (u32, u32),
    pub interior: bool,
}

/// Finite-radius approximation of the tree `T`: vertex spaces joined by
/// tracks, with the level map `fbar`.
#[derive(Debug)]
pub struct SlabTree {
    pub vertex_spaces: Vec<VertexSpace>,
    pub tracks: Vec<Track>,
    pub ball_radius: usize,
    /// Max |unscaled f| over vertices at distance > 1 from the sphere,
    /// rounded down: the trusted barrier range in unscaled units.
    pub interior_radius: i64,
    /// Ball vertex -> containing vertex space.
    pub space_of: Vec<u32>,
    /// Scaled value per ball vertex.
    pub values: Vec<Rat>,
    /// Unscaled value per ball vertex.
    pub unscaled: Vec<Rat>,
    /// Level per ball vertex.
    pub levels: Vec<i64>,
    /// Vertex space -> incident (track, other space).
    pub adjacency: Vec<Vec<(u32, u32)>>,
}

impl SlabTree {
    pub fn identity_space(&self) -> u32 {
        self.space_of[0]
    }

    /// The level map on tree vertices.
    pub fn fbar(&self, space: u32) -> i64 {
        self.vertex_spaces[space as usize].level
    }
}

pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    pub(crate) fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.parent[r as usize] != r {
            let p = self.parent[r as usize];
            self.parent[r as usize] = self.parent[p as usize];
            r = p;
        }
        r
    }

    pub(crate) fn union(&mut self, x: u32, y: u32) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        // keep the smaller root for deterministic labels
        let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[hi as usize] = lo;
        true
    }
}

struct Leveled {
    values: Vec<Rat>,
    unscaled: Vec<Rat>,
    levels: Vec<i64>,
}

fn level_data(ball: &CayleyBall, f: &PseudocharacterScaled, oracle: &GroupOracle) -> Result<Leveled> {
    if f.scale * f.epsilon_checked >= ratio(1, 4) {
        return Err(Error::Precondition(
            "input is not scaled: scale * epsilon must be below 1/4".into(),
        ));
    }
    let mut values = Vec::with_capacity(ball.vertex_count());
    let mut unscaled = Vec::with_capacity(ball.vertex_count());
    for w in &ball.vertices {
        let u = f.base.eval_reduced(w, oracle)?;
        let v = u * f.scale;
        if is_half_integer(&v) {
            return Err(Error::Precondition(format!(
                "scaled pseudocharacter hits a half-integer at {}; rerun scale_normalize \
                 with a radius covering this ball",
                w.display(oracle.generators())
            )));
        }
        unscaled.push(u);
        values.push(v);
    }
    let levels: Vec<i64> = values.iter().map(nearest_level).collect();
    for &(u, _, v) in &ball.edges {
        let d = (levels[u as usize] - levels[v as usize]).abs();
        if d > 1 {
            return Err(Error::Precondition(
                "an edge crosses more than one half-integer level; the input is not \
                 scaled on this ball"
                    .into(),
            ));
        }
    }
    Ok(Leveled { values, unscaled, levels })
}

/// Partition of the ball vertices into connected components after deleting
/// every crossing edge, each with its level.
pub fn build_vertex_spaces(
    ball: &CayleyBall,
    f: &PseudocharacterScaled,
    oracle: &GroupOracle,
) -> Result<Vec<VertexSpace>> {
    Ok(build_slab_tree(ball, f, oracle)?.vertex_spaces)
}

/// Crossing edges grouped by level and 2-cell gluing.
pub fn build_tracks(
    ball: &CayleyBall,
    f: &PseudocharacterScaled,
    oracle: &GroupOracle,
) -> Result<Vec<Track>> {
    Ok(build_slab_tree(ball, f, oracle)?.tracks)
}

/// Assemble vertex spaces and tracks into the incidence graph, mark
/// interior objects, and verify acyclicity on the interior.
pub fn build_slab_tree(
    ball: &CayleyBall,
    f: &PseudocharacterScaled,
    oracle: &GroupOracle,
) -> Result<SlabTree> {
    let Leveled { values, unscaled, levels } = level_data(ball, f, oracle)?;
    let n = ball.vertex_count();

    // vertex spaces: union over non-crossing edges
    let mut uf = UnionFind::new(n);
    let mut crossing_edges: Vec<usize> = Vec::new();
    for (idx, &(u, _, v)) in ball.edges.iter().enumerate() {
        if levels[u as usize] == levels[v as usize] {
            uf.union(u, v);
        } else {
            crossing_edges.push(idx);
        }
    }

    // deterministic space ids, in order of first member
    let mut label_of_root: Vec<u32> = vec![u32::MAX; n];
    let mut spaces: Vec<VertexSpace> = Vec::new();
    for v in 0..n as u32 {
        let root = uf.find(v);
        if label_of_root[root as usize] == u32::MAX {
            let id = spaces.len() as u32;
            label_of_root[root as usize] = id;
            spaces.push(VertexSpace {
                id,
                level: levels[v as usize],
                members: Vec::new(),
                interior: true,
                min_abs_unscaled: unscaled[v as usize].abs(),
                max_unscaled: unscaled[v as usize],
                min_unscaled: unscaled[v as usize],
            });
        }
        let id = label_of_root[root as usize];
        let s = &mut spaces[id as usize];
        s.members.push(v);
        debug_assert_eq!(s.level, levels[v as usize], "vertex space spans one level");
        if ball.near_boundary(v) {
            s.interior = false;
        }
        let a = unscaled[v as usize].abs();
        if a < s.min_abs_unscaled {
            s.min_abs_unscaled = a;
        }
        if unscaled[v as usize] > s.max_unscaled {
            s.max_unscaled = unscaled[v as usize];
        }
        if unscaled[v as usize] < s.min_unscaled {
            s.min_unscaled = unscaled[v as usize];
        }
    }
    let space_of: Vec<u32> = (0..n as u32).map(|v| label_of_root[uf.find(v) as usize]).collect();

    // level-map bound |f(x) - fbar(pi(x))| < 1 on every member
    #[cfg(debug_assertions)]
    for v in 0..n {
        let lvl = Rat::from_integer(levels[v] as i128);
        assert!((values[v] - lvl).abs() < Rat::from_integer(1));
    }

    // tracks: union-find over crossing edges, glued through 2-cells
    let mut edge_index: HashMap<(u32, u32, Letter), usize> = HashMap::new();
    for (idx, &(u, l, v)) in ball.edges.iter().enumerate() {
        edge_index.insert((u, v, l), idx);
        edge_index.insert((v, u, l.inverted()), idx);
    }
    let mut cross_pos: HashMap<usize, u32> = HashMap::new();
    for (pos, &e) in crossing_edges.iter().enumerate() {
        cross_pos.insert(e, pos as u32);
    }
    let mut tuf = UnionFind::new(crossing_edges.len());
    for cell in &ball.two_cells {
        let verts = cell.vertices;
        let mut by_level: HashMap<i64, Vec<u32>> = HashMap::new();
        for k in 0..3 {
            let a = verts[k];
            let b = verts[(k + 1) % 3];
            let l = cell.letters[k];
            let idx = *edge_index.get(&(a, b, l)).ok_or_else(|| {
                Error::Internal("two-cell boundary edge missing from the ball".into())
            })?;
            if let Some(&pos) = cross_pos.get(&idx) {
                let (u, _, v) = ball.edges[idx];
                let below = levels[u as usize].min(levels[v as usize]);
                by_level.entry(below).or_default().push(pos);
            }
        }
        for (_, group) in by_level {
            match group.len() {
                2 => {
                    tuf.union(group[0], group[1]);
                }
                1 => {
                    return Err(Error::Internal(
                        "a two-cell has exactly one crossing at some level".into(),
                    ));
                }
                _ => {
                    return Err(Error::Internal(
                        "a two-cell has more than two crossings at one level".into(),
                    ));
                }
            }
        }
    }

    let tracks_complete_in_ball = oracle.cayley_graph_is_tree();
    let mut track_label: Vec<u32> = vec![u32::MAX; crossing_edges.len()];
    let mut tracks: Vec<Track> = Vec::new();
    for pos in 0..crossing_edges.len() as u32 {
        let root = tuf.find(pos);
        if track_label[root as usize] == u32::MAX {
            track_label[root as usize] = tracks.len() as u32;
            tracks.push(Track {
                id: tracks.len() as u32,
                below: 0,
                crossings: Vec::new(),
                sides: (u32::MAX, u32::MAX),
                interior: true,
            });
        }
        let tid = track_label[root as usize];
        let e = crossing_edges[pos as usize];
        let (u, _, v) = ball.edges[e];
        let (lo, hi) = if levels[u as usize] < levels[v as usize] { (u, v) } else { (v, u) };
        let sides = (space_of[lo as usize], space_of[hi as usize]);
        let t = &mut tracks[tid as usize];
        if t.crossings.is_empty() {
            t.below = levels[lo as usize];
            t.sides = sides;
        } else if t.sides != sides || t.below != levels[lo as usize] {
            return Err(Error::Internal("track crossings disagree on sides or level".into()));
        }
        t.crossings.push(e);
        if !tracks_complete_in_ball && (ball.near_boundary(lo) || ball.near_boundary(hi)) {
            t.interior = false;
        }
    }

    // incidence + interior acyclicity
    let mut adjacency: Vec<Vec<(u32, u32)>> = vec![Vec::new(); spaces.len()];
    for t in &tracks {
        adjacency[t.sides.0 as usize].push((t.id, t.sides.1));
        adjacency[t.sides.1 as usize].push((t.id, t.sides.0));
    }
    let mut cycle_check = UnionFind::new(spaces.len());
    for t in &tracks {
        if t.interior && !cycle_check.union(t.sides.0, t.sides.1) {
            return Err(Error::Internal(
                "interior cycle detected in the slab incidence graph; the oracle or \
                 scaling is invalid"
                    .into(),
            ));
        }
    }

    // trusted barrier range: max |unscaled f| over deep vertices
    let mut interior_radius: i64 = 0;
    for v in 0..n as u32 {
        if !ball.near_boundary(v) {
            let fl = unscaled[v as usize].abs().floor().to_integer() as i64;
            interior_radius = interior_radius.max(fl);
        }
    }

    Ok(SlabTree {
        vertex_spaces: spaces,
        tracks,
        ball_radius: ball.radius,
        interior_radius,
        space_of,
        values,
        unscaled,
        levels,
        adjacency,
    })
}

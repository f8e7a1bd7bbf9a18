//! The Farey graph on `Q ∪ {∞}` (vertices `p/q`, edges when
//! `ps − qr = ±1`), the Möbius action of `PSL(2,Z)`, orbit growth, and
//! bottleneck stability across denominator truncations.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;

use crate::bottleneck::{bottleneck_delta, BottleneckResult};
use crate::metric::MetricGraph;
use crate::{Error, Result};

/// A reduced fraction `p/q` with `q >= 0`; infinity is `1/0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FareyVertex {
    pub p: i64,
    pub q: i64,
}

impl FareyVertex {
    pub fn new(p: i64, q: i64) -> Self {
        if q == 0 {
            return FareyVertex { p: 1, q: 0 };
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        FareyVertex { p, q }
    }

    pub fn infinity() -> Self {
        FareyVertex { p: 1, q: 0 }
    }

    pub fn is_infinity(&self) -> bool {
        self.q == 0
    }

    /// Farey adjacency: `ps - qr = ±1`.
    pub fn adjacent(&self, other: &FareyVertex) -> bool {
        let det = self.p * other.q - self.q * other.p;
        det == 1 || det == -1
    }
}

impl std::fmt::Display for FareyVertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// A truncation of the Farey graph: the window `[0, 1]` plus infinity,
/// denominators up to `q_bound`.
#[derive(Debug, Clone)]
pub struct FareyGraph {
    pub q_bound: i64,
    pub vertices: Vec<FareyVertex>,
    pub edges: Vec<(u32, u32)>,
    index: HashMap<FareyVertex, u32>,
    adjacency: Vec<Vec<u32>>,
}

impl FareyGraph {
    pub fn id_of(&self, v: &FareyVertex) -> Option<u32> {
        self.index.get(v).copied()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn to_metric_graph(&self) -> Result<MetricGraph> {
        MetricGraph::unit_edges(self.vertices.len(), &self.edges)
    }

    fn distances_from(&self, from: u32) -> Vec<u64> {
        let mut dist = vec![u64::MAX; self.vertices.len()];
        dist[from as usize] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            for &w in &self.adjacency[v as usize] {
                if dist[w as usize] == u64::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }
}

/// Build the truncated Farey graph: reduced fractions in `[0, 1]` with
/// denominator at most `q_bound`, plus infinity.
pub fn farey_graph(q_bound: i64) -> Result<FareyGraph> {
    if q_bound < 1 {
        return Err(Error::Precondition("denominator bound must be at least 1".into()));
    }
    let mut vertices = vec![FareyVertex::infinity()];
    for q in 1..=q_bound {
        for p in 0..=q {
            if p.gcd(&q) == 1 {
                vertices.push(FareyVertex::new(p, q));
            }
        }
    }
    vertices.sort_unstable();
    vertices.dedup();
    let index: HashMap<FareyVertex, u32> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if vertices[i].adjacent(&vertices[j]) {
                edges.push((i as u32, j as u32));
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }
    Ok(FareyGraph { q_bound, vertices, edges, index, adjacency })
}

/// An element of `PSL(2,Z)` as an integer matrix with determinant one,
/// stored with canonical sign (first nonzero entry positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::Precondition("determinant must be one".into()));
        }
        Ok(Mat2 { a, b, c, d }.canonical())
    }

    pub fn identity() -> Self {
        Mat2 { a: 1, b: 0, c: 0, d: 1 }
    }

    /// `A = [[1,1],[0,1]]`.
    pub fn gen_a() -> Self {
        Mat2 { a: 1, b: 1, c: 0, d: 1 }
    }

    /// `B = [[1,0],[-1,1]]`.
    pub fn gen_b() -> Self {
        Mat2 { a: 1, b: 0, c: -1, d: 1 }
    }

    fn canonical(self) -> Self {
        let Mat2 { a, b, c, d } = self;
        for x in [a, b, c, d] {
            if x != 0 {
                return if x < 0 { Mat2 { a: -a, b: -b, c: -c, d: -d } } else { self };
            }
        }
        self
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }

    pub fn inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    pub fn is_identity(&self) -> bool {
        self.canonical() == Mat2::identity()
    }
}

/// Möbius action on a Farey vertex: `p/q -> (ap + bq)/(cp + dq)`.
pub fn mobius_act(m: &Mat2, v: &FareyVertex) -> FareyVertex {
    FareyVertex::new(m.a * v.p + m.b * v.q, m.c * v.p + m.d * v.q)
}

/// Smallest `n <= budget` with `M^n = ±I`, if any.
pub fn finite_order_check(m: &Mat2, budget: u32) -> Option<u32> {
    let mut acc = Mat2::identity();
    for n in 1..=budget {
        acc = acc.mul(m);
        if acc.is_identity() {
            return Some(n);
        }
    }
    None
}

/// Result of an orbit-diameter measurement inside a truncation.
#[derive(Debug, Clone)]
pub struct OrbitDiameter {
    pub word_length: usize,
    /// Orbit points that landed inside the truncation window.
    pub orbit_in_window: usize,
    /// Orbit points excluded because they left the window.
    pub escaped: usize,
    /// Max pairwise graph distance over in-window orbit points.
    pub diameter: u64,
}

/// Diameter (in the truncation's path metric) of the orbit of `base` under
/// words in `A, B` of length at most `word_length`.
pub fn orbit_diameter(
    fg: &FareyGraph,
    base: &FareyVertex,
    word_length: usize,
) -> Result<OrbitDiameter> {
    if fg.id_of(base).is_none() {
        return Err(Error::Precondition(format!("base {base} is not in the truncation")));
    }
    // all matrices of word length <= L over A, B and inverses
    let gens = [
        Mat2::gen_a(),
        Mat2::gen_a().inverse(),
        Mat2::gen_b(),
        Mat2::gen_b().inverse(),
    ];
    let mut mats: Vec<Mat2> = vec![Mat2::identity()];
    let mut seen: std::collections::HashSet<Mat2> = mats.iter().copied().collect();
    let mut frontier = mats.clone();
    for _ in 0..word_length {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                let p = m.mul(g);
                if seen.insert(p) {
                    next.push(p);
                }
            }
        }
        mats.extend(next.iter().copied());
        frontier = next;
    }

    let mut orbit_ids: Vec<u32> = Vec::new();
    let mut escaped = 0usize;
    let mut seen_pts = std::collections::HashSet::new();
    for m in &mats {
        let img = mobius_act(m, base);
        if !seen_pts.insert(img) {
            continue;
        }
        match fg.id_of(&img) {
            Some(id) => orbit_ids.push(id),
            None => escaped += 1,
        }
    }
    orbit_ids.sort_unstable();

    let mut diameter = 0u64;
    for &s in &orbit_ids {
        let dist = fg.distances_from(s);
        for &t in &orbit_ids {
            let d = dist[t as usize];
            if d == u64::MAX {
                return Err(Error::Disconnected(s as usize, t as usize));
            }
            diameter = diameter.max(d);
        }
    }
    Ok(OrbitDiameter {
        word_length,
        orbit_in_window: orbit_ids.len(),
        escaped,
        diameter,
    })
}

/// Bottleneck constants of a family of truncations, in subdivided units.
pub fn farey_bottleneck_stability(qs: &[i64]) -> Result<Vec<(i64, BottleneckResult)>> {
    let mut out = Vec::new();
    for &q in qs {
        let fg = farey_graph(q)?;
        let mg = fg.to_metric_graph()?.subdivide();
        out.push((q, bottleneck_delta(&mg, false)?));
    }
    Ok(out)
}

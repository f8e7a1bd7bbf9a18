//! The quasi-tree `X` associated to a scaled pseudocharacter: vertices are
//! pairs (group element, track), and two vertices are joined when some
//! common translate places both tracks inside one connected component of a
//! width-2 slab `f^{-1}[n - 3/2, n + 1/2]`.
//!
//! Slab components are computed once per integer level on the ambient ball;
//! track translates are exact (crossing points carry exact rational values
//! interpolated along their edges), so the edge test is a handful of
//! component-label lookups.

use std::collections::{HashMap, VecDeque};

use num_traits::Signed;

use crate::bottleneck::{bottleneck_delta, BottleneckResult};
use crate::group::{CayleyBall, GroupOracle, Word};
use crate::metric::MetricGraph;
use crate::rat::{rat, ratio, Rat};
use crate::slab::{SlabTree, UnionFind};
use crate::{Error, Result};

/// A vertex of `X`: a group element (ball vertex id) and a track id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct XVertex {
    pub group: u32,
    pub track: u32,
}

/// The finite approximation of `X` over a ball of group elements and the
/// interior tracks within `track_radius`.
#[derive(Debug)]
pub struct XGraph {
    pub vertices: Vec<XVertex>,
    pub adjacency: Vec<Vec<u32>>,
    pub g_radius: usize,
    pub h_radius: usize,
    pub track_radius: usize,
    /// Translate evaluations skipped because a translate left the ambient
    /// ball (zero when ambient >= g + h + track radius).
    pub truncation_skips: usize,
    /// Tracks selected as the `V` factor of the vertex set.
    pub track_ids: Vec<u32>,
    /// Word length of each vertex's group element.
    pub g_distance: Vec<u32>,
    index: HashMap<XVertex, u32>,
}

impl XGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn id_of(&self, v: XVertex) -> Option<u32> {
        self.index.get(&v).copied()
    }

    pub fn distances_from(&self, from: u32) -> Vec<u64> {
        let n = self.vertex_count();
        let mut dist = vec![u64::MAX; n];
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

    /// Unit-length metric graph on the same vertex set.
    pub fn to_metric_graph(&self) -> Result<MetricGraph> {
        let mut edges = Vec::new();
        for (v, row) in self.adjacency.iter().enumerate() {
            for &w in row {
                if (v as u32) < w {
                    edges.push((v as u32, w));
                }
            }
        }
        MetricGraph::unit_edges(self.vertex_count(), &edges)
    }

    /// Interior vertices: group part at least one step inside the g-ball,
    /// so every neighbor relation around them was searched in full.
    pub fn interior_vertices(&self) -> Vec<u32> {
        (0..self.vertex_count() as u32)
            .filter(|&v| (self.g_distance[v as usize] as usize) < self.g_radius.max(1))
            .collect()
    }

    /// Unit metric graph induced on the interior vertices, with the map
    /// back to X vertex ids.
    pub fn interior_metric_graph(&self) -> Result<(MetricGraph, Vec<u32>)> {
        let keep = self.interior_vertices();
        let mut back = vec![u32::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            back[v as usize] = i as u32;
        }
        let mut edges = Vec::new();
        for &v in &keep {
            for &w in &self.adjacency[v as usize] {
                if v < w && back[w as usize] != u32::MAX {
                    edges.push((back[v as usize], back[w as usize]));
                }
            }
        }
        Ok((MetricGraph::unit_edges(keep.len(), &edges)?, keep))
    }
}

/// A crossing of a track, with exact interpolation data: the crossing point
/// divides the edge `(u, v)` at parameter `t` (from `u`), where the scaled
/// value equals `below + 1/2`.
#[derive(Debug, Clone)]
struct Crossing {
    u: u32,
    v: u32,
    /// Interpolation parameter of the crossing point along `u -> v`.
    t: Rat,
}

/// Per-integer-level slab component labels over the ambient ball.
struct SlabComponents {
    labels: HashMap<i64, Vec<u32>>,
}

impl SlabComponents {
    fn build(ball: &CayleyBall, tree: &SlabTree, n_range: std::ops::RangeInclusive<i64>) -> Self {
        let mut labels = HashMap::new();
        for n in n_range {
            // vertices with value in [n - 3/2, n + 1/2]: levels n-1 and n
            let mut uf = UnionFind::new(ball.vertex_count());
            let in_slab =
                |v: u32| tree.levels[v as usize] == n - 1 || tree.levels[v as usize] == n;
            for &(u, _, v) in &ball.edges {
                if u != v && in_slab(u) && in_slab(v) {
                    uf.union(u, v);
                }
            }
            let lab: Vec<u32> = (0..ball.vertex_count() as u32)
                .map(|v| if in_slab(v) { uf.find(v) } else { u32::MAX })
                .collect();
            labels.insert(n, lab);
        }
        SlabComponents { labels }
    }

    /// Component of a vertex inside slab `n`, if it lies there.
    fn component(&self, n: i64, v: u32) -> Option<u32> {
        let lab = self.labels.get(&n)?;
        let l = lab[v as usize];
        (l != u32::MAX).then_some(l)
    }
}

/// Everything needed to test edges cheaply: the translated crossing data of
/// every (translator, track) pair in range.
pub struct XBuilder<'a> {
    pub ball: &'a CayleyBall,
    pub tree: &'a SlabTree,
    pub oracle: &'a GroupOracle,
    slabs: SlabComponents,
    /// crossings per selected track
    crossings: Vec<Vec<Crossing>>,
    /// track id -> position in `crossings`
    track_pos: HashMap<u32, usize>,
    // (position lookup exposed via `track_position`)
    /// level base (track at below + 1/2)
    below: Vec<i64>,
    /// translator ball-vertex -> per-track translated data
    translated: HashMap<u32, Vec<Option<TranslatedTrack>>>,
    pub truncation_skips: usize,
}

#[derive(Debug, Clone)]
struct TranslatedTrack {
    /// Exact values of the translated crossing points.
    point_values: Vec<Rat>,
    /// One in-slab anchor endpoint per crossing (vertex id, its value).
    anchors: Vec<u32>,
}

impl<'a> XBuilder<'a> {
    pub fn new(
        ball: &'a CayleyBall,
        tree: &'a SlabTree,
        oracle: &'a GroupOracle,
        track_ids: &[u32],
        translator_radius: usize,
    ) -> Result<Self> {
        let mut crossings = Vec::new();
        let mut track_pos = HashMap::new();
        let mut below = Vec::new();
        for &tid in track_ids {
            let tr = &tree.tracks[tid as usize];
            let target = rat(tr.below as i128) + ratio(1, 2);
            let mut cs = Vec::new();
            for &e in &tr.crossings {
                let (u, _, v) = ball.edges[e];
                let vu = &tree.values[u as usize];
                let vv = &tree.values[v as usize];
                let t = (target - vu) / (vv - vu);
                cs.push(Crossing { u, v, t });
            }
            track_pos.insert(tid, crossings.len());
            crossings.push(cs);
            below.push(tr.below);
        }

        let min_level = *tree.levels.iter().min().unwrap_or(&0);
        let max_level = *tree.levels.iter().max().unwrap_or(&0);
        let slabs = SlabComponents::build(ball, tree, (min_level - 1)..=(max_level + 2));

        let mut builder = XBuilder {
            ball,
            tree,
            oracle,
            slabs,
            crossings,
            track_pos,
            below,
            translated: HashMap::new(),
            truncation_skips: 0,
        };

        // precompute all translated tracks for translators in range
        let translators: Vec<u32> = (0..ball.vertex_count() as u32)
            .filter(|&v| ball.distance_to_identity(v) as usize <= translator_radius)
            .collect();
        for t in translators {
            let row = builder.translate_all(t)?;
            builder.translated.insert(t, row);
        }
        Ok(builder)
    }

    fn translate_all(&mut self, translator: u32) -> Result<Vec<Option<TranslatedTrack>>> {
        let tw = self.ball.word(translator).clone();
        let mut out = Vec::with_capacity(self.crossings.len());
        for cs in &self.crossings {
            let mut point_values = Vec::with_capacity(cs.len());
            let mut anchors = Vec::with_capacity(cs.len());
            let mut ok = true;
            for c in cs {
                let wu = self.oracle.reduce(&tw.concat(self.ball.word(c.u)))?;
                let wv = self.oracle.reduce(&tw.concat(self.ball.word(c.v)))?;
                let (Some(tu), Some(tv)) = (self.ball.id_of(&wu), self.ball.id_of(&wv)) else {
                    ok = false;
                    self.truncation_skips += 1;
                    break;
                };
                let vu = &self.tree.values[tu as usize];
                let vv = &self.tree.values[tv as usize];
                let val = vu + c.t * (vv - vu);
                point_values.push(val);
                anchors.push(tu);
                anchors.push(tv);
            }
            out.push(ok.then_some(TranslatedTrack { point_values, anchors }));
        }
        Ok(out)
    }

    /// Do translated tracks `h g1 (tau1)` and `h g2 (tau2)` both lie in one
    /// component of some slab `f^{-1}[n - 3/2, n + 1/2]`?
    fn joint_containment(&self, t1: u32, pos1: usize, t2: u32, pos2: usize) -> bool {
        let Some(Some(a)) = self.translated.get(&t1).map(|r| r[pos1].as_ref()) else {
            return false;
        };
        let Some(Some(b)) = self.translated.get(&t2).map(|r| r[pos2].as_ref()) else {
            return false;
        };
        let lo = a
            .point_values
            .iter()
            .chain(b.point_values.iter())
            .min()
            .cloned()
            .expect("tracks have crossings");
        let hi = a
            .point_values
            .iter()
            .chain(b.point_values.iter())
            .max()
            .cloned()
            .expect("tracks have crossings");
        // candidate integers n with [lo, hi] inside [n - 3/2, n + 1/2]
        let n_min = (hi - ratio(1, 2)).ceil().to_integer() as i64;
        let n_max = (lo + ratio(3, 2)).floor().to_integer() as i64;
        for n in n_min..=n_max {
            if self.contained_in_slab(a, n) && self.contained_in_slab(b, n) {
                if let (Some(ca), Some(cb)) = (self.anchor_component(a, n), self.anchor_component(b, n))
                {
                    if ca == cb {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn contained_in_slab(&self, t: &TranslatedTrack, n: i64) -> bool {
        let lo = rat(n as i128) - ratio(3, 2);
        let hi = rat(n as i128) + ratio(1, 2);
        t.point_values.iter().all(|v| v >= &lo && v <= &hi)
    }

    /// The common slab component of all crossing anchors, if one exists.
    fn anchor_component(&self, t: &TranslatedTrack, n: i64) -> Option<u32> {
        let mut comp: Option<u32> = None;
        for pair in t.anchors.chunks(2) {
            // at least one endpoint of each crossing edge lies in the slab
            let c = self
                .slabs
                .component(n, pair[0])
                .or_else(|| self.slabs.component(n, pair[1]))?;
            match comp {
                None => comp = Some(c),
                Some(prev) if prev == c => {}
                Some(_) => return None,
            }
            // when both endpoints are in-slab they are joined by the edge
            // itself, so either anchor gives the same component
        }
        comp
    }

    /// Position of a selected track in the builder's internal tables.
    pub fn track_position(&self, track_id: u32) -> Option<usize> {
        self.track_pos.get(&track_id).copied()
    }

    /// Translated point positions (edge endpoints and parameter), used for
    /// exact intersection tests.
    fn translated_points(&self, t: u32, pos: usize) -> Option<Vec<(u32, u32, Rat)>> {
        let row = self.translated.get(&t)?;
        let tt = row[pos].as_ref()?;
        let cs = &self.crossings[pos];
        let mut out = Vec::with_capacity(cs.len());
        for (i, c) in cs.iter().enumerate() {
            let u = tt.anchors[2 * i];
            let v = tt.anchors[2 * i + 1];
            // canonical orientation: smaller endpoint first
            if u <= v {
                out.push((u, v, c.t));
            } else {
                out.push((v, u, rat(1) - c.t));
            }
        }
        Some(out)
    }
}

/// Build `X` on `(ball(g_radius) elements) x (interior tracks within
/// track_radius)`, searching translates `h` over `ball(h_radius)`.
pub fn build_x<'a>(
    ball: &'a CayleyBall,
    tree: &'a SlabTree,
    oracle: &'a GroupOracle,
    g_radius: usize,
    h_radius: usize,
    track_radius: usize,
) -> Result<(XGraph, XBuilder<'a>)> {
    if ball.radius < g_radius + h_radius + track_radius {
        return Err(Error::Precondition(format!(
            "ambient radius {} below g + h + track = {}",
            ball.radius,
            g_radius + h_radius + track_radius
        )));
    }
    // interior tracks whose crossings stay within track_radius
    let track_ids: Vec<u32> = tree
        .tracks
        .iter()
        .filter(|t| {
            t.interior
                && t.crossings.iter().all(|&e| {
                    let (u, _, v) = ball.edges[e];
                    (ball.distance_to_identity(u) as usize).max(ball.distance_to_identity(v) as usize)
                        <= track_radius
                })
        })
        .map(|t| t.id)
        .collect();
    if track_ids.is_empty() {
        return Err(Error::Precondition("no interior tracks within the track radius".into()));
    }

    let g_ids: Vec<u32> = (0..ball.vertex_count() as u32)
        .filter(|&v| ball.distance_to_identity(v) as usize <= g_radius)
        .collect();
    let h_ids: Vec<u32> = (0..ball.vertex_count() as u32)
        .filter(|&v| ball.distance_to_identity(v) as usize <= h_radius)
        .collect();

    let builder = XBuilder::new(ball, tree, oracle, &track_ids, g_radius + h_radius)?;

    // h * g translator table
    let mut hg: HashMap<(u32, u32), u32> = HashMap::new();
    let mut skips = 0usize;
    for &h in &h_ids {
        for &g in &g_ids {
            let w = oracle.multiply(ball.word(h), ball.word(g))?;
            match ball.id_of(&w) {
                Some(t) => {
                    hg.insert((h, g), t);
                }
                None => skips += 1,
            }
        }
    }

    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    let mut g_distance = Vec::new();
    for &g in &g_ids {
        for &tid in &track_ids {
            let xv = XVertex { group: g, track: tid };
            index.insert(xv, vertices.len() as u32);
            vertices.push(xv);
            g_distance.push(ball.distance_to_identity(g));
        }
    }

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let (a, b) = (vertices[i], vertices[j]);
            let pa = builder.track_position(a.track).expect("selected track");
            let pb = builder.track_position(b.track).expect("selected track");
            // level precheck: a width-2 slab cannot hold tracks further
            // than 2 levels apart (the h-shift moves both equally, up to
            // the defect)
            let la = builder.below[pa];
            let lb = builder.below[pb];
            let shift_a = &tree.values[a.group as usize];
            let shift_b = &tree.values[b.group as usize];
            let va = rat(la as i128) + ratio(1, 2) + shift_a;
            let vb = rat(lb as i128) + ratio(1, 2) + shift_b;
            let gap = (va - vb).abs();
            if gap > rat(3) {
                continue;
            }
            let mut connected = false;
            for &h in &h_ids {
                let (Some(&ta), Some(&tb)) = (hg.get(&(h, a.group)), hg.get(&(h, b.group)))
                else {
                    continue;
                };
                if builder.joint_containment(ta, pa, tb, pb) {
                    connected = true;
                    break;
                }
            }
            if connected {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }

    let truncation_skips = skips + builder.truncation_skips;
    Ok((
        XGraph {
            vertices,
            adjacency,
            g_radius,
            h_radius,
            track_radius,
            truncation_skips,
            track_ids,
            g_distance,
            index,
        },
        builder,
    ))
}

/// Max distance from any X-vertex to the orbit of the base vertex under
/// in-ball group translations.
#[derive(Debug, Clone)]
pub struct CoboundednessReport {
    pub base: XVertex,
    pub max_gap: u64,
    pub orbit_size: usize,
    /// Vertices at gap > 1, if any.
    pub far_vertices: Vec<XVertex>,
}

pub fn verify_cobounded(x: &XGraph, ball: &CayleyBall, oracle: &GroupOracle) -> Result<CoboundednessReport> {
    let base = x.vertices[0];
    // orbit: (g * base.group, base.track) for g in the g-ball
    let mut orbit = vec![false; x.vertex_count()];
    let mut orbit_size = 0;
    for v in 0..x.vertex_count() as u32 {
        let xv = x.vertices[v as usize];
        if xv.track != base.track {
            continue;
        }
        // xv.group = g * base.group for g = xv.group * base.group^{-1};
        // every such vertex is in the orbit as long as the translation
        // stays in the ball, which it does by construction
        let g = oracle
            .multiply(ball.word(xv.group), &ball.word(base.group).inverse())?;
        if ball.id_of(&g).is_some() {
            orbit[v as usize] = true;
            orbit_size += 1;
        }
    }
    // multi-source BFS from the orbit
    let mut dist = vec![u64::MAX; x.vertex_count()];
    let mut q = VecDeque::new();
    for v in 0..x.vertex_count() {
        if orbit[v] {
            dist[v] = 0;
            q.push_back(v as u32);
        }
    }
    while let Some(v) = q.pop_front() {
        for &w in &x.adjacency[v as usize] {
            if dist[w as usize] == u64::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                q.push_back(w);
            }
        }
    }
    let mut max_gap = 0;
    let mut far = Vec::new();
    for (v, &d) in dist.iter().enumerate() {
        max_gap = max_gap.max(d);
        if d > 1 {
            far.push(x.vertices[v]);
        }
    }
    Ok(CoboundednessReport { base, max_gap, orbit_size, far_vertices: far })
}

/// Exhaustive verification of the intersection and separation lemmas.
#[derive(Debug, Clone, Default)]
pub struct SeparationReport {
    pub intersecting_pairs: usize,
    pub intersect_violations: usize,
    pub separated_triples: usize,
    pub tbottle_violations: usize,
}

pub fn verify_separation_lemmas(
    x: &XGraph,
    builder: &XBuilder<'_>,
) -> Result<SeparationReport> {
    let n = x.vertex_count();

    // translated point sets per X-vertex
    let mut points: Vec<Option<Vec<(u32, u32, Rat)>>> = Vec::with_capacity(n);
    for v in x.vertices.iter() {
        let pos = builder.track_position(v.track).expect("selected track");
        points.push(builder.translated_points(v.group, pos));
    }

    let mut report = SeparationReport::default();

    // intersection lemma: shared crossing point => distance <= 1
    for i in 0..n {
        let Some(pi) = &points[i] else { continue };
        for (j, pj) in points.iter().enumerate().skip(i + 1) {
            let Some(pj) = pj else { continue };
            let intersects = pi.iter().any(|a| pj.iter().any(|b| a == b));
            if intersects {
                report.intersecting_pairs += 1;
                if !x.adjacency[i].contains(&(j as u32)) {
                    report.intersect_violations += 1;
                }
            }
        }
    }

    // separation lemma: for each b, components of the ambient ball minus
    // b's crossing edges; any a, c on distinct sides must pass within 2
    let ball = builder.ball;
    for b in 0..n {
        let Some(pb) = &points[b] else { continue };
        // delete b's crossing edges from the ambient 1-skeleton
        let deleted: std::collections::HashSet<(u32, u32)> =
            pb.iter().map(|&(u, v, _)| (u.min(v), u.max(v))).collect();
        let mut uf = UnionFind::new(ball.vertex_count());
        for &(u, _, v) in &ball.edges {
            if u != v && !deleted.contains(&(u.min(v), u.max(v))) {
                uf.union(u, v);
            }
        }
        let side = |uf: &mut UnionFind, pts: &[(u32, u32, Rat)]| -> Option<u32> {
            let mut s: Option<u32> = None;
            for &(u, v, _) in pts {
                for anchor in [u, v] {
                    let c = uf.find(anchor);
                    match s {
                        None => s = Some(c),
                        Some(prev) if prev == c => {}
                        Some(_) => return None, // touches both sides: not separated from it
                    }
                }
            }
            s
        };
        // X-ball of radius 2 around b
        let db = x.distances_from(b as u32);
        let mut sides: Vec<Option<u32>> = vec![None; n];
        for (idx, p) in points.iter().enumerate() {
            if idx == b {
                continue;
            }
            if let Some(p) = p {
                // skip vertices whose track intersects b's (share a point)
                let intersects = points[b]
                    .as_ref()
                    .is_some_and(|pb| p.iter().any(|a| pb.iter().any(|q| q == a)));
                if !intersects {
                    sides[idx] = side(&mut uf, p);
                }
            }
        }
        // survivors of deleting the radius-2 X-ball around b
        let survive: Vec<bool> = (0..n).map(|v| db[v] > 2).collect();
        let mut comp_x = vec![u32::MAX; n];
        let mut cid = 0u32;
        for s in 0..n {
            if !survive[s] || comp_x[s] != u32::MAX {
                continue;
            }
            comp_x[s] = cid;
            let mut stack = vec![s as u32];
            while let Some(v) = stack.pop() {
                for &w in &x.adjacency[v as usize] {
                    if survive[w as usize] && comp_x[w as usize] == u32::MAX {
                        comp_x[w as usize] = cid;
                        stack.push(w);
                    }
                }
            }
            cid += 1;
        }
        for a in 0..n {
            let Some(sa) = sides[a] else { continue };
            for c in a + 1..n {
                if c == b || a == b {
                    continue;
                }
                let Some(sc) = sides[c] else { continue };
                if sa != sc {
                    report.separated_triples += 1;
                    // every path from a to c must pass within 2 of b
                    let ok = !survive[a]
                        || !survive[c]
                        || comp_x[a] == u32::MAX
                        || comp_x[c] == u32::MAX
                        || comp_x[a] != comp_x[c];
                    if !ok {
                        report.tbottle_violations += 1;
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The coarse level map on `X`: `(g, tau) -> f(g) + f(tau)` in scaled
/// units, with `f(tau)` the track's half-integer level. Exposed as a
/// diagnostic relating X's fibers to the slab tree's levels; no structural
/// claim is attached to it.
pub fn varpi_values(x: &XGraph, tree: &SlabTree) -> Vec<Rat> {
    x.vertices
        .iter()
        .map(|v| {
            let track_level = rat(tree.tracks[v.track as usize].below as i128) + ratio(1, 2);
            tree.values[v.group as usize] + track_level
        })
        .collect()
}

/// Measured bottleneck constant of `X` in unit-edge normalization (the
/// subdivided value divided by two), computed on the interior-induced
/// subgraph.
pub fn verify_x_bottleneck(x: &XGraph) -> Result<BottleneckResult> {
    let (mg, _keep) = x.interior_metric_graph()?;
    bottleneck_delta(&mg.subdivide(), false).map_err(|e| match e {
        Error::Disconnected(a, b) => Error::Precondition(format!(
            "interior X is disconnected ({a} / {b}): enlarge the radii (truncation diagnosis)"
        )),
        other => other,
    })
}

/// Gromov product `(u.v) = (d(m,u) + d(m,v) - d(u,v)) / 2` with basepoint
/// `m`, in X's unit-edge metric.
pub fn gromov_product(x: &XGraph, base: u32, u: u32, v: u32) -> Result<Rat> {
    let dm = x.distances_from(base);
    let du = x.distances_from(u);
    if dm[u as usize] == u64::MAX || dm[v as usize] == u64::MAX || du[v as usize] == u64::MAX {
        return Err(Error::Disconnected(base as usize, u as usize));
    }
    Ok(ratio(
        dm[u as usize] as i128 + dm[v as usize] as i128 - du[v as usize] as i128,
        2,
    ))
}

/// End-injectivity data: all Gromov products of two certified direction
/// track-sequences against the bound `d((1,nu),(1,omega)) + 11`.
#[derive(Debug, Clone)]
pub struct EndInjectivityReport {
    pub base_track: u32,
    pub omega_distance: u64,
    /// (i, j, product) over the two sequences.
    pub cross_products: Vec<(usize, usize, Rat)>,
    pub same_end_products_a: Vec<(usize, usize, Rat)>,
    pub same_end_products_b: Vec<(usize, usize, Rat)>,
    pub bound: Rat,
    pub cross_bound_ok: bool,
    pub divergence_ok: bool,
    /// max same-end product at the deepest index minus max cross product.
    pub gap: Rat,
}

/// Verify the injectivity bound on two certified direction sequences. The
/// sequences are slab-tree track ids whose `(1, tau)` vertices exist in X;
/// each track must separate `nu` from its successor in the slab incidence
/// tree.
pub fn verify_end_injectivity(
    x: &XGraph,
    tree: &SlabTree,
    nu: u32,
    seq_a: &[u32],
    seq_b: &[u32],
) -> Result<EndInjectivityReport> {
    if seq_a.is_empty() || seq_b.is_empty() {
        return Err(Error::Precondition("both directions need at least one track".into()));
    }
    if seq_a.iter().any(|t| seq_b.contains(t)) {
        return Err(Error::Precondition("directions must be distinct certified ends".into()));
    }
    // separation along each sequence, checked in the slab incidence graph:
    // tau_i must separate nu from tau_{i+1}
    for seq in [seq_a, seq_b] {
        for i in 0..seq.len().saturating_sub(1) {
            if !track_separates(tree, seq[i], nu, seq[i + 1]) {
                return Err(Error::Precondition(format!(
                    "track {} does not separate the basepoint from its successor",
                    seq[i]
                )));
            }
        }
    }

    let id_group = 0u32; // ball vertex 0 is the identity
    let xv = |t: u32| -> Result<u32> {
        x.id_of(XVertex { group: id_group, track: t }).ok_or_else(|| {
            Error::Precondition(format!("track {t} is not an X vertex at the identity"))
        })
    };
    let base = xv(nu)?;
    let a_ids: Vec<u32> = seq_a.iter().map(|&t| xv(t)).collect::<Result<_>>()?;
    let b_ids: Vec<u32> = seq_b.iter().map(|&t| xv(t)).collect::<Result<_>>()?;

    // omega: the closer of the two sequence heads
    let dm = x.distances_from(base);
    let omega_distance = dm[a_ids[0] as usize].min(dm[b_ids[0] as usize]);
    let bound = rat(omega_distance as i128) + rat(11);

    let mut cross = Vec::new();
    let mut cross_ok = true;
    for (i, &ua) in a_ids.iter().enumerate() {
        for (j, &ub) in b_ids.iter().enumerate() {
            let p = gromov_product(x, base, ua, ub)?;
            if p > bound {
                cross_ok = false;
            }
            cross.push((i + 1, j + 1, p));
        }
    }
    let mut same_a = Vec::new();
    let mut same_b = Vec::new();
    let mut divergence_ok = true;
    for (ids, out) in [(&a_ids, &mut same_a), (&b_ids, &mut same_b)] {
        for i in 0..ids.len() {
            for j in i..ids.len() {
                let p = gromov_product(x, base, ids[i], ids[j])?;
                // (x_i.x_j) >= d(x_i, m) - 2 for i <= j
                if p < rat(dm[ids[i] as usize] as i128) - rat(2) {
                    divergence_ok = false;
                }
                out.push((i + 1, j + 1, p));
            }
        }
    }

    // gap at the deepest index
    let deepest_same = same_a
        .iter()
        .filter(|(i, j, _)| *i == a_ids.len() || *j == a_ids.len())
        .chain(same_b.iter().filter(|(i, j, _)| *i == b_ids.len() || *j == b_ids.len()))
        .map(|(_, _, p)| *p)
        .max()
        .unwrap_or_else(|| rat(0));
    let max_cross = cross.iter().map(|(_, _, p)| *p).max().unwrap_or_else(|| rat(0));
    let gap = deepest_same - max_cross;

    Ok(EndInjectivityReport {
        base_track: nu,
        omega_distance,
        cross_products: cross,
        same_end_products_a: same_a,
        same_end_products_b: same_b,
        bound,
        cross_bound_ok: cross_ok,
        divergence_ok,
        gap,
    })
}

/// Does removing `track` separate `from_track` from `to_track` in the slab
/// incidence graph?
fn track_separates(tree: &SlabTree, track: u32, from_track: u32, to_track: u32) -> bool {
    if track == from_track || track == to_track {
        return true; // adjacent case: trivially between
    }
    // walk spaces without crossing `track`
    let n = tree.vertex_spaces.len();
    let start = tree.tracks[from_track as usize].sides.0;
    let goal_sides = tree.tracks[to_track as usize].sides;
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start as usize] = true;
    // both sides of from_track are allowed starting points
    let s1 = tree.tracks[from_track as usize].sides.1;
    if !seen[s1 as usize] {
        seen[s1 as usize] = true;
        stack.push(s1);
    }
    while let Some(s) = stack.pop() {
        for &(t, other) in &tree.adjacency[s as usize] {
            if t == track {
                continue;
            }
            if !seen[other as usize] {
                seen[other as usize] = true;
                stack.push(other);
            }
        }
    }
    !(seen[goal_sides.0 as usize] || seen[goal_sides.1 as usize])
}

/// The action graph `Y` built from a quasi-action on the line.
#[derive(Debug)]
pub struct ActionGraphY {
    pub group_sample: Vec<Word>,
    pub point_sample: Vec<Rat>,
    /// Vertices are (group index, point index).
    pub adjacency: Vec<Vec<u32>>,
    pub vertex_of: HashMap<(u32, u32), u32>,
    pub vertices: Vec<(u32, u32)>,
    /// Sampled points that the conjugacy check needed but were missing.
    pub missing_points: Vec<Rat>,
}

/// Build `Y` for a quasi-action `A` of the group on the rational line:
/// vertices `(g, x)` over the samples, an edge when some `h` in the
/// h-sample puts `A(hg, x)` and `A(hg', x')` within `2C`.
pub fn quasiaction_to_action(
    oracle: &GroupOracle,
    action: &dyn Fn(&Word, &Rat) -> Result<Rat>,
    group_sample: &[Word],
    h_sample: &[Word],
    point_sample: &[Rat],
    c: &Rat,
) -> Result<ActionGraphY> {
    let two_c = c * rat(2);
    let ng = group_sample.len() as u32;
    let np = point_sample.len() as u32;
    let mut vertices = Vec::new();
    let mut vertex_of = HashMap::new();
    for gi in 0..ng {
        for xi in 0..np {
            vertex_of.insert((gi, xi), vertices.len() as u32);
            vertices.push((gi, xi));
        }
    }
    // displaced values A(h g, x) per (h, g, x)
    let mut displaced: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(h_sample.len());
    for h in h_sample {
        let mut per_g = Vec::with_capacity(group_sample.len());
        for g in group_sample {
            let hg = oracle.multiply(h, g)?;
            let mut per_x = Vec::with_capacity(point_sample.len());
            for x in point_sample {
                per_x.push(action(&hg, x)?);
            }
            per_g.push(per_x);
        }
        displaced.push(per_g);
    }
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let (gi, xi) = vertices[i];
            let (gj, xj) = vertices[j];
            let connected = (0..h_sample.len()).any(|h| {
                let a = &displaced[h][gi as usize][xi as usize];
                let b = &displaced[h][gj as usize][xj as usize];
                (a - b).abs() < two_c
            });
            if connected {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }
    Ok(ActionGraphY {
        group_sample: group_sample.to_vec(),
        point_sample: point_sample.to_vec(),
        adjacency,
        vertex_of,
        vertices,
        missing_points: Vec::new(),
    })
}

/// Verification results for the action graph.
#[derive(Debug, Clone)]
pub struct ActionGraphReport {
    /// Pairs where the induced action was testable and preserved edges.
    pub edge_pairs_tested: usize,
    pub edge_violations: usize,
    /// Conjugacy displacement checks `d(f(A(g,x)), g f(x)) <= 1`.
    pub displacement_tested: usize,
    pub displacement_violations: usize,
    pub missing_points: Vec<Rat>,
}

/// Verify that `g0 (h, x) = (g0 h, x)` preserves edges exactly, and that
/// the conjugating map `x -> (1, x)` moves by at most one edge.
pub fn verify_action_graph(
    y: &ActionGraphY,
    oracle: &GroupOracle,
    action: &dyn Fn(&Word, &Rat) -> Result<Rat>,
) -> Result<ActionGraphReport> {
    // index normal forms of the group sample
    let mut nf_index: HashMap<Word, u32> = HashMap::new();
    for (i, g) in y.group_sample.iter().enumerate() {
        nf_index.insert(oracle.reduce(g)?, i as u32);
    }
    let identity = nf_index.get(&Word::empty()).copied();

    let mut edge_pairs_tested = 0;
    let mut edge_violations = 0;
    for g0 in &y.group_sample {
        for (i, row) in y.adjacency.iter().enumerate() {
            let (gi, xi) = y.vertices[i];
            let Some(&tgi) = nf_index.get(&oracle.multiply(g0, &y.group_sample[gi as usize])?)
            else {
                continue;
            };
            for &j in row {
                if (j as usize) < i {
                    continue;
                }
                let (gj, xj) = y.vertices[j as usize];
                let Some(&tgj) =
                    nf_index.get(&oracle.multiply(g0, &y.group_sample[gj as usize])?)
                else {
                    continue;
                };
                edge_pairs_tested += 1;
                let vi = y.vertex_of[&(tgi, xi)];
                let vj = y.vertex_of[&(tgj, xj)];
                if !y.adjacency[vi as usize].contains(&vj) {
                    edge_violations += 1;
                }
            }
        }
    }

    // conjugacy displacement
    let mut displacement_tested = 0;
    let mut displacement_violations = 0;
    let mut missing = Vec::new();
    if let Some(id_gi) = identity {
        for (gi, g) in y.group_sample.iter().enumerate() {
            for (xi, xval) in y.point_sample.iter().enumerate() {
                let image = action(g, xval)?;
                let Some(xi2) = y.point_sample.iter().position(|p| p == &image) else {
                    if !missing.contains(&image) {
                        missing.push(image);
                    }
                    continue;
                };
                displacement_tested += 1;
                let v1 = y.vertex_of[&(id_gi, xi2 as u32)];
                let v2 = y.vertex_of[&(gi as u32, xi as u32)];
                if v1 != v2 && !y.adjacency[v1 as usize].contains(&v2) {
                    displacement_violations += 1;
                }
            }
        }
    }

    Ok(ActionGraphReport {
        edge_pairs_tested,
        edge_violations,
        displacement_tested,
        displacement_violations,
        missing_points: missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::cayley_ball;
    use crate::pseudochar::{scale_normalize, Quasicharacter};
    use crate::slab::build_slab_tree;

    fn z_instance() -> (GroupOracle, CayleyBall, SlabTree) {
        let o = GroupOracle::free(1).unwrap();
        let f = Quasicharacter::homomorphism_named(&o, &[("a", rat(1))]).unwrap();
        let fs = scale_normalize(&f, &o, 4).unwrap();
        let ball = cayley_ball(&o, 10, None).unwrap();
        let tree = build_slab_tree(&ball, &fs, &o).unwrap();
        (o, ball, tree)
    }

    #[test]
    fn z_x_graph_is_connected_quasi_line() {
        let (o, ball, tree) = z_instance();
        let (x, _b) = build_x(&ball, &tree, &o, 4, 3, 3).unwrap();
        assert_eq!(x.truncation_skips, 0, "radii chosen to avoid truncation");
        // 9 group elements x 2 tracks
        assert_eq!(x.vertex_count(), 18);
        let d = x.distances_from(0);
        assert!(d.iter().all(|&v| v != u64::MAX), "connected");
        let r = verify_x_bottleneck(&x).unwrap();
        assert!(r.delta <= rat(10), "unit-edge delta {}", r.delta);
    }

    #[test]
    fn z_cobounded_within_one() {
        let (o, ball, tree) = z_instance();
        let (x, _b) = build_x(&ball, &tree, &o, 4, 3, 3).unwrap();
        let rep = verify_cobounded(&x, &ball, &o).unwrap();
        assert!(rep.max_gap <= 1, "gap {} at {:?}", rep.max_gap, rep.far_vertices);
    }

    #[test]
    fn z_separation_lemmas_hold() {
        let (o, ball, tree) = z_instance();
        let (x, b) = build_x(&ball, &tree, &o, 4, 3, 3).unwrap();
        let rep = verify_separation_lemmas(&x, &b).unwrap();
        assert_eq!(rep.intersect_violations, 0);
        assert_eq!(rep.tbottle_violations, 0);
        assert!(rep.intersecting_pairs > 0, "some translates do intersect");
    }

    #[test]
    fn gromov_product_basics() {
        let (o, ball, tree) = z_instance();
        let (x, _b) = build_x(&ball, &tree, &o, 4, 3, 3).unwrap();
        let d = x.distances_from(0);
        let u = 5u32;
        assert_eq!(gromov_product(&x, 0, u, u).unwrap(), rat(d[u as usize] as i128));
        assert_eq!(gromov_product(&x, 0, 0, u).unwrap(), rat(0));
    }

    #[test]
    fn single_track_orbit_covers_everything() {
        // a shallow slab: only the two level-half tracks; restrict to one
        // by a track radius that reaches just the positive crossing
        let o = GroupOracle::free(1).unwrap();
        let f = Quasicharacter::homomorphism_named(&o, &[("a", rat(1))]).unwrap();
        let fs = scale_normalize(&f, &o, 4).unwrap();
        let ball = cayley_ball(&o, 9, None).unwrap();
        let tree = build_slab_tree(&ball, &fs, &o).unwrap();
        let (x, _b) = build_x(&ball, &tree, &o, 3, 3, 3).unwrap();
        // both tracks at level +-1/2 are present; the orbit of the base
        // covers its whole track slice, so gaps stay at most 1
        let rep = verify_cobounded(&x, &ball, &o).unwrap();
        assert!(rep.orbit_size >= x.vertex_count() / 2);
        assert!(rep.max_gap <= 1);
    }

    #[test]
    fn end_injectivity_rejects_equal_ends() {
        let (o, ball, tree) = z_instance();
        let (x, _b) = build_x(&ball, &tree, &o, 2, 2, 6).unwrap();
        // the two tracks on the positive side: a^2--a^3 and a^7--a^8
        let find = |lo: &str| {
            let u = ball.id_of(&Word::parse(lo, o.generators()).unwrap()).unwrap();
            tree.tracks
                .iter()
                .find(|t| t.crossings.iter().any(|&e| {
                    let (a, _, b) = ball.edges[e];
                    a == u || b == u
                }))
                .unwrap()
                .id
        };
        let nu = find("a'^3");
        let pos = vec![find("a^2"), find("a^7")];
        let err = verify_end_injectivity(&x, &tree, nu, &pos, &pos).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn z_end_injectivity_cross_products_bounded() {
        let (o, ball, tree) = z_instance();
        let (x, _b) = build_x(&ball, &tree, &o, 1, 1, 8).unwrap();
        let find = |v: &str| {
            let u = ball.id_of(&Word::parse(v, o.generators()).unwrap()).unwrap();
            tree.tracks
                .iter()
                .find(|t| t.crossings.iter().any(|&e| {
                    let (a, _, b) = ball.edges[e];
                    a == u || b == u
                }))
                .unwrap()
                .id
        };
        // nu between the ends; positive direction a^inf, negative a^-inf
        let nu = find("a^2");
        let pos = vec![find("a^7")];
        let neg = vec![find("a'^3"), find("a'^8")];
        let report = verify_end_injectivity(&x, &tree, nu, &pos, &neg).unwrap();
        assert!(report.cross_bound_ok, "{:?}", report.cross_products);
        assert!(report.divergence_ok);
    }

    #[test]
    fn empty_quasiaction_sample_gives_empty_graph() {
        let o = GroupOracle::free(1).unwrap();
        let action = |_: &Word, x: &Rat| -> crate::Result<Rat> { Ok(*x) };
        let y = quasiaction_to_action(&o, &action, &[], &[], &[], &rat(1)).unwrap();
        assert!(y.vertices.is_empty());
        assert!(y.adjacency.is_empty());
    }

    #[test]
    fn varpi_tracks_slab_levels() {
        let (o, ball, tree) = z_instance();
        let (x, _b) = build_x(&ball, &tree, &o, 4, 3, 3).unwrap();
        let values = varpi_values(&x, &tree);
        assert_eq!(values.len(), x.vertex_count());
        // adjacent X vertices have coarsely close varpi values (gradient
        // bounded by the slab width plus the defect wiggle)
        for (i, row) in x.adjacency.iter().enumerate() {
            for &j in row {
                let d = (values[i] - values[j as usize]).abs();
                assert!(d <= rat(3), "varpi jump {d} across an edge");
            }
        }
    }

    #[test]
    fn quasiaction_translation_line() {
        let o = GroupOracle::free(2).unwrap();
        let f = Quasicharacter::homomorphism_named(&o, &[("a", rat(1))]).unwrap();
        let action = |g: &Word, x: &Rat| -> Result<Rat> { Ok(f.eval(g, &o)? + x) };
        let gens = o.generators().clone();
        let group_sample: Vec<Word> = ["1", "a", "a'", "b", "b'"]
            .iter()
            .map(|s| Word::parse(s, &gens).unwrap())
            .collect();
        let h_sample = group_sample.clone();
        let points: Vec<Rat> = (-5..=5).map(rat).collect();
        let y =
            quasiaction_to_action(&o, &action, &group_sample, &h_sample, &points, &rat(1))
                .unwrap();
        // quasi-line: (g, x) ~ (g', x') iff |f(g) + x - f(g') - x'| < 2
        let rep = verify_action_graph(&y, &o, &action).unwrap();
        assert_eq!(rep.edge_violations, 0, "action preserves edges exactly");
        assert_eq!(rep.displacement_violations, 0);
        assert!(rep.displacement_tested > 0);
    }
}

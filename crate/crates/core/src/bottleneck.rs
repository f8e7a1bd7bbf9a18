//! Exact bottleneck constants of finite metric graphs.
//!
//! For a pair `x, y` with an exactly realizable midpoint `m`, the bottleneck
//! radius at `m` is the smallest deletion radius `rho` (from the finite set
//! of realized distances to `m`, plus one step) such that removing the open
//! ball `B(m, rho)` separates `x` from `y`. The pair constant minimizes over
//! exact midpoints, the graph constant maximizes over pairs.

use rayon::prelude::*;

use crate::metric::{apsp, MetricGraph};
use crate::rat::Rat;
use crate::{Error, Result};

/// Result of a global bottleneck computation, in subdivided atomic units.
#[derive(Debug, Clone)]
pub struct BottleneckResult {
    pub delta_units: u64,
    pub witness_pair: (u32, u32),
    pub witness_midpoint: u32,
    /// Original-scale value of `delta_units`.
    pub delta: Rat,
    /// Optional per-pair table `(x, y, delta_units)`.
    pub per_pair: Option<Vec<(u32, u32, u64)>>,
}

fn require_subdivided(g: &MetricGraph) -> Result<()> {
    if !g.subdivided {
        return Err(Error::Precondition(
            "bottleneck computations need the subdivided graph; call subdivide() first".into(),
        ));
    }
    Ok(())
}

/// Exact midpoints of the pair under the distance matrix.
fn midpoints(dist: &[Vec<u64>], x: u32, y: u32) -> Vec<u32> {
    let dxy = dist[x as usize][y as usize];
    if !dxy.is_multiple_of(2) {
        return Vec::new();
    }
    let half = dxy / 2;
    (0..dist.len() as u32)
        .filter(|&m| dist[x as usize][m as usize] == half && dist[y as usize][m as usize] == half)
        .collect()
}

/// Largest threshold `t` such that `x` and `y` stay connected using only
/// vertices at distance `>= t` from `m` (the max-min bottleneck value over
/// all x-y paths). Computed by a descending-threshold incremental scan.
fn connectivity_threshold(g: &MetricGraph, dist_m: &[u64], x: u32, y: u32) -> u64 {
    let n = g.vertex_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        dist_m[b as usize].cmp(&dist_m[a as usize]).then(a.cmp(&b))
    });
    let mut uf = crate::slab::UnionFind::new(n);
    let mut active = vec![false; n];
    let mut i = 0;
    while i < order.len() {
        let t = dist_m[order[i] as usize];
        let mut j = i;
        while j < order.len() && dist_m[order[j] as usize] == t {
            let v = order[j];
            active[v as usize] = true;
            j += 1;
        }
        for &v in &order[i..j] {
            for &(w, _) in g.neighbors(v) {
                if active[w as usize] {
                    uf.union(v, w);
                }
            }
        }
        if active[x as usize] && active[y as usize] && uf.find(x) == uf.find(y) {
            return t;
        }
        i = j;
    }
    unreachable!("x and y are connected at threshold 0 in a connected graph")
}

/// Smallest realized distance from `m` strictly above `t`, or `t` plus one
/// step when `t` is already maximal.
fn next_realized(g: &MetricGraph, dist_m: &[u64], t: u64) -> u64 {
    let mut best: Option<u64> = None;
    for &d in dist_m {
        if d > t && best.is_none_or(|b| d < b) {
            best = Some(d);
        }
    }
    best.unwrap_or(t + g.min_step())
}

/// The bottleneck radius of the pair `(x, y)` on a subdivided graph, in
/// subdivided units: the minimum over exact midpoints `m` of the smallest
/// deletion radius separating `x` from `y`.
pub fn bottleneck_pair(g: &MetricGraph, dist: &[Vec<u64>], x: u32, y: u32) -> Result<u64> {
    require_subdivided(g)?;
    if x == y {
        return Err(Error::Precondition("bottleneck pair needs distinct vertices".into()));
    }
    let mids = midpoints(dist, x, y);
    if mids.is_empty() {
        return Err(Error::Internal(format!(
            "no exact midpoint for pair ({x}, {y}); subdivided distance is odd"
        )));
    }
    let mut best: Option<u64> = None;
    for m in mids {
        let dist_m = &dist[m as usize];
        let t = connectivity_threshold(g, dist_m, x, y);
        let rho = next_realized(g, dist_m, t);
        if best.is_none_or(|b| rho < b) {
            best = Some(rho);
        }
    }
    Ok(best.expect("at least one midpoint"))
}

/// Global bottleneck constant: the maximum of [`bottleneck_pair`] over all
/// pairs of original (pre-subdivision) vertices, whose subdivided distances
/// are even so midpoints are always realizable. Midpoints range over every
/// subdivided vertex; the witness is recorded.
pub fn bottleneck_delta(g: &MetricGraph, keep_table: bool) -> Result<BottleneckResult> {
    require_subdivided(g)?;
    let dist = apsp(g)?;
    let n = g.vertex_count();
    let n0 = g.original_vertices as u32;

    // group queries by midpoint so each midpoint is scanned once
    let mut queries_by_mid: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for x in 0..n0 {
        for y in x + 1..n0 {
            for m in midpoints(&dist, x, y) {
                queries_by_mid[m as usize].push((x, y));
            }
        }
    }

    // per-midpoint descending-threshold scan answering all of its queries
    let per_mid: Vec<Vec<((u32, u32), u64)>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let queries = &queries_by_mid[m];
            if queries.is_empty() {
                return Vec::new();
            }
            scan_midpoint(g, &dist[m], queries)
        })
        .collect();

    // min over midpoints per pair
    let mut best_for_pair: std::collections::HashMap<(u32, u32), (u64, u32)> =
        std::collections::HashMap::new();
    for (m, rows) in per_mid.iter().enumerate() {
        for &((x, y), rho) in rows {
            let entry = best_for_pair.entry((x, y)).or_insert((u64::MAX, 0));
            if rho < entry.0 {
                *entry = (rho, m as u32);
            }
        }
    }

    let mut delta_units = 0u64;
    let mut witness_pair = (0u32, 0u32);
    let mut witness_midpoint = 0u32;
    let mut table = Vec::new();
    let mut pairs: Vec<_> = best_for_pair.iter().collect();
    pairs.sort_unstable();
    for (&(x, y), &(rho, m)) in pairs {
        if keep_table {
            table.push((x, y, rho));
        }
        if rho > delta_units {
            delta_units = rho;
            witness_pair = (x, y);
            witness_midpoint = m;
        }
    }
    let delta = g.unit * Rat::from_integer(delta_units as i128);
    Ok(BottleneckResult {
        delta_units,
        witness_pair,
        witness_midpoint,
        delta,
        per_pair: keep_table.then_some(table),
    })
}

/// One midpoint scan: vertices enter by decreasing distance from the
/// midpoint; a pair's threshold is the entry level at which its endpoints
/// first share a component. Answers are mapped through [`next_realized`].
fn scan_midpoint(g: &MetricGraph, dist_m: &[u64], queries: &[(u32, u32)]) -> Vec<((u32, u32), u64)> {
    let n = g.vertex_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        dist_m[b as usize].cmp(&dist_m[a as usize]).then(a.cmp(&b))
    });
    let mut uf = crate::slab::UnionFind::new(n);
    let mut active = vec![false; n];
    let mut out = Vec::with_capacity(queries.len());

    // queries become live at threshold d(m, x) = d(m, y) = half
    let mut by_half: std::collections::HashMap<u64, Vec<(u32, u32)>> =
        std::collections::HashMap::new();
    for &(x, y) in queries {
        by_half.entry(dist_m[x as usize]).or_default().push((x, y));
    }
    let mut pending: Vec<(u32, u32)> = Vec::new();

    let mut i = 0;
    while i < order.len() {
        let t = dist_m[order[i] as usize];
        let mut j = i;
        while j < order.len() && dist_m[order[j] as usize] == t {
            active[order[j] as usize] = true;
            j += 1;
        }
        for &v in &order[i..j] {
            for &(w, _) in g.neighbors(v) {
                if active[w as usize] {
                    uf.union(v, w);
                }
            }
        }
        if let Some(new_queries) = by_half.get(&t) {
            pending.extend_from_slice(new_queries);
        }
        pending.retain(|&(x, y)| {
            if uf.find(x) == uf.find(y) {
                out.push(((x, y), next_realized(g, dist_m, t)));
                false
            } else {
                true
            }
        });
        i = j;
    }
    debug_assert!(pending.is_empty(), "all pairs connect at threshold 0");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> MetricGraph {
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i as u32, i as u32 + 1)).collect();
        MetricGraph::unit_edges(n, &edges).unwrap()
    }

    fn cycle(n: usize) -> MetricGraph {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i as u32, ((i + 1) % n) as u32)).collect();
        MetricGraph::unit_edges(n, &edges).unwrap()
    }

    #[test]
    fn requires_subdivision() {
        let g = path(3);
        assert!(bottleneck_delta(&g, false).is_err());
    }

    #[test]
    fn path_pairs_are_minimal() {
        let g = path(10).subdivide();
        let dist = apsp(&g).unwrap();
        // midpoint deletion cuts the unique geodesic: one step
        assert_eq!(bottleneck_pair(&g, &dist, 0, 9).unwrap(), 1);
        let r = bottleneck_delta(&g, false).unwrap();
        assert_eq!(r.delta_units, 1);
    }

    #[test]
    fn cycle_antipodal_matches_hand_value() {
        // C_{2n}: antipodal pairs have threshold n (subdivided), so the
        // radius is n + 1
        for n in [4u64, 6] {
            let g = cycle(2 * n as usize).subdivide();
            let dist = apsp(&g).unwrap();
            let x = 0u32;
            let y = n as u32;
            assert_eq!(dist[x as usize][y as usize], 2 * n);
            assert_eq!(bottleneck_pair(&g, &dist, x, y).unwrap(), n + 1, "C_{}", 2 * n);
        }
    }

    #[test]
    fn cycle_delta_grows_linearly() {
        let mut prev = 0;
        for n in [4u64, 6, 8] {
            let g = cycle(2 * n as usize).subdivide();
            let r = bottleneck_delta(&g, false).unwrap();
            assert_eq!(r.delta_units, n + 1);
            assert!(r.delta_units > prev);
            prev = r.delta_units;
        }
    }

    #[test]
    fn tree_delta_is_minimal() {
        // a small random-ish tree, fixed shape
        let edges: Vec<(u32, u32)> =
            vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (0, 6), (6, 7), (7, 8), (7, 9)];
        let g = MetricGraph::unit_edges(10, &edges).unwrap().subdivide();
        let r = bottleneck_delta(&g, true).unwrap();
        assert_eq!(r.delta_units, 1, "midpoints separate in a tree");
        for &(_, _, d) in r.per_pair.as_ref().unwrap() {
            assert_eq!(d, 1);
        }
    }

    #[test]
    fn witness_ball_deletion_disconnects() {
        let g = cycle(12).subdivide();
        let dist = apsp(&g).unwrap();
        let r = bottleneck_delta(&g, false).unwrap();
        let (x, y) = r.witness_pair;
        let m = r.witness_midpoint;
        // removing the open ball of radius delta about the witness midpoint
        // separates the witness pair (in the deletion-test sense: either an
        // endpoint falls inside the ball, or no surviving path joins them)
        let survive: Vec<bool> =
            (0..g.vertex_count()).map(|v| dist[m as usize][v] >= r.delta_units).collect();
        let separated = if !survive[x as usize] || !survive[y as usize] {
            true
        } else {
            let mut stack = vec![x];
            let mut seen = vec![false; g.vertex_count()];
            seen[x as usize] = true;
            while let Some(v) = stack.pop() {
                for &(w, _) in g.neighbors(v) {
                    if survive[w as usize] && !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
            !seen[y as usize]
        };
        assert!(separated, "witness deletion separates the pair");
        // and any smaller deletion radius fails to separate them
        let smaller = r.delta_units - 1;
        let survive2: Vec<bool> =
            (0..g.vertex_count()).map(|v| dist[m as usize][v] >= smaller).collect();
        assert!(survive2[x as usize] && survive2[y as usize]);
        let mut stack = vec![x];
        let mut seen = vec![false; g.vertex_count()];
        seen[x as usize] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in g.neighbors(v) {
                if survive2[w as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        assert!(seen[y as usize], "one step below delta does not separate");
        // and no midpoint of the witness pair disconnects them earlier
        for m2 in super::midpoints(&dist, x, y) {
            let survive3: Vec<bool> =
                (0..g.vertex_count()).map(|v| dist[m2 as usize][v] >= smaller).collect();
            if !survive3[x as usize] || !survive3[y as usize] {
                continue;
            }
            let mut stack = vec![x];
            let mut seen = vec![false; g.vertex_count()];
            seen[x as usize] = true;
            while let Some(v) = stack.pop() {
                for &(w, _) in g.neighbors(v) {
                    if survive3[w as usize] && !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
            assert!(seen[y as usize], "midpoint {m2} disconnects below delta");
        }
    }
}

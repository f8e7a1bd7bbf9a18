//! The constructive bottleneck-to-tree direction: grow a tree `Gamma` and a
//! map `beta` into the graph by repeatedly cutting at distance `R = 20
//! Delta` from the image so far, then measure the quasi-isometry constants
//! against the proven window
//! `8 Delta d(x,y) - 16 Delta <= d(beta x, beta y) <= 26 Delta d(x,y)`.

use std::collections::VecDeque;

use crate::bottleneck::bottleneck_delta;
use crate::metric::MetricGraph;
use crate::{Error, Result};

/// The output tree, its image map, and the constants used.
#[derive(Debug, Clone)]
pub struct TreeApprox {
    /// `beta`: tree vertex -> graph vertex. Tree vertex 0 is the basepoint.
    pub beta: Vec<u32>,
    /// Tree edges `(parent, child)` over tree vertex indices.
    pub edges: Vec<(u32, u32)>,
    /// Tree vertices created at each step (step 0 = basepoint).
    pub levels: Vec<Vec<u32>>,
    /// `R = 20 Delta`, in subdivided units.
    pub r: u64,
    /// The bottleneck constant used, in subdivided units.
    pub delta: u64,
    /// Per-edge image lengths `d(beta(v), beta(w))`.
    pub edge_image_lengths: Vec<u64>,
    /// Max over frontier points of `d(v_C, p)`, per construction step.
    pub max_frontier_spread: u64,
}

impl TreeApprox {
    pub fn vertex_count(&self) -> usize {
        self.beta.len()
    }

    /// Unit-edge tree distances from one vertex.
    pub fn tree_distances(&self, from: u32) -> Vec<u64> {
        let n = self.vertex_count();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut dist = vec![u64::MAX; n];
        dist[from as usize] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v as usize] {
                if dist[w as usize] == u64::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }
}

/// Grow the approximation tree from `basepoint` on a subdivided graph.
///
/// Each step removes the open `R`-neighborhood of the image so far, takes
/// the components of the rest, and plants one new tree vertex per component
/// at a frontier point of minimal distance (lowest vertex index on ties).
pub fn build_tree(
    g: &MetricGraph,
    basepoint: u32,
    delta_override: Option<u64>,
) -> Result<TreeApprox> {
    if !g.subdivided {
        return Err(Error::Precondition("build_tree needs the subdivided graph".into()));
    }
    if (basepoint as usize) >= g.vertex_count() {
        return Err(Error::Precondition("basepoint not in graph".into()));
    }
    let delta = match delta_override {
        Some(d) => d,
        None => bottleneck_delta(g, false)?.delta_units,
    };
    if delta == 0 {
        return Err(Error::Precondition("Delta must be positive".into()));
    }
    let r = 20 * delta;
    let step = g.min_step();

    let n = g.vertex_count();
    let mut beta: Vec<u32> = vec![basepoint];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut levels: Vec<Vec<u32>> = vec![vec![0]];
    let mut edge_image_lengths: Vec<u64> = Vec::new();
    let mut max_frontier_spread = 0u64;

    // owner[v] = tree vertex whose component of the previous step contains v
    let mut owner: Vec<u32> = vec![0; n];

    loop {
        let sources: Vec<u32> = beta.clone();
        let dist_v = g.distances_from_set(&sources);

        // components of {d >= R}
        let mut comp: Vec<u32> = vec![u32::MAX; n];
        let mut comps: Vec<Vec<u32>> = Vec::new();
        for v0 in 0..n as u32 {
            if dist_v[v0 as usize] < r || comp[v0 as usize] != u32::MAX {
                continue;
            }
            let id = comps.len() as u32;
            comp[v0 as usize] = id;
            let mut members = vec![v0];
            let mut stack = vec![v0];
            while let Some(v) = stack.pop() {
                for &(w, _) in g.neighbors(v) {
                    if dist_v[w as usize] >= r && comp[w as usize] == u32::MAX {
                        comp[w as usize] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            comps.push(members);
        }
        if comps.is_empty() {
            break;
        }

        let mut new_level = Vec::new();
        let mut next_owner = owner.clone();
        for members in &comps {
            // Front(C): points of C at minimal distance from the image
            let min_d = members.iter().map(|&v| dist_v[v as usize]).min().expect("nonempty");
            let mut front: Vec<u32> =
                members.iter().copied().filter(|&v| dist_v[v as usize] == min_d).collect();
            front.sort_unstable();
            let v_c = front[0];

            // parent: the unique earlier tree vertex owning this region
            let parent = owner[v_c as usize];
            let p_idx = beta.len() as u32;
            beta.push(v_c);
            edges.push((parent, p_idx));
            new_level.push(p_idx);

            // image length window and frontier proximity
            let from_vc = g.distances_from(v_c);
            let w = beta[parent as usize];
            let image_len = from_vc[w as usize];
            edge_image_lengths.push(image_len);
            if image_len < r || image_len > r + 6 * delta + step {
                return Err(Error::Internal(format!(
                    "edge image length {image_len} outside [{r}, {}]",
                    r + 6 * delta + step
                )));
            }
            for &p in &front {
                let d = from_vc[p as usize];
                max_frontier_spread = max_frontier_spread.max(d);
                if d > 6 * delta + step {
                    return Err(Error::Internal(format!(
                        "frontier point at distance {d} from its pick exceeds {}",
                        6 * delta + step
                    )));
                }
            }

            // everything in this component is now owned by the new vertex
            for &v in members {
                next_owner[v as usize] = p_idx;
            }
        }
        owner = next_owner;
        levels.push(new_level);
    }

    Ok(TreeApprox { beta, edges, levels, r, delta, edge_image_lengths, max_frontier_spread })
}

/// Window check report for [`verify_qi`].
#[derive(Debug, Clone)]
pub struct QiReport {
    pub pairs_checked: usize,
    pub violations: Vec<QiViolation>,
    /// Largest measured `d(beta x, beta y) / d(x, y)`.
    pub max_upper_ratio: (u64, u64),
    /// Smallest measured `(d(beta x, beta y) + 16 Delta) / d(x, y)`.
    pub min_lower_ratio: (u64, u64),
}

#[derive(Debug, Clone)]
pub struct QiViolation {
    pub x: u32,
    pub y: u32,
    pub tree_distance: u64,
    pub image_distance: u64,
    pub lower_bound: i128,
    pub upper_bound: u64,
}

/// Check the proven quasi-isometry window on all tree-vertex pairs whose
/// images lie within `interior_fraction` of the graph's radius from the
/// basepoint. Violations are reported, not fatal.
pub fn verify_qi(t: &TreeApprox, g: &MetricGraph, interior_fraction: (u64, u64)) -> Result<QiReport> {
    let base = t.beta[0];
    let from_base = g.distances_from(base);
    let ecc = *from_base.iter().max().unwrap_or(&0);
    let cutoff = ecc * interior_fraction.0 / interior_fraction.1;
    let interior: Vec<u32> = (0..t.vertex_count() as u32)
        .filter(|&x| from_base[t.beta[x as usize] as usize] <= cutoff)
        .collect();

    let delta = t.delta;
    let mut violations = Vec::new();
    let mut pairs_checked = 0usize;
    let mut max_upper: (u64, u64) = (0, 1);
    let mut min_lower: Option<(u64, u64)> = None;

    for (i, &x) in interior.iter().enumerate() {
        let tree_d = t.tree_distances(x);
        let img_d = g.distances_from(t.beta[x as usize]);
        for &y in &interior[i + 1..] {
            let dt = tree_d[y as usize];
            let di = img_d[t.beta[y as usize] as usize];
            pairs_checked += 1;
            let lower = 8i128 * delta as i128 * dt as i128 - 16 * delta as i128;
            let upper = 26 * delta * dt;
            if (di as i128) < lower || di > upper {
                violations.push(QiViolation {
                    x,
                    y,
                    tree_distance: dt,
                    image_distance: di,
                    lower_bound: lower,
                    upper_bound: upper,
                });
            }
            if dt > 0 {
                if (di as u128) * (max_upper.1 as u128) > (max_upper.0 as u128) * (dt as u128) {
                    max_upper = (di, dt);
                }
                let cand = (di + 16 * delta, dt);
                let better = match min_lower {
                    None => true,
                    Some((n, d)) => (cand.0 as u128) * (d as u128) < (n as u128) * (cand.1 as u128),
                };
                if better {
                    min_lower = Some(cand);
                }
            }
        }
    }
    Ok(QiReport {
        pairs_checked,
        violations,
        max_upper_ratio: max_upper,
        min_lower_ratio: min_lower.unwrap_or((0, 1)),
    })
}

/// Max distance from any graph vertex to the image of the tree's vertices,
/// and whether it clears the coarse-surjectivity bound `R + 7 Delta` (with
/// one discrete step of slack).
pub fn coarse_surjectivity_check(t: &TreeApprox, g: &MetricGraph) -> (u64, bool) {
    let dist = g.distances_from_set(&t.beta);
    let max = *dist.iter().max().unwrap_or(&0);
    let bound = t.r + 7 * t.delta + g.min_step();
    (max, max < bound)
}

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::oracle::GroupOracle;
use super::presentation::Presentation;
use super::word::{Letter, Word};
use crate::{Error, Result};

/// One triangular 2-cell of the presentation complex: the three directed
/// boundary edges `(v0 --l1--> v1 --l2--> v2 --l3--> v0)` plus the index of
/// the relator it traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCell {
    pub vertices: [u32; 3],
    pub letters: [Letter; 3],
    pub relator: usize,
}

/// The radius-`r` ball in a Cayley graph, with optional 2-cells from a
/// triangular presentation.
///
/// Vertices are the normal forms of words of length at most `radius`;
/// vertex 0 is the identity. Each undirected edge is listed once.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    pub radius: usize,
    pub vertices: Vec<Word>,
    pub distance: Vec<u32>,
    pub edges: Vec<(u32, Letter, u32)>,
    pub two_cells: Vec<TwoCell>,
    index: HashMap<Word, u32>,
    adjacency: Vec<Vec<(u32, Letter)>>,
}

impl CayleyBall {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn id_of(&self, w: &Word) -> Option<u32> {
        self.index.get(w).copied()
    }

    pub fn word(&self, id: u32) -> &Word {
        &self.vertices[id as usize]
    }

    /// Neighbors of `v` with the letter labeling the traversal.
    pub fn neighbors(&self, v: u32) -> &[(u32, Letter)] {
        &self.adjacency[v as usize]
    }

    /// Graph distance from the identity (word length in this generating set).
    pub fn distance_to_identity(&self, v: u32) -> u32 {
        self.distance[v as usize]
    }

    /// Vertices at distance at least `radius - 1` from the identity, i.e.
    /// within graph distance 1 of the boundary sphere.
    pub fn near_boundary(&self, v: u32) -> bool {
        self.distance[v as usize] + 1 >= self.radius as u32
    }
}

/// Generate the radius-`r` Cayley ball of the oracle's group.
///
/// When a triangular presentation over the same generating set is supplied,
/// every relator triangle with all three corners inside the ball is
/// included as a 2-cell. Relators must be trivial in the oracle's group.
pub fn cayley_ball(
    oracle: &GroupOracle,
    radius: usize,
    presentation: Option<&Presentation>,
) -> Result<CayleyBall> {
    if let Some(p) = presentation {
        if !p.is_triangular() {
            return Err(Error::Precondition("presentation must be triangular".into()));
        }
        if p.generators != *oracle.generators() {
            return Err(Error::Precondition(
                "presentation and oracle generating sets differ".into(),
            ));
        }
        for r in &p.relators {
            if !oracle.reduce(r)?.is_empty() {
                return Err(Error::Precondition(format!(
                    "relator {} is not trivial in the oracle group",
                    r.display(oracle.generators())
                )));
            }
        }
    }

    let rank = oracle.generators().rank();
    let mut vertices: Vec<Word> = vec![Word::empty()];
    let mut distance: Vec<u32> = vec![0];
    let mut index: HashMap<Word, u32> = HashMap::new();
    index.insert(Word::empty(), 0);
    let mut queue: VecDeque<u32> = VecDeque::from([0u32]);

    // BFS over right multiplication by every generator and inverse.
    while let Some(v) = queue.pop_front() {
        let d = distance[v as usize];
        if d as usize >= radius {
            continue;
        }
        let base = vertices[v as usize].clone();
        for g in 0..rank {
            for inverse in [false, true] {
                let l = Letter::new(g, inverse);
                let next = oracle.reduce(&base.concat(&Word(vec![l])))?;
                if !index.contains_key(&next) {
                    let id = vertices.len() as u32;
                    index.insert(next.clone(), id);
                    vertices.push(next);
                    distance.push(d + 1);
                    queue.push_back(id);
                }
            }
        }
    }

    // Edge pass: one record per undirected edge.
    let mut edges: Vec<(u32, Letter, u32)> = Vec::new();
    let mut adjacency: Vec<Vec<(u32, Letter)>> = vec![Vec::new(); vertices.len()];
    for v in 0..vertices.len() as u32 {
        let base = vertices[v as usize].clone();
        for g in 0..rank {
            for inverse in [false, true] {
                let l = Letter::new(g, inverse);
                let next = oracle.reduce(&base.concat(&Word(vec![l])))?;
                if let Some(&t) = index.get(&next) {
                    adjacency[v as usize].push((t, l));
                    let keep = v < t || (v == t && !inverse);
                    if keep {
                        edges.push((v, l, t));
                    }
                }
            }
        }
    }

    // 2-cells from the presentation.
    type CellKey = ([u32; 3], [(u16, bool); 3]);
    let mut two_cells = Vec::new();
    if let Some(p) = presentation {
        let mut seen: BTreeSet<CellKey> = BTreeSet::new();
        for (ri, r) in p.relators.iter().enumerate() {
            let [l1, l2, l3] = [r.letters()[0], r.letters()[1], r.letters()[2]];
            for v0 in 0..vertices.len() as u32 {
                let w0 = &vertices[v0 as usize];
                let w1 = oracle.reduce(&w0.concat(&Word(vec![l1])))?;
                let Some(&v1) = index.get(&w1) else { continue };
                let w2 = oracle.reduce(&w1.concat(&Word(vec![l2])))?;
                let Some(&v2) = index.get(&w2) else { continue };
                let mut corner_key = [v0, v1, v2];
                corner_key.sort_unstable();
                let mut letter_key = [
                    (l1.gen, l1.inverse),
                    (l2.gen, l2.inverse),
                    (l3.gen, l3.inverse),
                ];
                letter_key.sort_unstable();
                // undirected letter labels, so a relator and its inverse
                // trace the same cell
                let mut undirected = letter_key.map(|(g, _)| (g, false));
                undirected.sort_unstable();
                if seen.insert((corner_key, undirected)) {
                    two_cells.push(TwoCell {
                        vertices: [v0, v1, v2],
                        letters: [l1, l2, l3],
                        relator: ri,
                    });
                }
            }
        }
    }

    Ok(CayleyBall { radius, vertices, distance, edges, two_cells, index, adjacency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{triangularize, GeneratorSet};

    #[test]
    fn radius_zero_is_one_vertex() {
        let o = GroupOracle::free(2).unwrap();
        let b = cayley_ball(&o, 0, None).unwrap();
        assert_eq!(b.vertex_count(), 1);
        assert_eq!(b.edges.len(), 0);
    }

    #[test]
    fn z2_radius_one() {
        let o = GroupOracle::free_abelian(2).unwrap();
        let b = cayley_ball(&o, 1, None).unwrap();
        assert_eq!(b.vertex_count(), 5);
        assert_eq!(b.edges.len(), 4);
    }

    #[test]
    fn f2_sphere_sizes() {
        let o = GroupOracle::free(2).unwrap();
        let b = cayley_ball(&o, 2, None).unwrap();
        // 1 + 4 + 12
        assert_eq!(b.vertex_count(), 17);
        let b3 = cayley_ball(&o, 3, None).unwrap();
        assert_eq!(b3.vertex_count(), 53);
    }

    #[test]
    fn ball_counts_monotone_and_closed_forms() {
        let f2 = GroupOracle::free(2).unwrap();
        let mut prev = 0;
        for r in 0..5 {
            let b = cayley_ball(&f2, r, None).unwrap();
            let expect = if r == 0 { 1 } else { 1 + (4 * (3usize.pow(r as u32) - 1) / 2) };
            assert_eq!(b.vertex_count(), expect, "F2 ball {r}");
            assert!(b.vertex_count() >= prev);
            prev = b.vertex_count();
        }
        let f3 = GroupOracle::free(3).unwrap();
        for r in 0..4usize {
            let b = cayley_ball(&f3, r, None).unwrap();
            // sphere sizes 6 * 5^(k-1)
            let expect = if r == 0 { 1 } else { 1 + 6 * (5usize.pow(r as u32) - 1) / 4 };
            assert_eq!(b.vertex_count(), expect, "F3 ball {r}");
        }
        let z2 = GroupOracle::free_abelian(2).unwrap();
        for r in 0..6usize {
            let b = cayley_ball(&z2, r, None).unwrap();
            // |B_r| in Z^2 with standard generators: 2r^2 + 2r + 1
            assert_eq!(b.vertex_count(), 2 * r * r + 2 * r + 1, "Z2 ball {r}");
        }
        let z3 = GroupOracle::free_abelian(3).unwrap();
        for r in 0..5usize {
            let b = cayley_ball(&z3, r, None).unwrap();
            // independent count of lattice points with |x|+|y|+|z| <= r
            let mut count = 0usize;
            let ri = r as i64;
            for x in -ri..=ri {
                for y in -ri..=ri {
                    for z in -ri..=ri {
                        if x.abs() + y.abs() + z.abs() <= ri {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(b.vertex_count(), count, "Z3 ball {r}");
        }
    }

    #[test]
    fn two_cells_trace_relators() {
        // Z^2 with the diagonal generator and its two triangles
        let o = GroupOracle::free_abelian_named(
            vec!["a".into(), "b".into()],
            vec![("x".into(), "a b".into())],
        )
        .unwrap();
        let g = o.generators().clone();
        let p = Presentation::new(
            GeneratorSet::new(g.names().to_vec()).unwrap(),
            vec![Word::parse("x' a b", &g).unwrap(), Word::parse("x' b a", &g).unwrap()],
        )
        .unwrap();
        let b = cayley_ball(&o, 2, Some(&p)).unwrap();
        assert!(!b.two_cells.is_empty());
        for cell in &b.two_cells {
            // boundary closes up
            let w0 = b.word(cell.vertices[0]).clone();
            let mut w = w0.clone();
            for l in cell.letters {
                w = o.reduce(&w.concat(&Word(vec![l]))).unwrap();
            }
            assert_eq!(w, w0);
            // and traces the stated relator
            let r = &p.relators[cell.relator];
            assert_eq!(Word(cell.letters.to_vec()), r.clone());
        }
    }

    #[test]
    fn triangularized_presentation_builds_cells() {
        let g = GeneratorSet::new(vec!["a", "b"]).unwrap();
        let r = Word::parse("a b a' b'", &g).unwrap();
        let p = Presentation::new(g, vec![r]).unwrap();
        let t = triangularize(&p);
        assert!(t.presentation.is_triangular());
        let defs: Vec<(String, String)> = t
            .definitions
            .iter()
            .map(|(n, w)| (n.clone(), w.display(&p.generators)))
            .collect();
        let o = GroupOracle::free_abelian_named(vec!["a".into(), "b".into()], defs).unwrap();
        let b = cayley_ball(&o, 2, Some(&t.presentation)).unwrap();
        assert!(!b.two_cells.is_empty());
    }
}

//! Finite-radius certificates about the ends of a group relative to a
//! pseudocharacter: sign computation, the uniform/unipotent/bushy
//! trichotomy, constructive separated triples, ping-pong pairs, and the
//! attracting/repelling dynamics of translations.
//!
//! All barrier radii are in *unscaled* f units. Counts are lower-bound
//! certificates: distinct components at one radius may merge at a larger
//! one, never the reverse, so "bushy" is certified while "uniform" and
//! "unipotent" are only ever reported as consistent with the data.

use num_traits::Signed;

use crate::group::{CayleyBall, GroupOracle, Word};
use crate::pseudochar::{defect_estimate, PseudocharacterScaled, Quasicharacter};
use crate::rat::{rat, sign as rat_sign, Rat};
use crate::slab::SlabTree;
use crate::{Error, Result};

/// One direction certificate: a complement component of the barrier slab
/// reaching past the witness threshold.
#[derive(Debug, Clone)]
pub struct EndDirection {
    pub sign: i32,
    /// Index into the component list of the classification run.
    pub witness_component: usize,
    pub witness_vertex: u32,
    pub witness_word: Word,
    /// Unscaled f at the witness vertex.
    pub witness_value: Rat,
    /// The barrier radius used.
    pub radius: i64,
}

/// Counts at a single barrier radius.
#[derive(Debug, Clone)]
pub struct EndsCounts {
    pub radius: i64,
    pub positive: usize,
    pub negative: usize,
    pub positive_directions: Vec<EndDirection>,
    pub negative_directions: Vec<EndDirection>,
    /// Vertex space -> component id (usize::MAX for barrier spaces).
    pub component_of_space: Vec<usize>,
    /// Spaces absorbed into the barrier B.
    pub barrier_spaces: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Certified: at least two directions on each side at every tested
    /// radius, with at least two radii tested.
    Bushy,
    ConsistentWithUniform,
    ConsistentWithUnipotent,
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Bushy => "bushy",
            Classification::ConsistentWithUniform => "consistent-with-uniform",
            Classification::ConsistentWithUnipotent => "consistent-with-unipotent",
            Classification::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Report over a set of tested radii.
#[derive(Debug, Clone)]
pub struct EndsReport {
    /// Smallest positive count over the tested radii.
    pub positive_count: usize,
    /// Smallest negative count over the tested radii.
    pub negative_count: usize,
    pub classification: Classification,
    pub radii_tested: Vec<i64>,
    pub per_radius: Vec<EndsCounts>,
}

/// Sign of `f(g)` in {-1, 0, +1}; the sign of the periodic ray `g^inf`.
pub fn sign_of(f: &Quasicharacter, g: &Word, oracle: &GroupOracle) -> Result<i32> {
    Ok(rat_sign(&f.eval(g, oracle)?))
}

/// Component counts of the slab tree minus the barrier
/// `B = flood of vertex spaces meeting f^{-1}[-R, R] from the identity`.
///
/// A complement component counts positive (negative) when it contains a
/// vertex with unscaled `f >= R + 2` (`<= -R - 2`).
pub fn classify_ends(tree: &SlabTree, ball: &CayleyBall, radius: i64) -> Result<EndsCounts> {
    if radius < 0 {
        return Err(Error::Precondition("barrier radius must be nonnegative".into()));
    }
    if tree.interior_radius <= radius + 2 {
        return Err(Error::Precondition(format!(
            "slab tree interior radius {} must exceed barrier {} + 2; enlarge the ball",
            tree.interior_radius, radius
        )));
    }
    let r = rat(radius as i128);
    let witness_level = rat((radius + 2) as i128);
    let n_spaces = tree.vertex_spaces.len();

    // barrier flood from the identity's space through qualifying spaces
    let qualifies = |s: u32| tree.vertex_spaces[s as usize].min_abs_unscaled <= r;
    let mut in_barrier = vec![false; n_spaces];
    let start = tree.identity_space();
    if !qualifies(start) {
        return Err(Error::Internal("identity space misses its own barrier".into()));
    }
    let mut stack = vec![start];
    in_barrier[start as usize] = true;
    while let Some(s) = stack.pop() {
        for &(_, other) in &tree.adjacency[s as usize] {
            if !in_barrier[other as usize] && qualifies(other) {
                in_barrier[other as usize] = true;
                stack.push(other);
            }
        }
    }
    let barrier_spaces: Vec<u32> =
        (0..n_spaces as u32).filter(|&s| in_barrier[s as usize]).collect();

    // complement components, deterministic by smallest space id
    let mut component_of_space = vec![usize::MAX; n_spaces];
    let mut components: Vec<Vec<u32>> = Vec::new();
    for s0 in 0..n_spaces as u32 {
        if in_barrier[s0 as usize] || component_of_space[s0 as usize] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = Vec::new();
        let mut stack = vec![s0];
        component_of_space[s0 as usize] = id;
        while let Some(s) = stack.pop() {
            members.push(s);
            for &(_, other) in &tree.adjacency[s as usize] {
                if !in_barrier[other as usize] && component_of_space[other as usize] == usize::MAX {
                    component_of_space[other as usize] = id;
                    stack.push(other);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    // witnesses per component
    let mut positive_directions = Vec::new();
    let mut negative_directions = Vec::new();
    let neg_level = -witness_level;
    for (cid, members) in components.iter().enumerate() {
        let mut best_pos: Option<(Rat, u32)> = None;
        let mut best_neg: Option<(Rat, u32)> = None;
        for &s in members {
            for &v in &tree.vertex_spaces[s as usize].members {
                let val = &tree.unscaled[v as usize];
                if val >= &witness_level
                    && best_pos.as_ref().is_none_or(|(b, bv)| val > b || (val == b && v < *bv))
                {
                    best_pos = Some((*val, v));
                }
                if val <= &neg_level
                    && best_neg.as_ref().is_none_or(|(b, bv)| val < b || (val == b && v < *bv))
                {
                    best_neg = Some((*val, v));
                }
            }
        }
        if let Some((val, v)) = best_pos {
            positive_directions.push(EndDirection {
                sign: 1,
                witness_component: cid,
                witness_vertex: v,
                witness_word: ball.word(v).clone(),
                witness_value: val,
                radius,
            });
        }
        if let Some((val, v)) = best_neg {
            negative_directions.push(EndDirection {
                sign: -1,
                witness_component: cid,
                witness_vertex: v,
                witness_word: ball.word(v).clone(),
                witness_value: val,
                radius,
            });
        }
    }

    Ok(EndsCounts {
        radius,
        positive: positive_directions.len(),
        negative: negative_directions.len(),
        positive_directions,
        negative_directions,
        component_of_space,
        barrier_spaces,
    })
}

/// Run [`classify_ends`] over several radii and classify per the
/// trichotomy. Bushy is certified only by counts at least (2, 2) at every
/// tested radius, two radii minimum.
pub fn classify_ends_report(
    tree: &SlabTree,
    ball: &CayleyBall,
    radii: &[i64],
) -> Result<EndsReport> {
    if radii.is_empty() {
        return Err(Error::Precondition("at least one barrier radius required".into()));
    }
    let per_radius: Vec<EndsCounts> =
        radii.iter().map(|&r| classify_ends(tree, ball, r)).collect::<Result<_>>()?;
    let positive_count = per_radius.iter().map(|c| c.positive).min().unwrap_or(0);
    let negative_count = per_radius.iter().map(|c| c.negative).min().unwrap_or(0);
    let bushy = per_radius.len() >= 2
        && per_radius.iter().all(|c| c.positive >= 2 && c.negative >= 2);
    let uniform = per_radius.iter().all(|c| c.positive == 1 && c.negative == 1);
    let unipotent = per_radius.iter().all(|c| {
        (c.positive == 1 && c.negative >= 2) || (c.positive >= 2 && c.negative == 1)
    });
    let classification = if bushy {
        Classification::Bushy
    } else if uniform {
        Classification::ConsistentWithUniform
    } else if unipotent {
        Classification::ConsistentWithUnipotent
    } else {
        Classification::Inconclusive
    };
    Ok(EndsReport {
        positive_count,
        negative_count,
        classification,
        radii_tested: radii.to_vec(),
        per_radius,
    })
}

/// All ball elements whose value strictly exceeds the measured defect.
pub fn unambiguously_positive(
    f: &Quasicharacter,
    oracle: &GroupOracle,
    search_radius: usize,
) -> Result<Vec<Word>> {
    let defect = defect_estimate(f, oracle, search_radius)?;
    let ball = crate::group::cayley_ball(oracle, search_radius, None)?;
    let mut out = Vec::new();
    for w in &ball.vertices {
        if f.eval_reduced(w, oracle)? > defect {
            out.push(w.clone());
        }
    }
    Ok(out)
}

/// The constructive triple behind the free-subgroup theorem.
#[derive(Debug, Clone)]
pub struct SeparatedTriple {
    pub g1: Word,
    pub g2: Word,
    pub g3: Word,
    /// The power N used, strictly above `99 R / (f(g1) - defect)`.
    pub n_power: i64,
    /// First element beyond the barrier on the second positive direction.
    pub h_positive: Word,
    /// First element beyond the barrier on the second negative direction.
    pub h_negative: Word,
    pub radius: i64,
    /// Unscaled values of g1, g2, g3.
    pub values: [Rat; 3],
}

/// Locate the direction of the ray `w^inf` at barrier `counts`: the
/// complement component containing the last in-ball prefix of the ray past
/// the witness threshold. `sign` selects the positive or negative end.
fn locate_ray_component(
    tree: &SlabTree,
    ball: &CayleyBall,
    oracle: &GroupOracle,
    counts: &EndsCounts,
    w: &Word,
    sign: i32,
) -> Result<usize> {
    let threshold = rat((counts.radius + 2) as i128);
    let mut current = Word::empty();
    let mut found: Option<usize> = None;
    'outer: loop {
        for l in w.letters() {
            current = oracle.reduce(&current.concat(&Word(vec![*l])))?;
            let Some(v) = ball.id_of(&current) else { break 'outer };
            let val = &tree.unscaled[v as usize];
            let deep = if sign >= 0 { val >= &threshold } else { -val >= threshold };
            if deep {
                let comp = counts.component_of_space[tree.space_of[v as usize] as usize];
                if comp != usize::MAX {
                    found = Some(comp);
                }
            }
        }
        if current.is_empty() {
            // periodic ray returned to the identity; w has finite order
            break;
        }
        if current.len() + w.len() > ball.radius {
            break;
        }
    }
    found.ok_or_else(|| {
        Error::Resource(format!(
            "ray of {} never passes the witness threshold inside the ball; a radius of \
             about {} is needed",
            w.display(oracle.generators()),
            (counts.radius + 3) * 2
        ))
    })
}

/// Produce `g1, g2, g3` with `[g1^inf] != [g2^inf]`,
/// `[g1^-inf] != [g3^-inf]`, and all values positive, following the
/// barrier construction: `g2 = h g1^N` with `N > 99 R / (f(g1) - defect)`.
pub fn separated_triple(
    f: &PseudocharacterScaled,
    oracle: &GroupOracle,
    tree: &SlabTree,
    ball: &CayleyBall,
    radius: i64,
    defect: &Rat,
) -> Result<SeparatedTriple> {
    let counts = classify_ends(tree, ball, radius)?;
    if counts.positive < 2 || counts.negative < 2 {
        return Err(Error::Precondition(format!(
            "no bushy certificate at barrier {radius}: counts ({}, {})",
            counts.positive, counts.negative
        )));
    }

    // g1: an unambiguously positive generator, or the shortest
    // unambiguously positive ball element if no generator qualifies
    // (equivalent to augmenting the generating set by that element)
    let mut g1: Option<Word> = None;
    for g in 0..oracle.generators().rank() {
        let w = Word::letter(g, false);
        if &f.base.eval(&w, oracle)? > defect {
            g1 = Some(w);
            break;
        }
    }
    if g1.is_none() {
        for w in &ball.vertices {
            if &f.base.eval_reduced(w, oracle)? > defect {
                g1 = Some(w.clone());
                break;
            }
        }
    }
    let g1 = g1.ok_or_else(|| {
        Error::Precondition("no unambiguously positive element in the ball".into())
    })?;
    let f_g1 = f.base.eval(&g1, oracle)?;

    let comp_pos_g1 = locate_ray_component(tree, ball, oracle, &counts, &g1, 1)?;
    let comp_neg_g1 = locate_ray_component(tree, ball, oracle, &counts, &g1.inverse(), -1)?;

    // first element beyond the barrier on a second positive direction:
    // the shortest vertex of another positive component with f > R
    let r_rat = rat(radius as i128);
    let pick_h = |want_positive: bool, avoid: usize| -> Result<Word> {
        let dirs =
            if want_positive { &counts.positive_directions } else { &counts.negative_directions };
        let mut best: Option<(u32, u32)> = None; // (word length, vertex)
        for d in dirs {
            if d.witness_component == avoid {
                continue;
            }
            for (s, &c) in counts.component_of_space.iter().enumerate() {
                if c != d.witness_component {
                    continue;
                }
                for &v in &tree.vertex_spaces[s].members {
                    let val = &tree.unscaled[v as usize];
                    let beyond =
                        if want_positive { val > &r_rat } else { val < &(-r_rat) };
                    if beyond {
                        let len = ball.distance_to_identity(v);
                        if best.is_none_or(|(bl, bv)| len < bl || (len == bl && v < bv)) {
                            best = Some((len, v));
                        }
                    }
                }
            }
            if best.is_some() {
                break; // directions are ordered; take the first other one
            }
        }
        best.map(|(_, v)| ball.word(v).clone()).ok_or_else(|| {
            Error::Resource("no second direction element found beyond the barrier".into())
        })
    };

    let h_pos = pick_h(true, comp_pos_g1)?;
    let h_neg = pick_h(false, comp_neg_g1)?;

    // N > 99 R / (f(g1) - defect)
    let denom = f_g1 - defect;
    if denom <= Rat::from_integer(0) {
        return Err(Error::Precondition("g1 is not unambiguously positive".into()));
    }
    let bound = rat(99 * radius.max(1) as i128) / denom;
    let n_power = (bound.floor().to_integer() as i64) + 1;

    let g2 = oracle.reduce(&h_pos.concat(&g1.pow(n_power)))?;
    let g3_bar = oracle.reduce(&h_neg.concat(&g1.inverse().pow(n_power)))?;
    let g3 = oracle.reduce(&g3_bar.inverse())?;

    // re-run the component separation for the new rays
    let comp_pos_g2 = locate_ray_component(tree, ball, oracle, &counts, &g2, 1)?;
    if comp_pos_g2 == comp_pos_g1 {
        return Err(Error::Internal("g2 ray not separated from g1 ray".into()));
    }
    let comp_neg_g3 = locate_ray_component(tree, ball, oracle, &counts, &g3.inverse(), -1)?;
    if comp_neg_g3 == comp_neg_g1 {
        return Err(Error::Internal("g3 ray not separated from g1 ray".into()));
    }

    let values = [
        f.base.eval(&g1, oracle)?,
        f.base.eval(&g2, oracle)?,
        f.base.eval(&g3, oracle)?,
    ];
    if values.iter().any(|v| !v.is_positive()) {
        return Err(Error::Internal("triple values must be positive".into()));
    }

    Ok(SeparatedTriple {
        g1,
        g2,
        g3,
        n_power,
        h_positive: h_pos,
        h_negative: h_neg,
        radius,
        values,
    })
}

/// A verified ping-pong candidate pair with its exhaustive no-relation
/// certificate.
#[derive(Debug, Clone)]
pub struct PingpongPair {
    pub g: Word,
    pub g_prime: Word,
    /// The power k applied to both elements before the relation check.
    pub power: i64,
    /// Number of nonempty reduced words checked (all were nontrivial).
    pub words_checked: usize,
    /// The four ray components (g+, g-, g'+, g'-).
    pub components: [usize; 4],
}

/// From a separated triple, pick a pair with disjoint approximate fixed
/// sets and certify freeness up to the given syllable length by exhaustive
/// oracle reduction.
pub fn pingpong_pair(
    oracle: &GroupOracle,
    tree: &SlabTree,
    ball: &CayleyBall,
    triple: &SeparatedTriple,
    test_syllables: usize,
) -> Result<PingpongPair> {
    let counts = classify_ends(tree, ball, triple.radius)?;
    let g2g3 = oracle.reduce(&triple.g2.concat(&triple.g3))?;
    let candidates: Vec<(Word, Word)> = vec![
        (triple.g1.clone(), g2g3),
        (triple.g1.clone(), triple.g2.clone()),
        (triple.g1.clone(), triple.g3.clone()),
        (triple.g2.clone(), triple.g3.clone()),
    ];

    for (g, gp) in candidates {
        let located: Result<Vec<usize>> = [
            (g.clone(), 1),
            (g.inverse(), -1),
            (gp.clone(), 1),
            (gp.inverse(), -1),
        ]
        .into_iter()
        .map(|(w, s)| locate_ray_component(tree, ball, oracle, &counts, &w, s))
        .collect();
        let Ok(dirs) = located else { continue };
        let fixed_g = [dirs[0], dirs[1]];
        let fixed_gp = [dirs[2], dirs[3]];
        if fixed_g.iter().any(|c| fixed_gp.contains(c)) {
            continue;
        }
        // disjoint fixed sets: certify by exhaustive reduction
        let mut power = 1i64;
        loop {
            match relation_search(oracle, &g, &gp, power, test_syllables)? {
                None => {
                    return Ok(PingpongPair {
                        g,
                        g_prime: gp,
                        power,
                        words_checked: count_reduced_words(test_syllables),
                        components: [dirs[0], dirs[1], dirs[2], dirs[3]],
                    });
                }
                Some(_) if power < 8 => power *= 2,
                Some(relation) => {
                    return Err(Error::Resource(format!(
                        "relation {} found at power {power}; the ball or power budget is \
                         too small to certify this pair",
                        relation.display(oracle.generators())
                    )));
                }
            }
        }
    }
    Err(Error::Precondition("no candidate pair had disjoint fixed sets".into()))
}

fn count_reduced_words(syllables: usize) -> usize {
    // 4 * 3^(L-1) words of syllable length L
    (1..=syllables).map(|l| 4 * 3usize.pow(l as u32 - 1)).sum()
}

/// Exhaustive freeness certificate for a hand-supplied pair: reduce every
/// nonempty reduced word in `g^{±k}, g'^{±k}` up to the syllable budget and
/// return the offending relation, if any.
pub fn certify_free_pair(
    oracle: &GroupOracle,
    g: &Word,
    g_prime: &Word,
    power: i64,
    max_syllables: usize,
) -> Result<Option<Word>> {
    relation_search(oracle, g, g_prime, power, max_syllables)
}

/// Exhaustively reduce every nonempty reduced word in `g^{±k}, g'^{±k}` of
/// syllable length up to `max_syllables`; return the first relation found.
fn relation_search(
    oracle: &GroupOracle,
    g: &Word,
    gp: &Word,
    k: i64,
    max_syllables: usize,
) -> Result<Option<Word>> {
    let gens = [
        oracle.reduce(&g.pow(k))?,
        oracle.reduce(&g.pow(-k))?,
        oracle.reduce(&gp.pow(k))?,
        oracle.reduce(&gp.pow(-k))?,
    ];
    // letters 0..4; letter i cancels with i^1
    let mut stack: Vec<(Vec<u8>, Word)> = vec![(Vec::new(), Word::empty())];
    while let Some((syls, value)) = stack.pop() {
        if !syls.is_empty() && value.is_empty() {
            let mut relation = Word::empty();
            for &s in &syls {
                relation = relation.concat(&gens[s as usize]);
            }
            return Ok(Some(relation));
        }
        if syls.len() == max_syllables {
            continue;
        }
        for next in 0..4u8 {
            if let Some(&last) = syls.last() {
                if last ^ 1 == next {
                    continue; // adjacent cancellation: not reduced
                }
            }
            let mut s2 = syls.clone();
            s2.push(next);
            let v2 = oracle.reduce(&value.concat(&gens[next as usize]))?;
            stack.push((s2, v2));
        }
    }
    Ok(None)
}

/// Attraction table of a translation: for each sampled direction, the
/// smallest n at which every later in-ball translate lands in the
/// attracting component of `[g^inf]`.
#[derive(Debug, Clone)]
pub struct DynamicsReport {
    pub attracting_component: usize,
    pub repelling_component: usize,
    pub rows: Vec<DynamicsRow>,
}

#[derive(Debug, Clone)]
pub struct DynamicsRow {
    pub direction: Word,
    /// Component of the untranslated direction.
    pub component: usize,
    /// Smallest n from which all tested translates are attracted, if any.
    pub onset: Option<i64>,
    /// Largest n that stayed inside the ball.
    pub tested_up_to: i64,
}

/// Verify the two-fixed-point dynamics of a translation `g` with
/// `f(g) != 0` on sampled directions.
pub fn fixed_end_dynamics(
    f: &PseudocharacterScaled,
    oracle: &GroupOracle,
    tree: &SlabTree,
    ball: &CayleyBall,
    counts: &EndsCounts,
    g: &Word,
    sample_directions: &[Word],
    n_budget: i64,
) -> Result<DynamicsReport> {
    let fg = f.base.eval(g, oracle)?;
    if fg == Rat::from_integer(0) {
        return Err(Error::Precondition("translation must have nonzero value".into()));
    }
    let sign = rat_sign(&fg);
    let attracting = locate_ray_component(tree, ball, oracle, counts, g, sign)?;
    let repelling = locate_ray_component(tree, ball, oracle, counts, &g.inverse(), -sign)?;

    let threshold = rat((counts.radius + 2) as i128);
    let mut rows = Vec::new();
    for d in sample_directions {
        let comp = locate_ray_component(tree, ball, oracle, counts, d, 1)?;
        if comp == repelling {
            continue; // the repelling fixed point is exempt
        }
        // translate the direction's witness path by g^n
        let mut onset = None;
        let mut tested_up_to = 0;
        let mut current = oracle.reduce(d)?;
        for n in 1..=n_budget {
            current = oracle.reduce(&g.concat(&current))?;
            let Some(v) = ball.id_of(&current) else { break };
            tested_up_to = n;
            let val = &tree.unscaled[v as usize];
            let landed = if val.abs() >= threshold {
                let c = counts.component_of_space[tree.space_of[v as usize] as usize];
                c == attracting
            } else {
                false
            };
            if landed {
                if onset.is_none() {
                    onset = Some(n);
                }
            } else {
                onset = None; // must hold for all later n
            }
        }
        rows.push(DynamicsRow { direction: d.clone(), component: comp, onset, tested_up_to });
    }
    Ok(DynamicsReport { attracting_component: attracting, repelling_component: repelling, rows })
}

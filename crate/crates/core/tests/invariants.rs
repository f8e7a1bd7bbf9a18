//! Cross-module invariants: exhaustive normal-form checks over the
//! built-in oracles, the pseudocharacter axioms at finite truncation,
//! generator-set robustness, action compatibility, and randomized
//! word-level properties.

use num_traits::Signed;
use proptest::prelude::*;

use pclab::bottleneck::{bottleneck_delta, bottleneck_pair};
use pclab::ends::{classify_ends, classify_ends_report, Classification};
use pclab::group::{cayley_ball, FiniteTable, GeneratorSet, GroupOracle, Presentation, Word};
use pclab::metric::{apsp, MetricGraph};
use pclab::pseudochar::{homogenize, scale_normalize, Quasicharacter};
use pclab::rat::{rat, Rat};
use pclab::slab::build_slab_tree;

fn s3_oracle() -> GroupOracle {
    // symmetric group on 3 letters: elements e, r, r2, s, sr, sr2
    // r = (123), s = (12)
    let mul_perm = |p: [usize; 3], q: [usize; 3]| [q[p[0]], q[p[1]], q[p[2]]];
    let elements: Vec<[usize; 3]> = vec![
        [0, 1, 2],
        [1, 2, 0],
        [2, 0, 1],
        [1, 0, 2],
        [0, 2, 1],
        [2, 1, 0],
    ];
    let idx = |p: [usize; 3]| elements.iter().position(|&q| q == p).unwrap();
    let mut mul = vec![vec![0usize; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            mul[i][j] = idx(mul_perm(elements[i], elements[j]));
        }
    }
    let table = FiniteTable {
        size: 6,
        mul,
        generator_elements: vec![1, 3], // r and s
    };
    GroupOracle::finite(vec!["r".into(), "s".into()], table).unwrap()
}

fn builtins() -> Vec<GroupOracle> {
    vec![
        GroupOracle::free(2).unwrap(),
        GroupOracle::free_abelian(2).unwrap(),
        GroupOracle::psl2z(),
        s3_oracle(),
    ]
}

/// All raw words of length exactly `len` over the 4-letter alphabet of a
/// rank-2 generating set, visited by a callback.
fn for_words(len: usize, mut f: impl FnMut(&Word)) {
    let letters = [
        pclab::group::Letter::new(0, false),
        pclab::group::Letter::new(0, true),
        pclab::group::Letter::new(1, false),
        pclab::group::Letter::new(1, true),
    ];
    let mut idx = vec![0usize; len];
    loop {
        let w = Word(idx.iter().map(|&i| letters[i]).collect());
        f(&w);
        let mut k = 0;
        loop {
            if k == len {
                return;
            }
            idx[k] += 1;
            if idx[k] < 4 {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if len == 0 {
            return;
        }
    }
}

#[test]
fn reduce_idempotent_exhaustive_to_length_8() {
    for oracle in builtins() {
        for len in 0..=8 {
            for_words(len, |w| {
                let r1 = oracle.reduce(w).unwrap();
                let r2 = oracle.reduce(&r1).unwrap();
                assert_eq!(r1, r2, "idempotence fails on {:?} ({})", w, oracle.name());
            });
        }
    }
}

#[test]
fn multiply_associative_on_ball_three() {
    for oracle in builtins() {
        let ball = cayley_ball(&oracle, 3, None).unwrap();
        let v = &ball.vertices;
        for a in v {
            for b in v {
                let ab = oracle.multiply(a, b).unwrap();
                for c in v {
                    let bc = oracle.multiply(b, c).unwrap();
                    let left = oracle.multiply(&ab, c).unwrap();
                    let right = oracle.multiply(a, &bc).unwrap();
                    assert_eq!(left, right, "associativity ({})", oracle.name());
                }
            }
        }
    }
}

/// |f(g^n) - n f(g)| is controlled by the defects of the pairs actually
/// multiplied, and the homogenization sequence is Cauchy with the stated
/// gap.
#[test]
fn pseudocharacter_truncation_bounds() {
    let o = GroupOracle::free(2).unwrap();
    let gens = o.generators().clone();
    let brooks = Quasicharacter::brooks(Word::parse("a b", &gens).unwrap());
    let ball = cayley_ball(&o, 2, None).unwrap();
    for g in &ball.vertices {
        if g.is_empty() {
            continue;
        }
        let fg = brooks.eval_reduced(g, &o).unwrap();
        // delta over the pairs (g^k, g) that the power walk multiplies
        let mut max_pair_defect = rat(0);
        let mut value = rat(0);
        let mut power = Word::empty();
        for n in 1..=16i64 {
            let next = o.multiply(&power, g).unwrap();
            let f_next = brooks.eval_reduced(&next, &o).unwrap();
            let d = (value + fg - f_next).abs();
            if d > max_pair_defect {
                max_pair_defect = d;
            }
            let lhs = (f_next - rat(n as i128) * fg).abs();
            assert!(
                lhs <= rat((n - 1) as i128) * max_pair_defect,
                "power bound fails for {} at n = {n}",
                g.display(&gens)
            );
            power = next;
            value = f_next;
        }
        // Cauchy gaps of the homogenization sequence
        let mut prev = homogenize(&brooks, g, 1, &o).unwrap();
        let mut w = o.multiply(g, g).unwrap();
        for k in 1..=6u32 {
            let next = homogenize(&brooks, g, k + 1, &o).unwrap();
            let pair_defect =
                (brooks.eval_reduced(&w, &o).unwrap() * rat(2)
                    - brooks.eval_reduced(&o.multiply(&w, &w).unwrap(), &o).unwrap())
                .abs();
            let gap = (next - prev).abs();
            assert!(
                gap <= pair_defect / rat(1i128 << k),
                "Cauchy gap at k = {k} for {}",
                g.display(&gens)
            );
            w = o.multiply(&w, &w).unwrap();
            prev = next;
        }
    }
}

/// Homogenize is non-increasing in truncation error: later terms stay
/// within the tail bound of earlier ones.
#[test]
fn homogenize_tail_contracts() {
    let o = GroupOracle::free(2).unwrap();
    let gens = o.generators().clone();
    let brooks = Quasicharacter::brooks(Word::parse("a b", &gens).unwrap());
    let homog = Quasicharacter::homogenized(brooks.clone(), 12);
    for s in ["a b", "b a", "a b a'", "a b a b"] {
        let g = Word::parse(s, &gens).unwrap();
        let limit = homog.eval(&g, &o).unwrap();
        let mut prev_err: Option<Rat> = None;
        for k in [2u32, 4, 6, 8] {
            let err = (homogenize(&brooks, &g, k, &o).unwrap() - limit).abs();
            if let Some(p) = prev_err {
                assert!(err <= p, "truncation error grew at k = {k} for {s}");
            }
            prev_err = Some(err);
        }
    }
}

/// Empirical generator invariance: the classification and the bushy
/// certificate agree between the generating sets {a, b} and {a, b, c = ab}.
#[test]
fn generator_robustness_of_ends() {
    let o1 = GroupOracle::free(2).unwrap();
    let f1 = Quasicharacter::homomorphism_named(&o1, &[("a", rat(1))]).unwrap();
    let fs1 = scale_normalize(&f1, &o1, 4).unwrap();
    let ball1 = cayley_ball(&o1, 8, None).unwrap();
    let tree1 = build_slab_tree(&ball1, &fs1, &o1).unwrap();
    let r1 = classify_ends_report(&tree1, &ball1, &[1, 2]).unwrap();

    let o2 = GroupOracle::free_with_definitions(
        vec!["a".into(), "b".into()],
        vec![("c".into(), "a b".into())],
    )
    .unwrap();
    let g2 = o2.generators().clone();
    let p2 = Presentation::new(
        GeneratorSet::new(g2.names().to_vec()).unwrap(),
        vec![Word::parse("c' a b", &g2).unwrap()],
    )
    .unwrap();
    let f2 = Quasicharacter::homomorphism_named(&o2, &[("a", rat(1)), ("c", rat(1))]).unwrap();
    let fs2 = scale_normalize(&f2, &o2, 4).unwrap();
    let ball2 = cayley_ball(&o2, 8, Some(&p2)).unwrap();
    let tree2 = build_slab_tree(&ball2, &fs2, &o2).unwrap();
    let r2 = classify_ends_report(&tree2, &ball2, &[1, 2]).unwrap();

    assert_eq!(r1.classification, Classification::Bushy);
    assert_eq!(r2.classification, Classification::Bushy);
    assert!(r2.positive_count >= 2 && r2.negative_count >= 2);
}

/// Scaling invariance: classify_ends output is identical under f and 2f.
#[test]
fn ends_scale_invariance() {
    let o = GroupOracle::free(2).unwrap();
    let ball = cayley_ball(&o, 8, None).unwrap();
    let mut reports = Vec::new();
    for scale in [1i128, 2] {
        let f = Quasicharacter::homomorphism_named(&o, &[("a", rat(scale))]).unwrap();
        let fs = scale_normalize(&f, &o, 4).unwrap();
        let tree = build_slab_tree(&ball, &fs, &o).unwrap();
        // barrier in f-units scales with f
        let counts = classify_ends(&tree, &ball, scale as i64).unwrap();
        reports.push((counts.positive, counts.negative));
    }
    assert_eq!(reports[0], reports[1], "counts differ between f and 2f");
}

/// G-action compatibility: two witnesses of one direction translate into
/// one common component.
#[test]
fn ends_action_compatibility() {
    let o = GroupOracle::free(2).unwrap();
    let gens = o.generators().clone();
    let f = Quasicharacter::homomorphism_named(&o, &[("a", rat(1))]).unwrap();
    let fs = scale_normalize(&f, &o, 4).unwrap();
    let ball = cayley_ball(&o, 9, None).unwrap();
    let tree = build_slab_tree(&ball, &fs, &o).unwrap();
    let counts = classify_ends(&tree, &ball, 1).unwrap();
    let locate = |word: &Word| -> Option<usize> {
        let v = ball.id_of(word)?;
        let c = counts.component_of_space[tree.space_of[v as usize] as usize];
        (c != usize::MAX).then_some(c)
    };
    // two witnesses of the a-direction
    let w1 = Word::parse("a^5", &gens).unwrap();
    let w2 = Word::parse("a^4 b", &gens).unwrap();
    assert_eq!(locate(&w1), locate(&w2), "witnesses of one direction agree");
    for t in ["a", "b", "a b", "b' a"] {
        let g = Word::parse(t, &gens).unwrap();
        let t1 = locate(&o.multiply(&g, &w1).unwrap());
        let t2 = locate(&o.multiply(&g, &w2).unwrap());
        if let (Some(c1), Some(c2)) = (t1, t2) {
            assert_eq!(c1, c2, "translation by {t} split a direction");
        }
    }
}

/// Adding a distance-preserving chord can only grow (or preserve) each
/// pair's bottleneck radius: the paths increase while the realized radius
/// set stays the same.
#[test]
fn bottleneck_chord_monotonicity() {
    let edges: Vec<(u32, u32)> = vec![(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6)];
    let base = MetricGraph::unit_edges(7, &edges).unwrap();
    let base_sub = base.subdivide();
    let dist0 = apsp(&base_sub).unwrap();

    // chord 0 -- 4 at the prior distance
    let d04 = {
        let d = apsp(&base).unwrap();
        d[0][4]
    };
    let mut with_chord = edges.clone();
    let chord_len = Rat::from_integer(d04 as i128);
    let mut rational: Vec<(u32, u32, Rat)> =
        with_chord.drain(..).map(|(u, v)| (u, v, rat(1))).collect();
    rational.push((0, 4, chord_len));
    let chorded = MetricGraph::new(7, rational).unwrap();
    let chorded_sub = chorded.subdivide();
    let dist1 = apsp(&chorded_sub).unwrap();

    for x in 0..7u32 {
        for y in x + 1..7u32 {
            assert_eq!(
                dist0[x as usize][y as usize], dist1[x as usize][y as usize],
                "chord changed the metric"
            );
            let before = bottleneck_pair(&base_sub, &dist0, x, y).unwrap();
            let after = bottleneck_pair(&chorded_sub, &dist1, x, y).unwrap();
            assert!(
                after >= before,
                "pair ({x},{y}): radius shrank from {before} to {after} after a \
                 distance-preserving chord"
            );
        }
    }
}

/// Every connected graph's Delta is at least a tree's (trees sit at the
/// global minimum, one step).
#[test]
fn trees_minimize_delta() {
    let tree_edges: Vec<(u32, u32)> = vec![(0, 1), (1, 2), (1, 3), (0, 4), (4, 5)];
    let t = MetricGraph::unit_edges(6, &tree_edges).unwrap().subdivide();
    let tree_delta = bottleneck_delta(&t, false).unwrap().delta_units;
    assert_eq!(tree_delta, 1);
    let mut cyc = tree_edges.clone();
    cyc.push((3, 5));
    let g = MetricGraph::unit_edges(6, &cyc).unwrap().subdivide();
    assert!(bottleneck_delta(&g, false).unwrap().delta_units >= tree_delta);
}

fn arb_word(max_len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec((0u16..2, any::<bool>()), 0..=max_len).prop_map(|ls| {
        Word(ls.into_iter().map(|(g, inv)| pclab::group::Letter::new(g as usize, inv)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn prop_reduce_idempotent_and_congruent(u in arb_word(12), v in arb_word(12)) {
        for oracle in builtins() {
            let ru = oracle.reduce(&u).unwrap();
            prop_assert_eq!(&oracle.reduce(&ru).unwrap(), &ru);
            // congruence: reduce(u v) = reduce(reduce(u) reduce(v))
            let rv = oracle.reduce(&v).unwrap();
            let direct = oracle.reduce(&u.concat(&v)).unwrap();
            let via_nf = oracle.reduce(&ru.concat(&rv)).unwrap();
            prop_assert_eq!(direct, via_nf);
        }
    }

    #[test]
    fn prop_display_parse_round_trip(u in arb_word(12)) {
        let gens = GeneratorSet::new(vec!["a", "b"]).unwrap();
        let shown = u.display(&gens);
        let back = Word::parse(&shown, &gens).unwrap();
        prop_assert_eq!(u, back);
    }

    #[test]
    fn prop_inverse_cancels(u in arb_word(10)) {
        for oracle in builtins() {
            let prod = oracle.reduce(&u.concat(&u.inverse())).unwrap();
            prop_assert!(prod.is_empty(), "u u^-1 != 1 under {}", oracle.name());
        }
    }

    #[test]
    fn prop_farey_mobius_preserves_edges(
        word in proptest::collection::vec(0u8..4, 0..6),
        pq in (0i64..30, 1i64..30),
    ) {
        use pclab::farey::{mobius_act, FareyVertex, Mat2};
        let mut m = Mat2::identity();
        for g in word {
            let gen = match g {
                0 => Mat2::gen_a(),
                1 => Mat2::gen_a().inverse(),
                2 => Mat2::gen_b(),
                _ => Mat2::gen_b().inverse(),
            };
            m = m.mul(&gen);
        }
        let v = FareyVertex::new(pq.0, pq.1);
        // find a Farey neighbor of v by scanning small fractions
        let mut partner = None;
        'outer: for s in 0..=pq.1 {
            for r in -1..=pq.0 + 1 {
                let cand = FareyVertex::new(r, s);
                if v.adjacent(&cand) {
                    partner = Some(cand);
                    break 'outer;
                }
            }
        }
        if let Some(u) = partner {
            let mv = mobius_act(&m, &v);
            let mu = mobius_act(&m, &u);
            prop_assert!(mv.adjacent(&mu), "Mobius image of an edge is an edge");
        }
    }
}

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::word::{GeneratorSet, Letter, Word};
use crate::{Error, Result};

/// Default cap on the length of any word an oracle will produce or accept.
const DEFAULT_BUDGET: usize = 4_000_000;

type NormalFormFn = Box<dyn Fn(&Word) -> Result<Word> + Send + Sync>;

/// A solvable-word-problem interface over a finite generating set.
///
/// `normal_form` is total on in-budget words, idempotent, and a congruence:
/// the normal form of a product depends only on the normal forms of the
/// factors. Built-ins cover free groups, free abelian groups, finite groups
/// given by a multiplication table, and `PSL(2,Z)`. Generators beyond the
/// basis may be *defined* as words in the basis (e.g. `x = ab`), which keeps
/// the word metric of the enlarged generating set while normal forms stay
/// over the basis.
#[derive(Clone)]
pub struct GroupOracle {
    generators: GeneratorSet,
    name: String,
    kind: Arc<Kind>,
    budget: usize,
}

enum Kind {
    /// Free group; `defs[i]` is the basis word of generator `i`.
    Free { basis: usize, defs: Vec<Word> },
    /// Free abelian group; `defs[i]` is the exponent vector of generator `i`.
    FreeAbelian { basis: usize, defs: Vec<Vec<i64>> },
    /// Finite group via multiplication table.
    Finite { table: FiniteTable, canonical: Vec<Word> },
    /// `PSL(2,Z)` with generators `A = [[1,1],[0,1]]`, `B = [[1,0],[-1,1]]`.
    Psl2z,
    /// User-supplied normal form. The function must be idempotent and a
    /// congruence; [`GroupOracle::validate_on_ball`] spot-checks both.
    Custom(NormalFormFn),
}

/// Multiplication table of a finite group. Element `0` is the identity.
#[derive(Debug, Clone)]
pub struct FiniteTable {
    pub size: usize,
    /// `mul[g][h]` = index of the product `g·h`.
    pub mul: Vec<Vec<usize>>,
    /// The element represented by each generator.
    pub generator_elements: Vec<usize>,
}

impl FiniteTable {
    fn validate(&self) -> Result<()> {
        let n = self.size;
        if self.mul.len() != n || self.mul.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("multiplication table is not square".into()));
        }
        for g in 0..n {
            if self.mul[0][g] != g || self.mul[g][0] != g {
                return Err(Error::Precondition("element 0 is not an identity".into()));
            }
        }
        for g in 0..n {
            let mut seen = vec![false; n];
            for h in 0..n {
                let p = self.mul[g][h];
                if p >= n || seen[p] {
                    return Err(Error::Precondition(format!("row {g} is not a permutation")));
                }
                seen[p] = true;
            }
        }
        for &e in &self.generator_elements {
            if e >= n {
                return Err(Error::Precondition("generator element out of range".into()));
            }
        }
        Ok(())
    }

    fn inverse_of(&self, g: usize) -> usize {
        (0..self.size).find(|&h| self.mul[g][h] == 0).expect("group table has inverses")
    }
}

impl std::fmt::Debug for GroupOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupOracle")
            .field("name", &self.name)
            .field("generators", &self.generators.names())
            .finish()
    }
}

impl GroupOracle {
    /// Free group of the given rank with names `a, b, c, …`.
    pub fn free(rank: usize) -> Result<Self> {
        Self::free_named(default_names(rank)?)
    }

    pub fn free_named(names: Vec<String>) -> Result<Self> {
        let gens = GeneratorSet::new(names)?;
        let basis = gens.rank();
        let defs = (0..basis).map(|i| Word::letter(i, false)).collect();
        Ok(GroupOracle {
            generators: gens,
            name: "free".into(),
            kind: Arc::new(Kind::Free { basis, defs }),
            budget: DEFAULT_BUDGET,
        })
    }

    /// Free group on the first `basis` names, with each additional
    /// generator defined as a word in the basis.
    pub fn free_with_definitions(basis_names: Vec<String>, defined: Vec<(String, String)>) -> Result<Self> {
        let basis = basis_names.len();
        let basis_gens = GeneratorSet::new(basis_names.clone())?;
        let mut names = basis_names;
        let mut defs: Vec<Word> = (0..basis).map(|i| Word::letter(i, false)).collect();
        for (name, def) in defined {
            let w = Word::parse(&def, &basis_gens)?.free_reduce();
            names.push(name);
            defs.push(w);
        }
        Ok(GroupOracle {
            generators: GeneratorSet::new(names)?,
            name: "free".into(),
            kind: Arc::new(Kind::Free { basis, defs }),
            budget: DEFAULT_BUDGET,
        })
    }

    /// Free abelian group of the given rank with names `a, b, …`.
    pub fn free_abelian(rank: usize) -> Result<Self> {
        Self::free_abelian_named(default_names(rank)?, Vec::new())
    }

    /// Free abelian group on the named basis, with extra generators defined
    /// by words in the basis (e.g. the triangularizing diagonal `x = ab`).
    pub fn free_abelian_named(basis_names: Vec<String>, defined: Vec<(String, String)>) -> Result<Self> {
        let basis = basis_names.len();
        let basis_gens = GeneratorSet::new(basis_names.clone())?;
        let mut names = basis_names;
        let mut defs: Vec<Vec<i64>> = (0..basis)
            .map(|i| {
                let mut v = vec![0i64; basis];
                v[i] = 1;
                v
            })
            .collect();
        for (name, def) in defined {
            let w = Word::parse(&def, &basis_gens)?;
            let mut v = vec![0i64; basis];
            for l in w.letters() {
                v[l.gen()] += if l.inverse { -1 } else { 1 };
            }
            names.push(name);
            defs.push(v);
        }
        Ok(GroupOracle {
            generators: GeneratorSet::new(names)?,
            name: "free_abelian".into(),
            kind: Arc::new(Kind::FreeAbelian { basis, defs }),
            budget: DEFAULT_BUDGET,
        })
    }

    /// Finite group from a multiplication table.
    pub fn finite(names: Vec<String>, table: FiniteTable) -> Result<Self> {
        table.validate()?;
        let gens = GeneratorSet::new(names)?;
        if gens.rank() != table.generator_elements.len() {
            return Err(Error::Precondition("generator names and elements disagree".into()));
        }
        let canonical = canonical_words(&table, gens.rank());
        Ok(GroupOracle {
            generators: gens,
            name: "finite".into(),
            kind: Arc::new(Kind::Finite { table, canonical }),
            budget: DEFAULT_BUDGET,
        })
    }

    /// `PSL(2,Z)` with the standard parabolic generators `A`, `B`.
    pub fn psl2z() -> Self {
        GroupOracle {
            generators: GeneratorSet::new(vec!["A", "B"]).expect("valid names"),
            name: "psl2z".into(),
            kind: Arc::new(Kind::Psl2z),
            budget: DEFAULT_BUDGET,
        }
    }

    /// Plug in a user oracle: any terminating normal form over the given
    /// generators. The function must be idempotent and a congruence.
    pub fn custom<F>(names: Vec<String>, normal_form: F) -> Result<Self>
    where
        F: Fn(&Word) -> Result<Word> + Send + Sync + 'static,
    {
        Ok(GroupOracle {
            generators: GeneratorSet::new(names)?,
            name: "user".into(),
            kind: Arc::new(Kind::Custom(Box::new(normal_form))),
            budget: DEFAULT_BUDGET,
        })
    }

    /// Spot-check the oracle axioms by exhausting raw words of length up
    /// to `radius` over the full alphabet: idempotence of the normal form
    /// and the congruence `reduce(u v) = reduce(reduce(u) reduce(v))`.
    /// Returns the first offending word pair, if any. Cost grows as
    /// `(2 rank)^(2 radius)`, so keep the radius small.
    pub fn validate_on_ball(&self, radius: usize) -> Result<Option<(Word, Word)>> {
        let mut words: Vec<Word> = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for g in 0..self.generators.rank() {
                    for inv in [false, true] {
                        let mut w2 = w.clone();
                        w2.push(Letter::new(g, inv));
                        next.push(w2);
                    }
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        for u in &words {
            let ru = self.reduce(u)?;
            if self.reduce(&ru)? != ru {
                return Ok(Some((u.clone(), u.clone())));
            }
        }
        for u in &words {
            let ru = self.reduce(u)?;
            for v in &words {
                let direct = self.reduce(&u.concat(v))?;
                let via_nf = self.reduce(&ru.concat(&self.reduce(v)?))?;
                if direct != via_nf {
                    return Ok(Some((u.clone(), v.clone())));
                }
            }
        }
        Ok(None)
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// True when the Cayley graph over this generating set is a tree
    /// (free group on its basis, no defined generators, or the infinite
    /// cyclic group).
    pub fn cayley_graph_is_tree(&self) -> bool {
        match &*self.kind {
            Kind::Free { basis, defs } => defs.len() == *basis,
            Kind::FreeAbelian { basis, defs } => *basis == 1 && defs.len() == 1,
            _ => false,
        }
    }

    fn check_alphabet(&self, w: &Word) -> Result<()> {
        for l in w.letters() {
            if l.gen() >= self.generators.rank() {
                return Err(Error::Alphabet {
                    letter: format!("#{}", l.gen()),
                    oracle: self.name.clone(),
                });
            }
        }
        Ok(())
    }

    /// The oracle's normal form of `word`.
    pub fn reduce(&self, word: &Word) -> Result<Word> {
        self.check_alphabet(word)?;
        if word.len() > self.budget {
            return Err(Error::Resource(format!(
                "word length {} exceeds oracle budget {}",
                word.len(),
                self.budget
            )));
        }
        match &*self.kind {
            Kind::Free { defs, .. } => {
                let mut out: Vec<Letter> = Vec::with_capacity(word.len());
                for l in word.letters() {
                    let def = &defs[l.gen()];
                    let it: Box<dyn Iterator<Item = Letter>> = if l.inverse {
                        Box::new(def.letters().iter().rev().map(|x| x.inverted()))
                    } else {
                        Box::new(def.letters().iter().copied())
                    };
                    for x in it {
                        if out.last().is_some_and(|&t| t == x.inverted()) {
                            out.pop();
                        } else {
                            out.push(x);
                        }
                    }
                }
                Ok(Word(out))
            }
            Kind::FreeAbelian { basis, defs } => {
                let mut exps = vec![0i64; *basis];
                for l in word.letters() {
                    let sgn = if l.inverse { -1 } else { 1 };
                    for (i, d) in defs[l.gen()].iter().enumerate() {
                        exps[i] += sgn * d;
                    }
                }
                let mut out = Vec::new();
                for (i, &e) in exps.iter().enumerate() {
                    for _ in 0..e.unsigned_abs() {
                        out.push(Letter::new(i, e < 0));
                    }
                }
                Ok(Word(out))
            }
            Kind::Finite { table, canonical } => {
                let mut elem = 0usize;
                for l in word.letters() {
                    let g = table.generator_elements[l.gen()];
                    let g = if l.inverse { table.inverse_of(g) } else { g };
                    elem = table.mul[elem][g];
                }
                Ok(canonical[elem].clone())
            }
            Kind::Psl2z => {
                let m = psl2z_matrix(word);
                psl2z_canonical_word(m, self.budget)
            }
            Kind::Custom(f) => f(word),
        }
    }

    /// `reduce(u · v)`.
    pub fn multiply(&self, u: &Word, v: &Word) -> Result<Word> {
        self.reduce(&u.concat(v))
    }

    /// `reduce(w^n)`, guarding the intermediate word length.
    pub fn power(&self, w: &Word, n: i64) -> Result<Word> {
        let total = w.len().saturating_mul(n.unsigned_abs() as usize);
        if total > self.budget {
            return Err(Error::Resource(format!(
                "power word length {total} exceeds oracle budget {}",
                self.budget
            )));
        }
        self.reduce(&w.pow(n))
    }
}

fn default_names(rank: usize) -> Result<Vec<String>> {
    if rank == 0 {
        return Err(Error::Precondition("rank must be positive".into()));
    }
    let alphabet = "abcdefghijklmnopqrstuvwxyz";
    if rank <= alphabet.len() {
        Ok(alphabet.chars().take(rank).map(|c| c.to_string()).collect())
    } else {
        Ok((0..rank).map(|i| format!("g{i}")).collect())
    }
}

/// Shortlex-first canonical word per element, by BFS from the identity.
fn canonical_words(table: &FiniteTable, rank: usize) -> Vec<Word> {
    let mut words: Vec<Option<Word>> = vec![None; table.size];
    words[0] = Some(Word::empty());
    let mut queue = VecDeque::from([0usize]);
    while let Some(e) = queue.pop_front() {
        let base = words[e].clone().expect("visited");
        for g in 0..rank {
            for inverse in [false, true] {
                let ge = table.generator_elements[g];
                let ge = if inverse { table.inverse_of(ge) } else { ge };
                let t = table.mul[e][ge];
                if words[t].is_none() {
                    let mut w = base.clone();
                    w.push(Letter::new(g, inverse));
                    words[t] = Some(w);
                    queue.push_back(t);
                }
            }
        }
    }
    words
        .into_iter()
        .map(|w| w.expect("generators generate the group"))
        .collect()
}

/// 2x2 integer matrix, row major.
pub(crate) type Mat = [BigInt; 4];

pub(crate) fn psl2z_matrix(word: &Word) -> Mat {
    let mut m: Mat = [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()];
    for l in word.letters() {
        // A = [[1,1],[0,1]], B = [[1,0],[-1,1]]
        let g: Mat = match (l.gen(), l.inverse) {
            (0, false) => [1.into(), 1.into(), 0.into(), 1.into()],
            (0, true) => [1.into(), (-1).into(), 0.into(), 1.into()],
            (1, false) => [1.into(), 0.into(), (-1).into(), 1.into()],
            (1, true) => [1.into(), 0.into(), 1.into(), 1.into()],
            _ => unreachable!("alphabet checked"),
        };
        m = mat_mul(&m, &g);
    }
    m
}

pub(crate) fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}

/// Canonical sign: first nonzero entry of (a, b, c, d) positive.
pub(crate) fn psl2z_canonical_sign(mut m: Mat) -> Mat {
    for i in 0..4 {
        if !m[i].is_zero() {
            if m[i].is_negative() {
                for e in &mut m {
                    *e = -std::mem::take(e);
                }
            }
            break;
        }
    }
    m
}

/// Quotient `q` with remainder `a - q·c` in `(-|c|/2, |c|/2]`.
fn div_round(a: &BigInt, c: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (_, r0) = num_integer::Integer::div_mod_floor(a, c);
    // r0 in [0, |c|) for positive c, in (c, 0] for negative; normalize on |c|
    let cab = c.abs();
    let r = if r0.is_negative() { &r0 + &cab } else { r0 };
    let q = (a - &r) / c;
    if &r * &two > cab {
        // push remainder into (-|c|/2, |c|/2]
        if c.is_positive() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Deterministic canonical word for a matrix mod ±I, built by Euclidean
/// reduction of the first column with A- and B-power row operations.
fn psl2z_canonical_word(m: Mat, budget: usize) -> Result<Word> {
    let m = psl2z_canonical_sign(m);
    let [mut a, mut b, mut c, mut d] = m;
    // tokens of (generator, exponent), in order
    let mut tokens: Vec<(usize, BigInt)> = Vec::new();
    let mut guard = 0usize;
    while !c.is_zero() {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::Internal("psl2z euclid failed to terminate".into()));
        }
        if a.is_zero() {
            // a = 0 forces c = ±1; one A-step makes |a| = 1
            let q = if c.is_positive() { BigInt::from(-1) } else { BigInt::one() };
            // M <- A^{-q} M : a -= q c
            a = &a - &q * &c;
            b = &b - &q * &d;
            tokens.push((0, q));
        } else if a.abs() > c.abs() {
            let q = div_round(&a, &c);
            // M <- A^{-q} M : a -= q c
            a = &a - &q * &c;
            b = &b - &q * &d;
            tokens.push((0, q));
        } else {
            let q = div_round(&c, &a);
            // M <- B^{q} M : c -= q a  (B^q row op: row2 -= q row1)
            c = &c - &q * &a;
            d = &d - &q * &b;
            tokens.push((1, -q));
        }
    }
    // now c = 0, a d = 1
    debug_assert!((&a * &d).is_one());
    if a.is_one() {
        tokens.push((0, b.clone()));
    } else {
        tokens.push((0, -b.clone()));
    }
    let mut total: usize = 0;
    for (_, e) in &tokens {
        let approx: usize = e.abs().try_into().unwrap_or(usize::MAX);
        total = total.saturating_add(approx);
        if total > budget {
            return Err(Error::Resource(format!("psl2z normal form exceeds budget {budget}")));
        }
    }
    let mut out = Vec::with_capacity(total);
    for (g, e) in tokens {
        let inv = e.is_negative();
        let k: usize = e.abs().try_into().map_err(|_| Error::Resource("psl2z exponent too large".into()))?;
        for _ in 0..k {
            out.push(Letter::new(g, inv));
        }
    }
    Ok(Word(out).free_reduce())
}

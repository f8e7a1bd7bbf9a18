use super::word::{GeneratorSet, Letter, Word};
use crate::{Error, Result};

/// A finite presentation. A presentation is *triangular* when every relator
/// has length exactly three.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub generators: GeneratorSet,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: GeneratorSet, relators: Vec<Word>) -> Result<Self> {
        for r in &relators {
            for l in r.letters() {
                if l.gen() >= generators.rank() {
                    return Err(Error::Precondition("relator uses unknown generator".into()));
                }
            }
        }
        Ok(Presentation { generators, relators })
    }

    pub fn is_triangular(&self) -> bool {
        self.relators.iter().all(|r| r.len() == 3)
    }
}

/// Result of [`triangularize`]: the triangular presentation plus the
/// defining word (over the original generators) of every fresh generator.
#[derive(Debug, Clone)]
pub struct Triangularization {
    pub presentation: Presentation,
    /// `(fresh name, word over the input presentation's generators)`.
    pub definitions: Vec<(String, Word)>,
}

/// Rewrite a finite presentation into a triangular one presenting an
/// isomorphic group.
///
/// A relator `r = s1 s2 w` with `|r| > 3` is split into `x' s1 s2` and
/// `x w` for a fresh generator `x = s1 s2`, recursively. Relators of length
/// one or two are padded with a fresh generator `t` killed by the length-3
/// word `t t t'`. Already-triangular presentations come back unchanged.
pub fn triangularize(p: &Presentation) -> Triangularization {
    if p.is_triangular() {
        return Triangularization { presentation: p.clone(), definitions: Vec::new() };
    }

    let mut names: Vec<String> = p.generators.names().to_vec();
    let mut definitions: Vec<(String, Word)> = Vec::new();
    let mut out: Vec<Word> = Vec::new();

    let fresh = |names: &mut Vec<String>, definitions: &mut Vec<(String, Word)>, stem: &str, def: Word| {
        let gens = GeneratorSet::new(names.clone()).expect("names stay valid");
        let name = gens.fresh_name(stem);
        names.push(name.clone());
        definitions.push((name, def));
        names.len() - 1
    };

    // pad generator, created on demand: t = 1 via the relator t t t'
    let mut pad: Option<usize> = None;
    let mut short_relators: Vec<Word> = Vec::new();

    for r in &p.relators {
        let mut rel = r.clone();
        while rel.len() > 3 {
            let s1 = rel.letters()[0];
            let s2 = rel.letters()[1];
            let x = fresh(&mut names, &mut definitions, "x", Word(vec![s1, s2]));
            // x' s1 s2
            out.push(Word(vec![Letter::new(x, true), s1, s2]));
            // x w
            let mut next = vec![Letter::new(x, false)];
            next.extend_from_slice(&rel.letters()[2..]);
            rel = Word(next);
        }
        if rel.len() == 3 {
            out.push(rel);
        } else {
            short_relators.push(rel);
        }
    }

    for rel in short_relators {
        let t = *pad.get_or_insert_with(|| {
            let t = fresh(&mut names, &mut definitions, "t", Word::empty());
            // t t t' frees nothing and forces t = 1
            out.push(Word(vec![
                Letter::new(t, false),
                Letter::new(t, false),
                Letter::new(t, true),
            ]));
            t
        });
        let mut padded = rel.letters().to_vec();
        while padded.len() < 3 {
            padded.push(Letter::new(t, false));
        }
        out.push(Word(padded));
    }

    let generators = GeneratorSet::new(names).expect("fresh names are valid");
    let presentation = Presentation::new(generators, out).expect("relators in range");
    Triangularization { presentation, definitions }
}

impl Triangularization {
    /// Substitute every fresh generator by its defining word (pad
    /// generators by the empty word) and freely reduce; used to check that
    /// the output presents the same group as the input.
    pub fn substitute_into_original(&self, w: &Word, original_rank: usize) -> Word {
        // resolve definitions transitively down to original letters
        let mut resolved: Vec<Word> = Vec::new();
        for (i, (_, def)) in self.definitions.iter().enumerate() {
            let mut flat = Vec::new();
            for l in def.letters() {
                if l.gen() < original_rank {
                    flat.push(*l);
                } else {
                    let prior = &resolved[l.gen() - original_rank];
                    if l.inverse {
                        flat.extend(prior.inverse().0);
                    } else {
                        flat.extend(prior.0.iter().copied());
                    }
                }
            }
            let _ = i;
            resolved.push(Word(flat));
        }
        let mut out = Vec::new();
        for l in w.letters() {
            if l.gen() < original_rank {
                out.push(*l);
            } else {
                let def = &resolved[l.gen() - original_rank];
                if l.inverse {
                    out.extend(def.inverse().0);
                } else {
                    out.extend(def.0.iter().copied());
                }
            }
        }
        Word(out).free_reduce()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(names: &[&str]) -> GeneratorSet {
        GeneratorSet::new(names.to_vec()).unwrap()
    }

    #[test]
    fn triangular_input_unchanged() {
        let g = gens(&["a", "b", "x"]);
        let r1 = Word::parse("x' a b", &g).unwrap();
        let r2 = Word::parse("x' b a", &g).unwrap();
        let p = Presentation::new(g, vec![r1.clone(), r2.clone()]).unwrap();
        let t = triangularize(&p);
        assert!(t.definitions.is_empty());
        assert_eq!(t.presentation.relators, vec![r1, r2]);
    }

    #[test]
    fn free_group_unchanged() {
        let p = Presentation::new(gens(&["a", "b"]), vec![]).unwrap();
        let t = triangularize(&p);
        assert!(t.presentation.relators.is_empty());
        assert!(t.definitions.is_empty());
    }

    #[test]
    fn abab_splits_into_two_triangles_over_one_fresh_generator() {
        let g = gens(&["a", "b"]);
        let r = Word::parse("a b a b", &g).unwrap();
        let p = Presentation::new(g, vec![r.clone()]).unwrap();
        let t = triangularize(&p);
        assert!(t.presentation.is_triangular());
        assert_eq!(t.definitions.len(), 1);
        assert_eq!(t.presentation.relators.len(), 2);
        // substituting the fresh generator back recovers each relator as a
        // consequence: one relator dies, the other becomes the original
        let mut images: Vec<Word> = t
            .presentation
            .relators
            .iter()
            .map(|rel| t.substitute_into_original(rel, 2))
            .collect();
        images.sort();
        assert_eq!(images[0], Word::empty());
        assert_eq!(images[1], r);
    }

    #[test]
    fn short_relators_padded() {
        let g = gens(&["a", "b"]);
        let r1 = Word::parse("a", &g).unwrap();
        let r2 = Word::parse("a b", &g).unwrap();
        let p = Presentation::new(g, vec![r1, r2]).unwrap();
        let t = triangularize(&p);
        assert!(t.presentation.is_triangular());
        // pad generator substitutes to the empty word, so images reduce to
        // the original relators (or the empty word for t t t')
        let originals: Vec<Word> = t
            .presentation
            .relators
            .iter()
            .map(|rel| t.substitute_into_original(rel, 2))
            .collect();
        let g2 = gens(&["a", "b"]);
        assert!(originals.contains(&Word::parse("a", &g2).unwrap()));
        assert!(originals.contains(&Word::parse("a b", &g2).unwrap()));
        assert!(originals.contains(&Word::empty()));
    }

    #[test]
    fn long_relator_recursion() {
        let g = gens(&["a", "b"]);
        let r = Word::parse("a b a b a b", &g).unwrap();
        let p = Presentation::new(g, vec![r.clone()]).unwrap();
        let t = triangularize(&p);
        assert!(t.presentation.is_triangular());
        let mut survivors: Vec<Word> = t
            .presentation
            .relators
            .iter()
            .map(|rel| t.substitute_into_original(rel, 2))
            .filter(|w| !w.is_empty())
            .collect();
        survivors.sort();
        assert_eq!(survivors, vec![r]);
    }
}

use std::fmt::Write as _;

use crate::{Error, Result};

/// An ordered finite generating set. Index `i` names generator `i`; the
/// formal inverse of letter `(i, false)` is `(i, true)`, so the involution
/// on symbols and formal inverses is fixed-point-free by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Precondition("generating set is empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            let starts_badly = n.chars().next().is_some_and(|c| c.is_ascii_digit());
            if n.is_empty() || starts_badly || n.contains(['\'', '^', ' ', '\t']) {
                return Err(Error::Precondition(format!("invalid generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::Precondition(format!("duplicate generator name {n:?}")));
            }
        }
        Ok(GeneratorSet { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, gen: usize) -> &str {
        &self.names[gen]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// A fresh name not colliding with existing generators, derived from
    /// `stem` by appending a counter.
    pub fn fresh_name(&self, stem: &str) -> String {
        let mut k = 1usize;
        loop {
            let cand = format!("{stem}{k}");
            if self.index_of(&cand).is_none() {
                return cand;
            }
            k += 1;
        }
    }
}

/// One letter of a word: a generator or its formal inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter { gen: gen as u16, inverse }
    }

    pub fn inverted(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    pub fn gen(self) -> usize {
        self.gen as usize
    }
}

/// A word over a generating alphabet. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(gen: usize, inverse: bool) -> Self {
        Word(vec![Letter::new(gen, inverse)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    /// Formal `n`-th power (negative exponents invert), without reduction.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let k = n.unsigned_abs() as usize;
        let mut v = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            v.extend_from_slice(&base.0);
        }
        Word(v)
    }

    /// Free reduction: cancel adjacent inverse pairs until none remain.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if stack.last().is_some_and(|&t| t == l.inverted()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Prefixes of length `0..=len`, in order.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.len()).map(move |k| Word(self.0[..k].to_vec()))
    }

    /// Parse a word. Tokens are whitespace-separated; each token is a
    /// generator name, optionally followed by `'` (inverse) and `^n`
    /// (integer exponent, possibly negative). A token that is not a known
    /// name is split character by character for single-letter alphabets,
    /// so `ab'a` means `a b' a`. The empty string is the identity; `1` and
    /// `e` also denote the identity token.
    pub fn parse(input: &str, gens: &GeneratorSet) -> Result<Word> {
        let mut out = Vec::new();
        for token in input.split_whitespace() {
            if token == "1" || token == "e" {
                continue;
            }
            parse_token(token, gens, &mut out)?;
        }
        Ok(Word(out))
    }

    /// Render with the inverse (`'`) and power (`^n`) conventions used by
    /// [`Word::parse`]; runs of an equal letter fold into powers. The
    /// rendering round-trips through `parse`.
    pub fn display(&self, gens: &GeneratorSet) -> String {
        if self.is_empty() {
            return "1".to_string();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(gens.name(l.gen()));
            if l.inverse {
                out.push('\'');
            }
            if run > 1 {
                let _ = write!(out, "^{run}");
            }
            i += run;
        }
        out
    }
}

fn parse_token(token: &str, gens: &GeneratorSet, out: &mut Vec<Letter>) -> Result<()> {
    let (head, exp) = match token.split_once('^') {
        Some((h, e)) => {
            let exp: i64 = e.parse().map_err(|_| Error::Precondition(format!("bad exponent in {token:?}")))?;
            (h, exp)
        }
        None => (token, 1),
    };
    let stripped = head.strip_suffix('\'');
    let letters: Vec<Letter> = if let Some(g) = stripped.and_then(|n| gens.index_of(n)) {
        vec![Letter::new(g, true)]
    } else if let Some(g) = gens.index_of(head) {
        vec![Letter::new(g, false)]
    } else {
        // character-by-character fallback for single-letter alphabets,
        // apostrophes marking inverses inline: ab'a = a b' a
        let mut ls = Vec::new();
        let chars: Vec<char> = head.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '\'' {
                return Err(Error::Precondition(format!("misplaced inverse marker in {token:?}")));
            }
            let inv = i + 1 < chars.len() && chars[i + 1] == '\'';
            let g = gens.index_of(&c.to_string()).ok_or_else(|| Error::Alphabet {
                letter: c.to_string(),
                oracle: "parser".into(),
            })?;
            ls.push(Letter::new(g, inv));
            i += if inv { 2 } else { 1 };
        }
        ls
    };
    let word = Word(letters);
    let powered = word.pow(exp);
    out.extend_from_slice(&powered.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> GeneratorSet {
        GeneratorSet::new(vec!["a", "b"]).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let g = ab();
        let w = Word::parse("a b' a^3 ab'", &g).unwrap();
        assert_eq!(w.len(), 7);
        let shown = w.display(&g);
        let back = Word::parse(&shown, &g).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn free_reduction_cancels() {
        let g = ab();
        let w = Word::parse("a a' b", &g).unwrap();
        assert_eq!(w.free_reduce(), Word::parse("b", &g).unwrap());
        let w = Word::parse("a b b' a' ", &g).unwrap();
        assert!(w.free_reduce().is_empty());
    }

    #[test]
    fn negative_powers() {
        let g = ab();
        let w = Word::parse("a^-2", &g).unwrap();
        assert_eq!(w, Word::parse("a' a'", &g).unwrap());
    }

    #[test]
    fn identity_tokens() {
        let g = ab();
        assert!(Word::parse("1", &g).unwrap().is_empty());
        assert!(Word::parse("", &g).unwrap().is_empty());
    }

    #[test]
    fn rejects_unknown_letters() {
        let g = ab();
        assert!(Word::parse("a c", &g).is_err());
    }
}

//! Experiment configuration: a declarative `key = value` file that
//! round-trips unchanged through serialization.
//!
//! # Schema
//!
//! ```text
//! # group
//! group.kind        = free | free_abelian | finite | psl2z
//! group.generators  = a, b            # basis names (default a, b, ...)
//! group.rank        = 2               # used when generators is absent
//! group.define.x    = a b             # defined generator (word in basis)
//! presentation.relators = x' a b ; x' b a   # triangular relators
//!
//! # pseudocharacter
//! pseudochar.kind       = homomorphism | brooks | homogenized_brooks | table
//! pseudochar.value.a    = 1           # rational generator values
//! pseudochar.word       = a b         # brooks pattern
//! pseudochar.doublings  = 12
//! pseudochar.table.a    = 1/2         # table entries (normal form = value)
//!
//! # radii and parameters
//! ball.radius   = 8                   # Cayley ball (ambient for x runs)
//! scale.radius  = 4                   # ball certified by scale_normalize
//! ends.radii    = 1, 2                # barrier radii, unscaled f units
//! ends.barrier  = 1                   # barrier for triple/ping-pong runs
//! ends.syllables = 6                  # ping-pong certificate depth
//! x.g_radius    = 4
//! x.h_radius    = 3
//! x.track_radius = 3
//! ```

use std::collections::BTreeMap;

use crate::export::parse_rat;
use crate::group::{GeneratorSet, GroupOracle, Presentation, Word};
use crate::pseudochar::Quasicharacter;
use crate::rat::Rat;
use crate::{Error, Result};

/// Parsed configuration: ordered key-value entries plus the canonical text
/// used for hashing.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::ConfigParse {
                    line: lineno + 1,
                    message: format!("expected key = value, got {line:?}"),
                });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::ConfigParse { line: lineno + 1, message: "empty key".into() });
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::ConfigParse {
                    line: lineno + 1,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(ExperimentConfig { entries })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical serialization: sorted `key = value` lines. Parsing this
    /// text reproduces the same config.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    fn missing(&self, key: &str) -> Error {
        Error::Precondition(format!("config is missing the {key:?} field"))
    }

    pub fn usize_field(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match self.get(key) {
            None => default.ok_or_else(|| self.missing(key)),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Precondition(format!("field {key:?}: bad integer {v:?}"))),
        }
    }

    pub fn i64_field(&self, key: &str, default: Option<i64>) -> Result<i64> {
        match self.get(key) {
            None => default.ok_or_else(|| self.missing(key)),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Precondition(format!("field {key:?}: bad integer {v:?}"))),
        }
    }

    pub fn i64_list(&self, key: &str) -> Result<Vec<i64>> {
        let Some(v) = self.get(key) else { return Err(self.missing(key)) };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Precondition(format!("field {key:?}: bad integer {s:?}")))
            })
            .collect()
    }

    /// Build the group oracle described by `group.*`.
    pub fn oracle(&self) -> Result<GroupOracle> {
        let kind = self.get("group.kind").unwrap_or("free");
        let names: Vec<String> = match self.get("group.generators") {
            Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
            None => {
                let rank = self.usize_field("group.rank", Some(2))?;
                let alphabet = "abcdefghijklmnopqrstuvwxyz";
                alphabet.chars().take(rank).map(|c| c.to_string()).collect()
            }
        };
        let defined: Vec<(String, String)> = self
            .entries
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix("group.define.").map(|name| (name.to_string(), v.clone()))
            })
            .collect();
        match kind {
            "free" => GroupOracle::free_with_definitions(names, defined),
            "free_abelian" => GroupOracle::free_abelian_named(names, defined),
            "psl2z" => Ok(GroupOracle::psl2z()),
            "finite" => Err(Error::Precondition(
                "finite oracles are constructed programmatically (multiplication table)".into(),
            )),
            other => Err(Error::Precondition(format!("unknown group.kind {other:?}"))),
        }
    }

    /// The triangular presentation in `presentation.relators`
    /// (semicolon-separated words), if present.
    pub fn presentation(&self, oracle: &GroupOracle) -> Result<Option<Presentation>> {
        let Some(list) = self.get("presentation.relators") else { return Ok(None) };
        let relators: Vec<Word> = list
            .split(';')
            .map(|s| Word::parse(s.trim(), oracle.generators()))
            .collect::<Result<_>>()?;
        let gens = GeneratorSet::new(oracle.generators().names().to_vec())?;
        Ok(Some(Presentation::new(gens, relators)?))
    }

    /// Build the quasicharacter described by `pseudochar.*`.
    pub fn quasicharacter(&self, oracle: &GroupOracle) -> Result<Quasicharacter> {
        let kind = self.get("pseudochar.kind").unwrap_or("homomorphism");
        match kind {
            "homomorphism" => {
                let mut values: Vec<(String, Rat)> = Vec::new();
                for (k, v) in &self.entries {
                    if let Some(name) = k.strip_prefix("pseudochar.value.") {
                        values.push((name.to_string(), parse_rat(v)?));
                    }
                }
                let pairs: Vec<(&str, Rat)> =
                    values.iter().map(|(n, r)| (n.as_str(), *r)).collect();
                Quasicharacter::homomorphism_named(oracle, &pairs)
            }
            "brooks" | "homogenized_brooks" => {
                let word_s = self
                    .get("pseudochar.word")
                    .ok_or_else(|| self.missing("pseudochar.word"))?;
                let pattern = Word::parse(word_s, oracle.generators())?;
                let brooks = Quasicharacter::brooks(pattern);
                if kind == "brooks" {
                    Ok(brooks)
                } else {
                    let doublings = self.usize_field("pseudochar.doublings", Some(12))? as u32;
                    Ok(Quasicharacter::homogenized(brooks, doublings))
                }
            }
            "table" => {
                let mut table = BTreeMap::new();
                for (k, v) in &self.entries {
                    if let Some(word_s) = k.strip_prefix("pseudochar.table.") {
                        let w = oracle.reduce(&Word::parse(word_s, oracle.generators())?)?;
                        table.insert(w, parse_rat(v)?);
                    }
                }
                Ok(Quasicharacter::table(table))
            }
            other => Err(Error::Precondition(format!("unknown pseudochar.kind {other:?}"))),
        }
    }
}

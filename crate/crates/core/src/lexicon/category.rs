//! Lexical categories (parts of speech) and the isa_C relation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::hierarchy::{split_isa, Declaration, Hierarchy};
use crate::error::{LoadError, LookupError};

pub const NOMINAL: &str = "Nominal";
pub const NOUN: &str = "Noun";
pub const DET_POSSESSIVE: &str = "DetPossessive";
pub const FINITE_VERB: &str = "FiniteVerb";
pub const PERSONAL_PRONOUN: &str = "PersonalPronoun";
pub const DEFINITE_DETERMINER: &str = "DefiniteDeterminer";

/// Categories every loaded hierarchy must declare.
pub const RESERVED: [&str; 6] =
    [NOMINAL, NOUN, DET_POSSESSIVE, FINITE_VERB, PERSONAL_PRONOUN, DEFINITE_DETERMINER];

/// Hierarchy used when a document names no category file.
pub const DEFAULT_CATEGORIES: &str = "\
# default part-of-speech hierarchy
category Word
category Nominal isa Word
category Noun isa Nominal
category ProperNoun isa Noun
category Pronoun isa Nominal
category PersonalPronoun isa Pronoun
category ReflexivePronoun isa Pronoun
category Determiner isa Word
category DefiniteDeterminer isa Determiner
category IndefiniteDeterminer isa Determiner
category DetPossessive isa Determiner
category Verb isa Word
category FiniteVerb isa Verb
category NonFiniteVerb isa Verb
category Preposition isa Word
category Adjective isa Word
category Adverb isa Word
category Subordinator isa Word
";

/// The isa_C hierarchy over lexical categories.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryHierarchy {
    inner: Hierarchy,
}

impl CategoryHierarchy {
    pub fn parse(text: &str, path: &Path) -> Result<Self, LoadError> {
        let mut decls = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rest = line
                .strip_prefix("category ")
                .ok_or_else(|| LoadError::parse(path, idx + 1, "expected `category NAME [isa PARENT…]`"))?;
            let (name, parents) = split_isa(rest).map_err(|m| LoadError::parse(path, idx + 1, m))?;
            decls.push(Declaration { name, parents, line: idx + 1 });
        }
        let inner = Hierarchy::build(&decls).map_err(|(line, m)| LoadError::parse(path, line, m))?;
        for reserved in RESERVED {
            if inner.id(reserved).is_none() {
                return Err(LoadError::invalid(path, format!("reserved category `{reserved}` is missing")));
            }
        }
        Ok(CategoryHierarchy { inner })
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn default_hierarchy() -> Self {
        Self::parse(DEFAULT_CATEGORIES, Path::new("<default categories>"))
            .expect("built-in category hierarchy is valid")
    }

    pub fn contains(&self, name: &str) -> bool {
        self.inner.id(name).is_some()
    }

    /// `sub isa_C* sup`.
    pub fn isa_c_star(&self, sub: &str, sup: &str) -> Result<bool, LookupError> {
        let s = self.inner.id(sub).ok_or_else(|| LookupError::Category(sub.to_string()))?;
        let p = self.inner.id(sup).ok_or_else(|| LookupError::Category(sup.to_string()))?;
        Ok(self.inner.isa_star(s, p))
    }

    /// Like [`isa_c_star`](Self::isa_c_star) but unknown names are simply false.
    pub fn is(&self, sub: &str, sup: &str) -> bool {
        self.isa_c_star(sub, sup).unwrap_or(false)
    }

    pub fn is_nominal(&self, category: &str) -> bool {
        self.is(category, NOMINAL)
    }

    /// Determiners: anything under `Determiner` when declared, plus the two
    /// reserved determiner classes.
    pub fn is_determiner(&self, category: &str) -> bool {
        self.is(category, DEFINITE_DETERMINER)
            || self.is(category, DET_POSSESSIVE)
            || self.is(category, "Determiner")
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.inner.names()
    }

    pub fn parents_of(&self, name: &str) -> Option<Vec<&str>> {
        let id = self.inner.id(name)?;
        Some(self.inner.parents(id).iter().map(|&p| self.inner.name(p)).collect())
    }
}

//! Lexical and conceptual knowledge: categories, agreement features, the
//! concept taxonomy and lexemes.

pub mod category;
pub mod features;
mod hierarchy;
pub mod taxonomy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use category::CategoryHierarchy;
pub use features::{Feature, FeatureStructure, ValueSet};
pub use taxonomy::{Concept, RoleConstraint, Taxonomy};

use crate::error::FormatError;

/// Dependency relation labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "subject")]
    Subject,
    #[serde(rename = "object")]
    Object,
    #[serde(rename = "spec")]
    Spec,
    #[serde(rename = "saxGen")]
    SaxGen,
    #[serde(rename = "ppAtt")]
    PpAtt,
    #[serde(rename = "genAtt")]
    GenAtt,
    #[serde(rename = "ppObject")]
    PpObject,
    #[serde(rename = "adjunct")]
    Adjunct,
}

impl Relation {
    pub const ALL: [Relation; 8] = [
        Relation::Subject,
        Relation::Object,
        Relation::Spec,
        Relation::SaxGen,
        Relation::PpAtt,
        Relation::GenAtt,
        Relation::PpObject,
        Relation::Adjunct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::Subject => "subject",
            Relation::Object => "object",
            Relation::Spec => "spec",
            Relation::SaxGen => "saxGen",
            Relation::PpAtt => "ppAtt",
            Relation::GenAtt => "genAtt",
            Relation::PpObject => "ppObject",
            Relation::Adjunct => "adjunct",
        }
    }

    /// Relations a head can fill at most once.
    pub fn is_single_slot(self) -> bool {
        !matches!(self, Relation::Adjunct | Relation::PpAtt)
    }

    /// SUBJECT > OBJECT(S) > OTHERS, lower is more prominent.
    pub fn role_rank(self) -> u8 {
        match self {
            Relation::Subject => 0,
            Relation::Object => 1,
            _ => 2,
        }
    }

    /// Relations whose modifier must be nominal.
    pub fn takes_nominal(self) -> bool {
        matches!(
            self,
            Relation::Subject | Relation::Object | Relation::PpObject | Relation::GenAtt | Relation::SaxGen
        )
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| FormatError::new(format!("unknown dependency relation `{s}`")))
    }
}

/// One valence slot of a lexeme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valence {
    pub relation: Relation,
    pub obligatory: bool,
}

/// A lexical item with one morphological reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexeme {
    pub form: String,
    pub lemma: String,
    pub category: String,
    pub features: FeatureStructure,
    /// Concept or instance identifier.
    pub concept: Option<String>,
    pub valence: Vec<Valence>,
}

impl Lexeme {
    pub fn governs(&self, relation: Relation) -> bool {
        self.valence.iter().any(|v| v.relation == relation)
    }
}

/// A discourse referent, e.g. `LPS-105: Festplatte`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscourseEntity {
    pub instance_id: String,
    pub concept: String,
    pub last_expression: String,
}

impl fmt::Display for DiscourseEntity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.instance_id, self.last_expression)
    }
}

/// Categories and taxonomy loaded together for one document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub categories: CategoryHierarchy,
    pub taxonomy: Taxonomy,
}

impl KnowledgeBase {
    pub fn new(categories: CategoryHierarchy, taxonomy: Taxonomy) -> Self {
        KnowledgeBase { categories, taxonomy }
    }
}

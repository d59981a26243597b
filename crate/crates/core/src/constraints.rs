//! Admissibility tests for pronominal and nominal anaphors, and the walk
//! that collects intrasentential antecedent candidates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dependency::{concept_of_node, DependencyTree, WordNode};
use crate::error::LookupError;
use crate::lexicon::category::{DEFINITE_DETERMINER, NOMINAL, NOUN, PERSONAL_PRONOUN};
use crate::lexicon::{CategoryHierarchy, Feature, FeatureStructure, KnowledgeBase, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnaphorKind {
    Pronominal,
    Nominal,
}

impl AnaphorKind {
    pub fn name(self) -> &'static str {
        match self {
            AnaphorKind::Pronominal => "pronominal",
            AnaphorKind::Nominal => "nominal",
        }
    }
}

/// What the anaphor tests look at on either side: category, agreement
/// features and (for nominal anaphora) concept.
#[derive(Clone, Copy, Debug)]
pub struct Referent<'a> {
    pub category: &'a str,
    pub features: &'a FeatureStructure,
    pub concept: Option<&'a str>,
}

impl<'a> Referent<'a> {
    pub fn of_node(kb: &'a KnowledgeBase, node: &'a WordNode) -> Self {
        Referent {
            category: &node.lexeme.category,
            features: &node.resolved,
            concept: concept_of_node(kb, node),
        }
    }
}

/// Classifies the word at `pos` as an anaphor, if it is one.
///
/// Pronominal: a personal pronoun. Nominal: a common noun (not naming an
/// instance) with a definite determiner as specifier.
pub fn anaphor_kind(tree: &DependencyTree, kb: &KnowledgeBase, pos: usize) -> Option<AnaphorKind> {
    let node = tree.node(pos).ok()?;
    let cats = &kb.categories;
    if cats.is(&node.lexeme.category, PERSONAL_PRONOUN) {
        return Some(AnaphorKind::Pronominal);
    }
    let names_instance = node.lexeme.concept.as_deref().is_some_and(|c| kb.taxonomy.is_instance(c));
    if !cats.is(&node.lexeme.category, NOUN) || names_instance {
        return None;
    }
    let has_definite_spec = tree.dependents(pos).into_iter().any(|(d, rel)| {
        rel == Relation::Spec
            && tree.node(d).is_ok_and(|n| cats.is(&n.lexeme.category, DEFINITE_DETERMINER))
    });
    has_definite_spec.then_some(AnaphorKind::Nominal)
}

/// Gender, number and person of pronoun and antecedent unify, and the
/// antecedent is nominal.
pub fn pron_anaphor_test(cats: &CategoryHierarchy, pro: &Referent, ante: &Referent) -> bool {
    cats.is(ante.category, NOMINAL) && agreement_holds(pro.features, ante.features)
}

/// The agreement half of [`pron_anaphor_test`], symmetric in its arguments.
pub fn agreement_holds(a: &FeatureStructure, b: &FeatureStructure) -> bool {
    [Feature::Gen, Feature::Num, Feature::Pers].into_iter().all(|f| a.agrees_on(b, f))
}

/// Number unifies, the antecedent is nominal, and its concept is subsumed by
/// the definite NP's concept. A missing concept on either side fails.
pub fn nom_anaphor_test(kb: &KnowledgeBase, def_np: &Referent, ante: &Referent) -> bool {
    let (Some(np_concept), Some(ante_concept)) = (def_np.concept, ante.concept) else {
        return false;
    };
    kb.categories.is(ante.category, NOMINAL)
        && def_np.features.agrees_on(ante.features, Feature::Num)
        && kb.taxonomy.isa_f_star(ante_concept, np_concept).unwrap_or(false)
}

/// Dispatches to the test for `kind`.
pub fn anaphor_test(kb: &KnowledgeBase, kind: AnaphorKind, anaphor: &Referent, ante: &Referent) -> bool {
    match kind {
        AnaphorKind::Pronominal => pron_anaphor_test(&kb.categories, anaphor, ante),
        AnaphorKind::Nominal => nom_anaphor_test(kb, anaphor, ante),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("anaphor at {0} is not attached")]
    Unattached(usize),
    #[error(transparent)]
    Lookup(#[from] LookupError),
}

/// A word reached by the intrasentential walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub position: usize,
    /// Head whose modifier the candidate is.
    pub head: usize,
    /// 1 for the anaphor's own head, 2 for the next head up, and so on.
    pub level: usize,
    pub relation: Relation,
}

/// Walks up the anaphor's head chain and collects, at each head, the
/// nominal modifiers outside the anaphor's branch that may be its
/// antecedent.
///
/// Nearer heads come first; at one head, subjects precede objects precede
/// the rest, ties broken by surface order.
pub fn intrasentential_candidates(
    tree: &DependencyTree,
    cats: &CategoryHierarchy,
    anaphor: usize,
) -> Result<Vec<Candidate>, ConstraintError> {
    let chain = tree.head_chain(anaphor)?;
    if chain.is_empty() {
        return Err(ConstraintError::Unattached(anaphor));
    }
    let mut out = Vec::new();
    let mut below = anaphor;
    for (i, &head) in chain.iter().enumerate() {
        let mut here = Vec::new();
        for (m, rel) in tree.dependents(head) {
            if m == below || !cats.is_nominal(&tree.node(m)?.lexeme.category) {
                continue;
            }
            if tree.is_potential_anaphoric_antecedent(cats, m, anaphor)? {
                here.push(Candidate { position: m, head, level: i + 1, relation: rel });
            }
        }
        here.sort_by_key(|c| (c.relation.role_rank(), c.position));
        out.extend(here);
        below = head;
    }
    Ok(out)
}

//! Labeled dependency trees, d-binding, the potential-antecedent constraint,
//! and incremental attachment over competing phrase readings.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::LookupError;
use crate::lexicon::category::{DET_POSSESSIVE, FINITE_VERB, NOUN};
use crate::lexicon::{CategoryHierarchy, Feature, FeatureStructure, KnowledgeBase, Lexeme, Relation, ValueSet};

/// A word in a reading: its lexeme plus the features narrowed by attachment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordNode {
    pub position: usize,
    pub lexeme: Arc<Lexeme>,
    pub resolved: FeatureStructure,
    pub entity: Option<String>,
}

/// A head–modifier arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dependency {
    pub head: usize,
    pub modifier: usize,
    pub relation: Relation,
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}>{})", self.relation, self.head, self.modifier)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error("word {0} already has a head")]
    AlreadyHeaded(usize),
    #[error("attaching {modifier} under {head} would create a cycle")]
    Cycle { head: usize, modifier: usize },
    #[error("reading {0} is dead")]
    DeadReading(ReadingId),
}

/// Forest over token positions `1..=len`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyTree {
    nodes: Vec<WordNode>,
    heads: Vec<Option<(usize, Relation)>>,
}

impl DependencyTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a word at the next position and returns that position.
    pub fn push(&mut self, lexeme: Arc<Lexeme>, entity: Option<String>) -> usize {
        let position = self.nodes.len() + 1;
        let resolved = lexeme.features;
        self.nodes.push(WordNode { position, lexeme, resolved, entity });
        self.heads.push(None);
        position
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check(&self, pos: usize) -> Result<usize, LookupError> {
        if pos >= 1 && pos <= self.nodes.len() {
            Ok(pos - 1)
        } else {
            Err(LookupError::Position(pos))
        }
    }

    pub fn node(&self, pos: usize) -> Result<&WordNode, LookupError> {
        Ok(&self.nodes[self.check(pos)?])
    }

    pub fn node_mut(&mut self, pos: usize) -> Result<&mut WordNode, LookupError> {
        let i = self.check(pos)?;
        Ok(&mut self.nodes[i])
    }

    pub fn nodes(&self) -> &[WordNode] {
        &self.nodes
    }

    pub fn head_of(&self, pos: usize) -> Result<Option<(usize, Relation)>, LookupError> {
        Ok(self.heads[self.check(pos)?])
    }

    /// The arc attaching `pos` to its head, if any.
    pub fn attachment_of(&self, pos: usize) -> Result<Option<Dependency>, LookupError> {
        Ok(self.head_of(pos)?.map(|(head, relation)| Dependency { head, modifier: pos, relation }))
    }

    /// Direct dependents of `pos`, in surface order.
    pub fn dependents(&self, pos: usize) -> Vec<(usize, Relation)> {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(i, h)| match h {
                Some((head, rel)) if *head == pos => Some((i + 1, *rel)),
                _ => None,
            })
            .collect()
    }

    pub fn arcs(&self) -> Vec<Dependency> {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.map(|(head, relation)| Dependency { head, modifier: i + 1, relation }))
            .collect()
    }

    /// Count of existing dependents of `head` per relation.
    pub fn fillers(&self, head: usize) -> BTreeMap<Relation, u32> {
        let mut out = BTreeMap::new();
        for (_, rel) in self.dependents(head) {
            *out.entry(rel).or_insert(0) += 1;
        }
        out
    }

    pub fn set_head(&mut self, head: usize, modifier: usize, relation: Relation) -> Result<(), TreeError> {
        let m = self.check(modifier)?;
        self.check(head)?;
        if self.heads[m].is_some() {
            return Err(TreeError::AlreadyHeaded(modifier));
        }
        if head == modifier || self.head_chain(head)?.contains(&modifier) {
            return Err(TreeError::Cycle { head, modifier });
        }
        self.heads[m] = Some((head, relation));
        Ok(())
    }

    /// Strict ancestors of `pos`, nearest first.
    pub fn head_chain(&self, pos: usize) -> Result<Vec<usize>, LookupError> {
        let mut out = Vec::new();
        let mut cur = self.heads[self.check(pos)?];
        while let Some((h, _)) = cur {
            out.push(h);
            cur = self.heads[h - 1];
        }
        Ok(out)
    }

    /// `x head⁺ y`: `x` transitively heads `y`.
    pub fn head_plus(&self, x: usize, y: usize) -> Result<bool, LookupError> {
        self.check(x)?;
        Ok(self.head_chain(y)?.contains(&x))
    }

    /// `x left⁺ y`.
    pub fn left_plus(&self, x: usize, y: usize) -> bool {
        x < y
    }

    /// Whether `z` blocks d-binding across it: a finite verb, or a word with
    /// a possessive specifier or a nominal saxGen/ppAtt/genAtt dependent.
    pub fn is_binding_barrier(&self, cats: &CategoryHierarchy, z: usize) -> Result<bool, LookupError> {
        if cats.is(&self.node(z)?.lexeme.category, FINITE_VERB) {
            return Ok(true);
        }
        Ok(self.dependents(z).into_iter().any(|(u, rel)| {
            let cat = &self.nodes[u - 1].lexeme.category;
            match rel {
                Relation::Spec => cats.is(cat, DET_POSSESSIVE),
                Relation::SaxGen | Relation::PpAtt | Relation::GenAtt => cats.is(cat, NOUN),
                _ => false,
            }
        }))
    }

    /// `x d-binds y`.
    pub fn d_binds(&self, cats: &CategoryHierarchy, x: usize, y: usize) -> Result<bool, LookupError> {
        self.check(x)?;
        let chain = self.head_chain(y)?;
        let Some(at) = chain.iter().position(|&h| h == x) else {
            return Ok(false);
        };
        for &z in &chain[..at] {
            if self.is_binding_barrier(cats, z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every word that d-binds `y`: the head chain up to and including the
    /// first barrier.
    pub fn d_binders(&self, cats: &CategoryHierarchy, y: usize) -> Result<Vec<usize>, LookupError> {
        let mut out = Vec::new();
        for z in self.head_chain(y)? {
            out.push(z);
            if self.is_binding_barrier(cats, z)? {
                break;
            }
        }
        Ok(out)
    }

    /// `x isPotentialAnaphoricAntecedentOf y` within one tree.
    ///
    /// Words in different sentences share no d-binder and no head, so for
    /// intersentential pairs the constraint holds trivially and is not
    /// evaluated.
    pub fn is_potential_anaphoric_antecedent(
        &self,
        cats: &CategoryHierarchy,
        x: usize,
        y: usize,
    ) -> Result<bool, LookupError> {
        let binders_x = self.d_binders(cats, x)?;
        let binders_y = self.d_binders(cats, y)?;
        if binders_y.iter().any(|z| binders_x.contains(z)) {
            return Ok(false);
        }
        let x_chain = self.head_chain(x)?;
        let dominated = binders_y.iter().any(|u| x_chain.contains(u));
        Ok(!dominated || self.left_plus(x, y))
    }
}

/// Identifier of a phrase reading within one sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReadingId(pub u32);

impl fmt::Display for ReadingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// One syntactic interpretation of the words read so far.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseReading {
    pub id: ReadingId,
    pub tree: DependencyTree,
    pub alive: bool,
    pub death_cause: Option<String>,
}

impl PhraseReading {
    pub fn new(id: ReadingId) -> Self {
        PhraseReading { id, tree: DependencyTree::new(), alive: true, death_cause: None }
    }

    pub fn kill(&mut self, cause: impl Into<String>) {
        self.alive = false;
        self.death_cause = Some(cause.into());
    }
}

/// Competing readings over the same span of words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Container {
    pub readings: Vec<PhraseReading>,
}

impl Container {
    pub fn new(readings: Vec<PhraseReading>) -> Self {
        Container { readings }
    }

    /// Number of words covered; equal for every reading.
    pub fn span(&self) -> usize {
        let len = self.readings.first().map_or(0, |r| r.tree.len());
        debug_assert!(self.readings.iter().all(|r| r.tree.len() == len));
        len
    }

    pub fn live(&self) -> impl Iterator<Item = &PhraseReading> {
        self.readings.iter().filter(|r| r.alive)
    }

    pub fn live_count(&self) -> usize {
        self.live().count()
    }
}

/// Result of trying one modifier under one head with candidate relations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttachOutcome {
    pub successors: Vec<PhraseReading>,
    /// Relations that could not be used, with the reason.
    pub rejected: Vec<(Relation, String)>,
}

/// The case a relation imposes on its modifier.
pub fn demanded_case(relation: Relation, head: &Lexeme) -> Option<ValueSet> {
    let case = |v: &str| ValueSet::parse(Feature::Case, v).expect("static case name");
    match relation {
        Relation::Subject => Some(case("nom")),
        Relation::Object => Some(case("acc")),
        Relation::GenAtt | Relation::SaxGen => Some(case("gen")),
        Relation::PpObject => head.features.extract(Feature::Case),
        _ => None,
    }
}

/// Attaches `modifier` under `head` once per admissible relation.
///
/// Each candidate relation that survives valence, category, case/agreement
/// and `permit` checks yields one successor reading. A single successor keeps
/// the parent's id; otherwise successors draw fresh ids from `next_id`.
pub fn attach(
    reading: &PhraseReading,
    kb: &KnowledgeBase,
    head: usize,
    modifier: usize,
    relations: &[Relation],
    next_id: &mut dyn FnMut() -> ReadingId,
) -> Result<AttachOutcome, TreeError> {
    if !reading.alive {
        return Err(TreeError::DeadReading(reading.id));
    }
    let tree = &reading.tree;
    tree.node(head)?;
    if tree.head_of(modifier)?.is_some() {
        return Err(TreeError::AlreadyHeaded(modifier));
    }
    if head == modifier || tree.head_chain(head)?.contains(&modifier) {
        return Err(TreeError::Cycle { head, modifier });
    }

    let mut outcome = AttachOutcome::default();
    let mut trees = Vec::new();
    let mut seen = Vec::new();
    for &rel in relations {
        if seen.contains(&rel) {
            continue;
        }
        seen.push(rel);
        match try_relation(tree, kb, head, modifier, rel) {
            Ok(t) => trees.push(t),
            Err(reason) => outcome.rejected.push((rel, reason)),
        }
    }
    let fork = trees.len() > 1;
    outcome.successors = trees
        .into_iter()
        .map(|tree| PhraseReading {
            id: if fork { next_id() } else { reading.id },
            tree,
            alive: true,
            death_cause: None,
        })
        .collect();
    Ok(outcome)
}

fn try_relation(
    tree: &DependencyTree,
    kb: &KnowledgeBase,
    head: usize,
    modifier: usize,
    rel: Relation,
) -> Result<DependencyTree, String> {
    let h = &tree.nodes[head - 1];
    let m = &tree.nodes[modifier - 1];
    let cats = &kb.categories;
    if !h.lexeme.governs(rel) {
        return Err(format!("{} has no {rel} slot", h.lexeme.form));
    }
    if rel.is_single_slot() {
        if let Some((other, _)) = tree.dependents(head).into_iter().find(|(_, r)| *r == rel) {
            return Err(format!(
                "{rel} slot of {} already filled by {}",
                h.lexeme.form,
                tree.nodes[other - 1].lexeme.form
            ));
        }
    }
    let mcat = &m.lexeme.category;
    let licensed = if rel.takes_nominal() {
        cats.is_nominal(mcat)
    } else if rel == Relation::Spec {
        cats.is_determiner(mcat)
    } else {
        !cats.is_nominal(mcat) && !cats.is_determiner(mcat)
    };
    if !licensed {
        return Err(format!("{mcat} {} cannot fill {rel}", m.lexeme.form));
    }

    let mut next = tree.clone();
    if rel == Relation::Spec {
        let merged = h.resolved.unify(&m.resolved);
        if merged.is_bottom() {
            return Err(format!("{} and {} disagree", m.lexeme.form, h.lexeme.form));
        }
        next.nodes[head - 1].resolved = merged;
        next.nodes[modifier - 1].resolved = merged;
    } else if let Some(case) = demanded_case(rel, &h.lexeme) {
        let narrowed = m.resolved.unify(&FeatureStructure::empty().with(Feature::Case, case));
        if narrowed.is_bottom() {
            return Err(format!("{} cannot be {} as {rel}", m.lexeme.form, case.render(Feature::Case)));
        }
        next.nodes[modifier - 1].resolved = narrowed;
    }

    let head_concept = concept_of_node(kb, h);
    let mod_concept = concept_of_node(kb, m);
    if let (Some(hc), Some(mc)) = (head_concept, mod_concept) {
        match kb.taxonomy.permit(hc, rel, mc, &tree.fillers(head)) {
            Ok(true) => {}
            Ok(false) => return Err(format!("permit({hc}, {rel}, {mc}) fails")),
            Err(e) => return Err(e.to_string()),
        }
    }
    next.set_head(head, modifier, rel).map_err(|e| e.to_string())?;
    Ok(next)
}

/// Concept of a node: its entity's type when the taxonomy knows the entity,
/// else its lexeme's.
pub fn concept_of_node<'a>(kb: &'a KnowledgeBase, node: &'a WordNode) -> Option<&'a str> {
    node.entity
        .as_deref()
        .and_then(|e| kb.taxonomy.concept_of(e).ok())
        .or_else(|| node.lexeme.concept.as_deref().and_then(|c| kb.taxonomy.concept_of(c).ok()))
}

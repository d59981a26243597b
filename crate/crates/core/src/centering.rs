//! Backward- and forward-looking centers, transitions, and the two-level
//! ambiguity representation.
//!
//! An [`AmbiguitySpace`] belongs to one finished utterance. Its master
//! [`CenteringState`] holds one [`CenterReading`] per global reading of that
//! utterance and is never modified afterwards. While the next sentence is
//! parsed, every antecedent search takes a private copy of the state owned
//! by its phrase reading, so competing local readings never see each
//! other's consumptions or bindings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dependency::{DependencyTree, ReadingId};
use crate::error::LookupError;
use crate::lexicon::category::FINITE_VERB;
use crate::lexicon::{CategoryHierarchy, FeatureStructure};

/// One element of a Cf list: an entity and the expression realizing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterEntry {
    pub entity: String,
    pub expression: String,
    pub category: String,
    pub features: FeatureStructure,
    pub concept: String,
}

impl fmt::Display for CenterEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.expression)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    #[serde(rename = "CONTINUE")]
    Continue,
    #[serde(rename = "RETAIN")]
    Retain,
    #[serde(rename = "SMOOTH-SHIFT")]
    SmoothShift,
    #[serde(rename = "ROUGH-SHIFT")]
    RoughShift,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::Continue => "CONTINUE",
            Transition::Retain => "RETAIN",
            Transition::SmoothShift => "SMOOTH-SHIFT",
            Transition::RoughShift => "ROUGH-SHIFT",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CenterId(pub u32);

impl fmt::Display for CenterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// One (Cb, Cf) reading of an utterance.
///
/// In a working copy, `consumed` and `bindings` record what the current
/// sentence's anaphors took from this reading; in a master they are empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterReading {
    pub id: CenterId,
    pub utterance: u32,
    pub cb: Option<CenterEntry>,
    pub cf: Vec<CenterEntry>,
    pub consumed: Vec<String>,
    /// `None` only for the placeholder that precedes the first utterance.
    pub transition: Option<Transition>,
    /// Anaphor position in the current sentence → antecedent entity.
    pub bindings: BTreeMap<usize, String>,
}

impl CenterReading {
    /// The empty reading standing in for "no previous utterance".
    pub fn discourse_start() -> Self {
        CenterReading {
            id: CenterId(0),
            utterance: 0,
            cb: None,
            cf: Vec::new(),
            consumed: Vec::new(),
            transition: None,
            bindings: BTreeMap::new(),
        }
    }

    pub fn is_discourse_start(&self) -> bool {
        self.utterance == 0
    }

    pub fn cb_entity(&self) -> Option<&str> {
        self.cb.as_ref().map(|e| e.entity.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenteringState {
    pub id: StateId,
    pub readings: Vec<CenterReading>,
    pub origin_phrase: Option<ReadingId>,
}

impl CenteringState {
    pub fn reading(&self, id: CenterId) -> Option<&CenterReading> {
        self.readings.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CenteringError {
    #[error("entity {entity} is not in the Cf of {reading}")]
    NotInCf { reading: CenterId, entity: String },
    #[error("no reading of utterance {0} survived")]
    NoSurvivors(u32),
    #[error("unknown centering state {0}")]
    UnknownState(StateId),
    #[error("state id {0} is already in use")]
    StateInUse(StateId),
    #[error("unknown previous center reading {0}")]
    UnknownCenter(CenterId),
}

/// The set of centering states derived from one utterance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguitySpace {
    utterance: u32,
    master: CenteringState,
    copies: BTreeMap<StateId, CenteringState>,
    next_state: u32,
}

impl AmbiguitySpace {
    /// Space before the first utterance: one empty placeholder reading.
    pub fn discourse_start() -> Self {
        Self::from_readings(0, vec![CenterReading::discourse_start()])
    }

    fn from_readings(utterance: u32, readings: Vec<CenterReading>) -> Self {
        AmbiguitySpace {
            utterance,
            master: CenteringState { id: StateId(0), readings, origin_phrase: None },
            copies: BTreeMap::new(),
            next_state: 1,
        }
    }

    pub fn utterance(&self) -> u32 {
        self.utterance
    }

    pub fn master(&self) -> &CenteringState {
        &self.master
    }

    pub fn copies(&self) -> impl Iterator<Item = &CenteringState> {
        self.copies.values()
    }

    /// Master first, then copies by id.
    pub fn states(&self) -> impl Iterator<Item = &CenteringState> {
        std::iter::once(&self.master).chain(self.copies.values())
    }

    pub fn state(&self, id: StateId) -> Option<&CenteringState> {
        if id == self.master.id {
            Some(&self.master)
        } else {
            self.copies.get(&id)
        }
    }

    /// Mutable access to a copy. The master is not reachable this way.
    pub fn copy_mut(&mut self, id: StateId) -> Option<&mut CenteringState> {
        self.copies.get_mut(&id)
    }

    /// Allocates an id for a copy that will be made later.
    pub fn reserve_state_id(&mut self) -> StateId {
        let id = StateId(self.next_state);
        self.next_state += 1;
        id
    }

    /// Deep copy of the master for `for_phrase`.
    pub fn copy_state(&mut self, for_phrase: ReadingId) -> StateId {
        let id = self.reserve_state_id();
        self.copy_into(self.master.id, id, for_phrase).expect("fresh id, master exists");
        id
    }

    /// Deep copy of `source` (master or copy) registered under `id`.
    pub fn copy_into(&mut self, source: StateId, id: StateId, for_phrase: ReadingId) -> Result<(), CenteringError> {
        if id == self.master.id || self.copies.contains_key(&id) {
            return Err(CenteringError::StateInUse(id));
        }
        let mut copy = self.state(source).ok_or(CenteringError::UnknownState(source))?.clone();
        copy.id = id;
        copy.origin_phrase = Some(for_phrase);
        self.copies.insert(id, copy);
        Ok(())
    }
}

/// Removes `entity` from the reading's Cf so no later anaphor of the same
/// sentence can take it.
pub fn consume_antecedent(reading: &mut CenterReading, entity: &str) -> Result<(), CenteringError> {
    let idx = reading
        .cf
        .iter()
        .position(|e| e.entity == entity)
        .ok_or_else(|| CenteringError::NotInCf { reading: reading.id, entity: entity.to_string() })?;
    reading.cf.remove(idx);
    reading.consumed.push(entity.to_string());
    Ok(())
}

/// Orders the entities realized in a sentence: clause by clause (matrix
/// first), and within a clause SUBJECT > OBJECT(S) > OTHERS, others by
/// surface order. Later duplicates of an entity are dropped.
pub fn rank_cf(
    tree: &DependencyTree,
    cats: &CategoryHierarchy,
    realized: &[(usize, CenterEntry)],
) -> Result<Vec<CenterEntry>, LookupError> {
    let mut keyed = Vec::with_capacity(realized.len());
    for (pos, entry) in realized {
        let chain = tree.head_chain(*pos)?;
        let verbs: Vec<usize> = chain
            .iter()
            .copied()
            .filter(|&h| tree.node(h).is_ok_and(|n| cats.is(&n.lexeme.category, FINITE_VERB)))
            .collect();
        // words outside every clause go last
        let (depth, clause) = match verbs.first() {
            Some(&v) => (verbs.len(), v),
            None => (usize::MAX, 0),
        };
        let role = tree.head_of(*pos)?.map_or(2, |(_, rel)| rel.role_rank());
        keyed.push(((depth, clause, role, *pos), entry));
    }
    keyed.sort_by_key(|(k, _)| *k);
    let mut out: Vec<CenterEntry> = Vec::new();
    for (_, entry) in keyed {
        if !out.iter().any(|e| e.entity == entry.entity) {
            out.push(entry.clone());
        }
    }
    Ok(out)
}

/// Classifies the step from `prev` to an utterance with backward-looking
/// center `cb` and ranked `cf`. Without a Cb the step is a rough shift.
pub fn compute_transition(prev: &CenterReading, cb: Option<&str>, cf: &[CenterEntry]) -> Transition {
    let Some(cb) = cb else {
        return Transition::RoughShift;
    };
    let prev_cb = prev.cb_entity();
    let on_top = cf.first().is_some_and(|e| e.entity == cb);
    let kept = prev_cb == Some(cb);
    match (kept || prev_cb.is_none(), on_top) {
        (true, true) => Transition::Continue,
        _ if kept => Transition::Retain,
        (_, true) => Transition::SmoothShift,
        _ => Transition::RoughShift,
    }
}

/// A finished phrase reading paired with one previous center reading, with
/// the Cf it realizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitCandidate {
    pub origin: ReadingId,
    pub previous: CenterId,
    pub cf: Vec<CenterEntry>,
}

/// Builds the space of the utterance just finished.
///
/// The Cb of each new reading is the highest-ranked element of the
/// predecessor's original Cf that the utterance realizes; the discourse's
/// first utterance takes its own top-ranked element and counts as a
/// continuation.
pub fn commit_utterance(
    space: &AmbiguitySpace,
    candidates: &[CommitCandidate],
) -> Result<AmbiguitySpace, CenteringError> {
    let utterance = space.utterance + 1;
    if candidates.is_empty() {
        return Err(CenteringError::NoSurvivors(utterance));
    }
    let mut readings = Vec::with_capacity(candidates.len());
    for (i, cand) in candidates.iter().enumerate() {
        let prev = space.master.reading(cand.previous).ok_or(CenteringError::UnknownCenter(cand.previous))?;
        let (cb, transition) = if prev.is_discourse_start() {
            (cand.cf.first().cloned(), Transition::Continue)
        } else {
            let cb = prev
                .cf
                .iter()
                .find_map(|p| cand.cf.iter().find(|c| c.entity == p.entity))
                .cloned();
            let t = compute_transition(prev, cb.as_ref().map(|e| e.entity.as_str()), &cand.cf);
            (cb, t)
        };
        readings.push(CenterReading {
            id: CenterId(i as u32 + 1),
            utterance,
            cb,
            cf: cand.cf.clone(),
            consumed: Vec::new(),
            transition: Some(transition),
            bindings: BTreeMap::new(),
        });
    }
    Ok(AmbiguitySpace::from_readings(utterance, readings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str) -> CenterEntry {
        CenterEntry {
            entity: id.into(),
            expression: id.to_lowercase(),
            category: "Noun".into(),
            features: FeatureStructure::empty(),
            concept: id.into(),
        }
    }

    fn reading(cb: Option<&str>, cf: &[&str]) -> CenterReading {
        CenterReading {
            id: CenterId(1),
            utterance: 1,
            cb: cb.map(entry),
            cf: cf.iter().map(|e| entry(e)).collect(),
            consumed: vec![],
            transition: Some(Transition::Continue),
            bindings: BTreeMap::new(),
        }
    }

    fn cf(ids: &[&str]) -> Vec<CenterEntry> {
        ids.iter().map(|e| entry(e)).collect()
    }

    #[test]
    fn transitions_from_table() {
        let prev = reading(Some("LPS-105"), &["LPS-105", "PERFORMANCE"]);
        assert_eq!(
            compute_transition(&prev, Some("LPS-105"), &cf(&["LPS-105", "ST-3144"])),
            Transition::Continue
        );
        assert_eq!(
            compute_transition(&prev, Some("LPS-105"), &cf(&["ST-3144", "LPS-105"])),
            Transition::Retain
        );
        assert_eq!(
            compute_transition(&prev, Some("ST-3144"), &cf(&["ST-3144", "LPS-105"])),
            Transition::SmoothShift
        );
        assert_eq!(
            compute_transition(&prev, Some("ST-3144"), &cf(&["LPS-105", "ST-3144"])),
            Transition::RoughShift
        );
    }

    #[test]
    fn no_previous_cb_with_cb_on_top_continues() {
        let prev = reading(None, &["X"]);
        assert_eq!(compute_transition(&prev, Some("X"), &cf(&["X"])), Transition::Continue);
    }

    #[test]
    fn consume_preserves_order_of_rest() {
        let mut r = reading(None, &["LPS-105", "PERFORMANCE"]);
        consume_antecedent(&mut r, "LPS-105").unwrap();
        assert_eq!(r.cf, cf(&["PERFORMANCE"]));
        assert_eq!(r.consumed, vec!["LPS-105".to_string()]);
        consume_antecedent(&mut r, "PERFORMANCE").unwrap();
        assert!(r.cf.is_empty());
    }

    #[test]
    fn double_consumption_is_an_error() {
        let mut r = reading(None, &["LPS-105"]);
        consume_antecedent(&mut r, "LPS-105").unwrap();
        assert!(matches!(consume_antecedent(&mut r, "LPS-105"), Err(CenteringError::NotInCf { .. })));
    }

    #[test]
    fn copies_are_independent_of_master_and_each_other() {
        let mut space = AmbiguitySpace::from_readings(1, vec![reading(Some("A"), &["A", "B"])]);
        let before = serde_json::to_string(space.master()).unwrap();
        let a = space.copy_state(ReadingId(1));
        let b = space.copy_state(ReadingId(2));
        consume_antecedent(&mut space.copy_mut(a).unwrap().readings[0], "A").unwrap();
        assert_eq!(space.state(b).unwrap().readings[0].cf.len(), 2);
        assert_eq!(serde_json::to_string(space.master()).unwrap(), before);
        assert_eq!(space.states().count(), 3);
        assert_eq!(space.state(a).unwrap().origin_phrase, Some(ReadingId(1)));
    }

    #[test]
    fn no_copies_leaves_only_master() {
        let mut space = AmbiguitySpace::discourse_start();
        assert_eq!(space.states().count(), 1);
        assert!(space.copy_mut(StateId(0)).is_none());
    }

    #[test]
    fn commit_with_disjoint_entities_has_no_cb() {
        let space = AmbiguitySpace::from_readings(1, vec![reading(Some("A"), &["A", "B"])]);
        let next = commit_utterance(
            &space,
            &[CommitCandidate { origin: ReadingId(1), previous: CenterId(1), cf: cf(&["C", "D"]) }],
        )
        .unwrap();
        let r = &next.master().readings[0];
        assert_eq!(r.cb, None);
        assert_eq!(r.transition, Some(Transition::RoughShift));
    }

    #[test]
    fn commit_without_survivors_fails() {
        let space = AmbiguitySpace::discourse_start();
        assert_eq!(commit_utterance(&space, &[]), Err(CenteringError::NoSurvivors(1)));
    }

    #[test]
    fn first_utterance_takes_its_top_entity() {
        let space = AmbiguitySpace::discourse_start();
        let next = commit_utterance(
            &space,
            &[CommitCandidate { origin: ReadingId(1), previous: CenterId(0), cf: cf(&["LPS-105", "PERFORMANCE"]) }],
        )
        .unwrap();
        let r = &next.master().readings[0];
        assert_eq!(r.cb_entity(), Some("LPS-105"));
        assert_eq!(r.transition, Some(Transition::Continue));
        assert_eq!(next.utterance(), 1);
    }
}

//! The incremental driver: words are attached one at a time in every live
//! phrase reading, and each anaphor that becomes attached launches an
//! antecedent search per reading.

pub mod protocol;
pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use protocol::{CenterOutcome, Message, MessageKind, Resolution, Role, Schedule, TraceEvent, TraceLevel};
pub use report::{
    classify_pronoun_ambiguity, AmbiguityClass, AmbiguityReport, CenteringRow, CommittedReading, EpisodeRecord,
    PronounClass, ReadingDeath, RunReport, SentenceResult,
};

use crate::centering::{commit_utterance, rank_cf, AmbiguitySpace, CenterEntry, CenterId, CenteringError, CommitCandidate, StateId};
use crate::constraints::{anaphor_kind, AnaphorKind};
use crate::corpus::{AnnotatedToken, LoadedDocument};
use crate::dependency::{attach, concept_of_node, PhraseReading, ReadingId};
use crate::lexicon::{DiscourseEntity, KnowledgeBase, Lexeme, Relation};
use protocol::{Branch, Context, Scheduler};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub max_readings: usize,
    pub trace: TraceLevel,
    pub schedule: Schedule,
    /// Compare the previous utterance's master state before and after every
    /// batch of searches.
    pub check_isolation: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_readings: 32, trace: TraceLevel::Full, schedule: Schedule::Fifo, check_isolation: true }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("max readings must be at least 1")]
    InvalidConfig,
    #[error("no sentence is open")]
    NoSentence,
    #[error("token of sentence ({got}) while sentence ({open}) is open")]
    WrongSentence { open: u32, got: u32 },
    #[error("sentence ({sentence}) is already open")]
    SentenceOpen { sentence: u32 },
    #[error("sentence ({sentence}), token {position} `{surface}`: {count} readings exceed the limit of {max}")]
    FanOut { sentence: u32, position: usize, surface: String, count: usize, max: usize },
    #[error("sentence ({sentence}), token {position} `{surface}`: every reading died; last cause: {cause}")]
    AllReadingsDead { sentence: u32, position: usize, surface: String, cause: String },
    #[error("sentence ({sentence}): {source}")]
    Centering {
        sentence: u32,
        #[source]
        source: CenteringError,
    },
    #[error("sentence ({sentence}), token {position}: {message}")]
    Protocol { sentence: u32, position: usize, message: String },
    #[error("sentence ({sentence}): master centering state changed while searching for the anaphor at {anaphor}")]
    IsolationViolated { sentence: u32, anaphor: usize },
}

struct Track {
    reading: PhraseReading,
    state: StateId,
    triggered: BTreeSet<usize>,
}

/// What to do with a reading in which a word finds no head.
#[derive(Clone, Copy, PartialEq, Eq)]
enum OnFail {
    Keep,
    Kill,
}

pub struct Engine<'kb> {
    kb: &'kb KnowledgeBase,
    config: EngineConfig,
    scheduler: Scheduler,
    space: AmbiguitySpace,
    entities: BTreeMap<String, DiscourseEntity>,
    entity_concepts: BTreeMap<String, String>,
    sentence: Option<u32>,
    tokens: Vec<AnnotatedToken>,
    tracks: Vec<Track>,
    next_reading: u32,
    report: RunReport,
}

impl<'kb> Engine<'kb> {
    pub fn new(kb: &'kb KnowledgeBase, config: EngineConfig) -> Result<Self, EngineError> {
        if config.max_readings == 0 {
            return Err(EngineError::InvalidConfig);
        }
        Ok(Engine {
            kb,
            scheduler: Scheduler::new(config.schedule),
            config,
            space: AmbiguitySpace::discourse_start(),
            entities: BTreeMap::new(),
            entity_concepts: BTreeMap::new(),
            sentence: None,
            tokens: Vec::new(),
            tracks: Vec::new(),
            next_reading: 1,
            report: RunReport::default(),
        })
    }

    /// The space of the last finished utterance, with any working copies.
    pub fn space(&self) -> &AmbiguitySpace {
        &self.space
    }

    pub fn live_readings(&self) -> impl Iterator<Item = &PhraseReading> {
        self.tracks.iter().map(|t| &t.reading)
    }

    pub fn entities(&self) -> &BTreeMap<String, DiscourseEntity> {
        &self.entities
    }

    pub fn report(&self) -> &RunReport {
        &self.report
    }

    pub fn begin_sentence(&mut self, sentence: u32) -> Result<(), EngineError> {
        if let Some(open) = self.sentence {
            return Err(EngineError::SentenceOpen { sentence: open });
        }
        self.sentence = Some(sentence);
        self.tokens.clear();
        self.tracks = vec![Track {
            reading: PhraseReading::new(ReadingId(1)),
            state: self.space.master().id,
            triggered: BTreeSet::new(),
        }];
        self.next_reading = 2;
        Ok(())
    }

    fn fresh_reading(&mut self) -> ReadingId {
        let id = ReadingId(self.next_reading);
        self.next_reading += 1;
        id
    }

    fn open_sentence(&self) -> Result<u32, EngineError> {
        self.sentence.ok_or(EngineError::NoSentence)
    }

    fn reserve_entity(&mut self, tok: &AnnotatedToken) -> Option<String> {
        if !self.kb.categories.is_nominal(&tok.category) {
            return None;
        }
        let concept = tok.concept.as_ref()?;
        let kind = self.kb.taxonomy.concept_of(concept).ok()?.to_string();
        let id = if self.kb.taxonomy.is_instance(concept) {
            concept.clone()
        } else {
            let mut id = concept.clone();
            let mut n = 2;
            while self.entities.contains_key(&id) {
                id = format!("{concept}-{n}");
                n += 1;
            }
            id
        };
        self.entities.insert(
            id.clone(),
            DiscourseEntity { instance_id: id.clone(), concept: kind.clone(), last_expression: tok.surface.clone() },
        );
        self.entity_concepts.insert(id.clone(), kind);
        Some(id)
    }

    /// Adds one word to every live reading, attaches it and any earlier words
    /// waiting for it, and runs the searches this triggers.
    pub fn process_token(&mut self, tok: &AnnotatedToken) -> Result<(), EngineError> {
        let sentence = self.open_sentence()?;
        if tok.sentence != sentence {
            return Err(EngineError::WrongSentence { open: sentence, got: tok.sentence });
        }
        self.tokens.push(tok.clone());
        let pos = self.tokens.len();
        let entity = self.reserve_entity(tok);
        let lexemes: Vec<Arc<Lexeme>> = tok.lexemes().into_iter().map(Arc::new).collect();

        let mut next = Vec::new();
        for mut t in std::mem::take(&mut self.tracks) {
            if lexemes.len() == 1 {
                t.reading.tree.push(lexemes[0].clone(), entity.clone());
                next.push(t);
                continue;
            }
            for lx in &lexemes {
                let mut reading = t.reading.clone();
                reading.id = self.fresh_reading();
                reading.tree.push(lx.clone(), entity.clone());
                next.push(Track { reading, state: t.state, triggered: t.triggered.clone() });
            }
        }
        self.tracks = next;
        self.check_fanout(pos)?;

        // the word's own leftward attachment
        if tok.hints.is_empty() {
            self.fallback_task(pos, None)?;
        } else {
            let left = hint_groups(tok, pos, |target| target < pos);
            if !left.is_empty() {
                let on_fail = if tok.hints.iter().any(|h| h.offset > 0) { OnFail::Keep } else { OnFail::Kill };
                self.attach_task(pos, &left, on_fail)?;
            }
        }

        // earlier words waiting for this one
        for q in 1..pos {
            let waiting = &self.tokens[q - 1];
            if waiting.hints.is_empty() {
                continue;
            }
            let groups = hint_groups(waiting, q, |target| target == pos);
            if groups.is_empty() {
                continue;
            }
            let later = waiting.hints.iter().any(|h| q as i64 + h.offset as i64 > pos as i64);
            self.attach_task(q, &groups, if later { OnFail::Keep } else { OnFail::Kill })?;
        }
        if !tok.valence.is_empty() {
            for q in 1..pos {
                if self.tokens[q - 1].hints.is_empty() {
                    self.fallback_task(q, Some(pos))?;
                }
            }
        }
        Ok(())
    }

    fn check_fanout(&self, pos: usize) -> Result<(), EngineError> {
        let count = self.tracks.len();
        if count > self.config.max_readings {
            return Err(EngineError::FanOut {
                sentence: self.sentence.unwrap_or(0),
                position: pos,
                surface: self.tokens[pos - 1].surface.clone(),
                count,
                max: self.config.max_readings,
            });
        }
        Ok(())
    }

    /// Replaces `t` by its successors, assigning fresh ids on a fork.
    fn adopt(&mut self, t: Track, trees: Vec<PhraseReading>, out: &mut Vec<Track>) {
        let fork = trees.len() > 1;
        for mut r in trees {
            r.id = if fork { self.fresh_reading() } else { t.reading.id };
            out.push(Track { reading: r, state: t.state, triggered: t.triggered.clone() });
        }
    }

    /// Attaches `modifier` under one of the hinted heads in every reading
    /// where it is still headless.
    fn attach_task(&mut self, modifier: usize, groups: &[(usize, Vec<Relation>)], on_fail: OnFail) -> Result<(), EngineError> {
        let sentence = self.open_sentence()?;
        let mut next = Vec::new();
        let mut last_cause = String::new();
        for t in std::mem::take(&mut self.tracks) {
            if t.reading.tree.head_of(modifier).ok().flatten().is_some() {
                next.push(t);
                continue;
            }
            let mut successors = Vec::new();
            let mut reasons = Vec::new();
            for (head, rels) in groups {
                let parent = t.reading.id;
                match attach(&t.reading, self.kb, *head, modifier, rels, &mut || parent) {
                    Ok(o) => {
                        successors.extend(o.successors);
                        reasons.extend(o.rejected.into_iter().map(|(_, why)| why));
                    }
                    Err(e) => reasons.push(e.to_string()),
                }
            }
            if !successors.is_empty() {
                self.adopt(t, successors, &mut next);
            } else if on_fail == OnFail::Keep {
                next.push(t);
            } else {
                let cause = reasons.join("; ");
                last_cause.clone_from(&cause);
                self.report.deaths.push(ReadingDeath {
                    sentence,
                    reading: t.reading.id,
                    position: modifier,
                    surface: self.tokens[modifier - 1].surface.clone(),
                    cause,
                });
            }
        }
        self.tracks = next;
        self.after_task(modifier, last_cause)
    }

    /// Attachment without hints: `modifier` goes under the nearest preceding
    /// word that licenses it (or under `head` when given). Failure leaves it
    /// headless.
    fn fallback_task(&mut self, modifier: usize, head: Option<usize>) -> Result<(), EngineError> {
        let mut next = Vec::new();
        for t in std::mem::take(&mut self.tracks) {
            if t.reading.tree.head_of(modifier).ok().flatten().is_some() {
                next.push(t);
                continue;
            }
            let heads: Vec<usize> = match head {
                Some(h) => vec![h],
                None => (1..modifier).rev().collect(),
            };
            let mut successors = Vec::new();
            for h in heads {
                let rels: Vec<Relation> = match t.reading.tree.node(h) {
                    Ok(n) => n.lexeme.valence.iter().map(|v| v.relation).collect(),
                    Err(_) => continue,
                };
                let parent = t.reading.id;
                if let Ok(o) = attach(&t.reading, self.kb, h, modifier, &rels, &mut || parent) {
                    if !o.successors.is_empty() {
                        successors = o.successors;
                        break;
                    }
                }
            }
            if successors.is_empty() {
                next.push(t);
            } else {
                self.adopt(t, successors, &mut next);
            }
        }
        self.tracks = next;
        self.after_task(modifier, String::new())
    }

    fn after_task(&mut self, pos: usize, cause: String) -> Result<(), EngineError> {
        let sentence = self.open_sentence()?;
        if self.tracks.is_empty() {
            let surface = self.tokens[pos - 1].surface.clone();
            return Err(EngineError::AllReadingsDead { sentence, position: pos, surface, cause });
        }
        self.check_fanout(self.tokens.len())?;
        self.launch_searches(false)
    }

    /// Starts searches for anaphors that have become attached (or, at the
    /// end of the sentence, for every anaphor not yet searched for), one
    /// batch per round with at most one search per reading.
    fn launch_searches(&mut self, at_end: bool) -> Result<(), EngineError> {
        loop {
            let mut round = Vec::new();
            for (i, t) in self.tracks.iter().enumerate() {
                let tree = &t.reading.tree;
                for a in 1..=tree.len() {
                    if t.triggered.contains(&a) {
                        continue;
                    }
                    let Some(kind) = anaphor_kind(tree, self.kb, a) else { continue };
                    if at_end || tree.head_of(a).ok().flatten().is_some() {
                        round.push((i, a, kind));
                        break;
                    }
                }
            }
            if round.is_empty() {
                return Ok(());
            }
            self.run_round(&round)?;
        }
    }

    fn run_round(&mut self, round: &[(usize, usize, AnaphorKind)]) -> Result<(), EngineError> {
        let sentence = self.open_sentence()?;
        let live = self.tracks.len();
        let before = self.config.check_isolation.then(|| master_bytes(&self.space));
        let mut branches = Vec::with_capacity(round.len());
        for (idx, &(i, a, kind)) in round.iter().enumerate() {
            let t = &self.tracks[i];
            let target = self.space.reserve_state_id();
            branches.push(Branch::new(sentence, idx, t.reading.id, &t.reading.tree, a, kind, t.state, target));
        }
        let ctx = Context { kb: self.kb, entity_concepts: &self.entity_concepts };
        let mut events = Vec::new();
        self.scheduler
            .run(&mut branches, &ctx, &mut self.space, &mut events)
            .map_err(|e| EngineError::Protocol { sentence, position: round[0].1, message: e.to_string() })?;
        let level = self.config.trace;
        self.report.trace.extend(events.into_iter().filter(|e| level.keeps(e.step)));

        for (b, &(i, a, kind)) in branches.into_iter().zip(round) {
            let t = &mut self.tracks[i];
            t.state = b.target;
            t.triggered.insert(a);
            self.report.episodes.push(EpisodeRecord {
                sentence,
                anaphor: a,
                form: self.tokens[a - 1].surface.clone(),
                kind,
                reading: b.reading,
                live_readings: live,
                attachment: b.attachment,
                outcomes: b.outcomes,
            });
        }
        if let Some(before) = before {
            if master_bytes(&self.space) != before {
                return Err(EngineError::IsolationViolated { sentence, anaphor: round[0].1 });
            }
        }
        Ok(())
    }

    /// Finishes the open sentence: pending searches run, then every
    /// (phrase reading, center reading) pair becomes a reading of the new
    /// utterance.
    pub fn end_sentence(&mut self) -> Result<(), EngineError> {
        let sentence = self.open_sentence()?;
        self.launch_searches(true)?;
        let cats = &self.kb.categories;
        let mut candidates = Vec::new();
        let mut committed = Vec::new();
        for t in &self.tracks {
            let tree = &t.reading.tree;
            let state = self.space.state(t.state).ok_or(EngineError::Centering {
                sentence,
                source: CenteringError::UnknownState(t.state),
            })?;
            for cr in &state.readings {
                let mut realized = Vec::new();
                for node in tree.nodes() {
                    let Some(entity) = cr.bindings.get(&node.position).or(node.entity.as_ref()) else { continue };
                    let concept = self
                        .entity_concepts
                        .get(entity)
                        .cloned()
                        .or_else(|| concept_of_node(self.kb, node).map(str::to_string))
                        .unwrap_or_default();
                    realized.push((
                        node.position,
                        CenterEntry {
                            entity: entity.clone(),
                            expression: node.lexeme.form.clone(),
                            category: node.lexeme.category.clone(),
                            features: node.resolved,
                            concept,
                        },
                    ));
                }
                let cf = rank_cf(tree, cats, &realized).map_err(|e| EngineError::Protocol {
                    sentence,
                    position: 0,
                    message: e.to_string(),
                })?;
                candidates.push(CommitCandidate { origin: t.reading.id, previous: cr.id, cf });
                let bindings = t
                    .triggered
                    .iter()
                    .filter_map(|&a| {
                        let kind = anaphor_kind(tree, self.kb, a)?;
                        Some((a, (self.tokens[a - 1].surface.clone(), kind, cr.bindings.get(&a).cloned())))
                    })
                    .collect();
                committed.push(CommittedReading {
                    center: CenterId(candidates.len() as u32),
                    phrase: t.reading.id,
                    previous: cr.id,
                    bindings,
                });
            }
        }
        let next = commit_utterance(&self.space, &candidates).map_err(|source| EngineError::Centering { sentence, source })?;
        self.report.rows.extend(next.master().readings.iter().map(|r| CenteringRow::from_reading(sentence, r)));
        self.report.sentences.push(SentenceResult { sentence, readings: committed });
        self.space = next;
        self.tracks.clear();
        self.tokens.clear();
        self.sentence = None;
        Ok(())
    }

    /// Closes the run and classifies its pronouns.
    pub fn finish(mut self) -> RunReport {
        self.report.ambiguity = classify_pronoun_ambiguity(&self.report.episodes, &self.report.sentences);
        self.report
    }
}

/// Hinted heads of the word at `pos` whose position passes `keep`, with the
/// relations to try there, in hint order.
fn hint_groups(tok: &AnnotatedToken, pos: usize, keep: impl Fn(usize) -> bool) -> Vec<(usize, Vec<Relation>)> {
    let mut groups: Vec<(usize, Vec<Relation>)> = Vec::new();
    for h in &tok.hints {
        let target = pos as i64 + h.offset as i64;
        if target < 1 || !keep(target as usize) {
            continue;
        }
        let target = target as usize;
        match groups.iter_mut().find(|(t, _)| *t == target) {
            Some((_, rels)) => rels.push(h.relation),
            None => groups.push((target, vec![h.relation])),
        }
    }
    groups
}

fn master_bytes(space: &AmbiguitySpace) -> String {
    serde_json::to_string(space.master()).expect("centering state serializes")
}

/// Runs a whole document, or its first `sentences` sentences.
pub fn run_document(doc: &LoadedDocument, config: EngineConfig, sentences: Option<usize>) -> Result<RunReport, EngineError> {
    let mut engine = Engine::new(&doc.kb, config)?;
    let all = doc.document.sentences();
    let limit = sentences.unwrap_or(all.len()).min(all.len());
    for (id, tokens) in &all[..limit] {
        engine.begin_sentence(*id)?;
        for tok in *tokens {
            engine.process_token(tok)?;
        }
        engine.end_sentence()?;
    }
    let mut report = engine.finish();
    report.doc_id = doc.document.doc_id.clone();
    Ok(report)
}

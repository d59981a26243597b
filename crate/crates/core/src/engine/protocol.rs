//! Messages, trace events and the per-episode state machine.
//!
//! One [`Branch`] is one antecedent search launched by one anaphor in one
//! phrase reading. Sibling branches triggered by the same attachment step are
//! interleaved by a [`Scheduler`]; each touches only its own centering copy,
//! so any interleaving reaches the same result.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centering::{consume_antecedent, AmbiguitySpace, CenterId, CenteringError, StateId};
use crate::constraints::{anaphor_test, intrasentential_candidates, AnaphorKind, Candidate, Referent};
use crate::dependency::{concept_of_node, Dependency, DependencyTree, ReadingId};
use crate::lexicon::KnowledgeBase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    SearchNomAntecedent,
    SearchPronAntecedent,
    AntecedentFound,
    AnaphorSucceed,
    AnaphorReject,
    CfExhausted,
}

impl MessageKind {
    pub fn search(kind: AnaphorKind) -> Self {
        match kind {
            AnaphorKind::Nominal => MessageKind::SearchNomAntecedent,
            AnaphorKind::Pronominal => MessageKind::SearchPronAntecedent,
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Anaphor,
    PhraseActor,
    ContainerActor,
    ParserActor,
    CenteringActor,
    CenterActor,
    Head,
    Antecedent,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub kind: MessageKind,
    pub from: Role,
    pub to: Role,
    /// The anaphor's head arc in this reading, copied into every dispatch.
    pub attachment: Option<Dependency>,
    pub candidate: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub sentence: u32,
    pub step: u8,
    pub label: String,
    pub message: Message,
    pub reading: ReadingId,
    pub center: Option<CenterId>,
    pub anaphor: usize,
    pub anaphor_form: String,
    pub outcome: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.message;
        write!(
            f,
            "step={} msg={} from={} to={} reading={}:{}",
            self.label, m.kind, m.from, m.to, self.sentence, self.reading
        )?;
        if let Some(c) = self.center {
            write!(f, "/{c}")?;
        }
        write!(f, " payload=[anaphor={}:{}", self.anaphor, self.anaphor_form)?;
        match m.attachment {
            Some(d) => write!(f, " attachment={d}")?,
            None => f.write_str(" attachment=none")?,
        }
        if let Some(c) = &m.candidate {
            write!(f, " candidate={c}")?;
        }
        write!(f, "] outcome={}", self.outcome)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    Off,
    Summary,
    #[default]
    Full,
}

impl TraceLevel {
    /// Summary keeps dispatch, decisions and fall-through; full keeps all.
    pub fn keeps(self, step: u8) -> bool {
        match self {
            TraceLevel::Off => false,
            TraceLevel::Summary => matches!(step, 1 | 8 | 10 | 11 | 12 | 13 | 14 | 19),
            TraceLevel::Full => true,
        }
    }
}

/// How an anaphor ended up in one center reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Intersentential,
    Intrasentential,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterOutcome {
    pub center: CenterId,
    pub antecedent: Option<String>,
    pub resolution: Resolution,
}

/// Read-only context shared by the branches of one batch.
pub(crate) struct Context<'a> {
    pub kb: &'a KnowledgeBase,
    /// Entity id → concept.
    pub entity_concepts: &'a BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug)]
enum WalkItem {
    Head { level: usize, pos: usize },
    Candidate(Candidate),
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    Route(u8),
    Copy,
    Distribute(usize),
    Scan { c: usize, k: usize },
    Found { c: usize, k: usize },
    Permit { c: usize, k: usize },
    Succeed { c: usize, k: usize },
    Consume { c: usize, k: usize },
    Reject { c: usize, k: usize },
    Intra { c: usize },
    Walk { c: usize, i: usize },
    Test { c: usize, i: usize },
    Bind { c: usize, i: usize },
    Done,
}

pub(crate) struct Branch {
    pub sentence: u32,
    pub suffix: String,
    pub reading: ReadingId,
    pub anaphor: usize,
    pub kind: AnaphorKind,
    pub attachment: Option<Dependency>,
    pub source: StateId,
    pub target: StateId,
    pub outcomes: Vec<CenterOutcome>,
    form: String,
    tree: DependencyTree,
    phase: Phase,
    walk: Vec<WalkItem>,
}

/// Sibling suffix by branch order: "", "a", "b", … "z", "aa", …
pub fn sibling_suffix(index: usize) -> String {
    if index == 0 {
        return String::new();
    }
    let mut n = index;
    let mut out = Vec::new();
    while n > 0 {
        n -= 1;
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

impl Branch {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sentence: u32,
        index: usize,
        reading: ReadingId,
        tree: &DependencyTree,
        anaphor: usize,
        kind: AnaphorKind,
        source: StateId,
        target: StateId,
    ) -> Self {
        let attachment = tree.attachment_of(anaphor).ok().flatten();
        let form = tree.node(anaphor).map(|n| n.lexeme.form.clone()).unwrap_or_default();
        Branch {
            sentence,
            suffix: sibling_suffix(index),
            reading,
            anaphor,
            kind,
            attachment,
            source,
            target,
            outcomes: Vec::new(),
            form,
            tree: tree.clone(),
            phase: Phase::Route(1),
            walk: Vec::new(),
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    fn event(&self, step: u8, kind: MessageKind, from: Role, to: Role, center: Option<CenterId>) -> TraceEvent {
        TraceEvent {
            sentence: self.sentence,
            step,
            label: format!("{step}{}", self.suffix),
            message: Message { kind, from, to, attachment: self.attachment, candidate: None },
            reading: self.reading,
            center,
            anaphor: self.anaphor,
            anaphor_form: self.form.clone(),
            outcome: String::new(),
        }
    }

    fn center_id(&self, space: &AmbiguitySpace, c: usize) -> CenterId {
        space.state(self.target).expect("copied at step 5").readings[c].id
    }

    fn center_count(&self, space: &AmbiguitySpace) -> usize {
        space.state(self.target).map_or(0, |s| s.readings.len())
    }

    /// permit of the anaphor's head for an antecedent concept, not counting
    /// the anaphor's own arc. Without an attachment or a head concept it
    /// holds vacuously.
    fn permit(&self, ctx: &Context, ante_concept: Option<&str>) -> (bool, String) {
        let Some(dep) = self.attachment else {
            return (true, "permit vacuous (no attachment)".into());
        };
        let Some(head_concept) = self.tree.node(dep.head).ok().and_then(|n| concept_of_node(ctx.kb, n)) else {
            return (true, "permit vacuous (head has no concept)".into());
        };
        let Some(ante_concept) = ante_concept else {
            return (false, "permit fails (antecedent has no concept)".into());
        };
        let mut fillers = self.tree.fillers(dep.head);
        if let Some(n) = fillers.get_mut(&dep.relation) {
            *n = n.saturating_sub(1);
        }
        let ok = ctx.kb.taxonomy.permit(head_concept, dep.relation, ante_concept, &fillers).unwrap_or(false);
        let verdict = if ok { "succeeds" } else { "fails" };
        (ok, format!("permit({head_concept}, {}, {ante_concept}) {verdict}", dep.relation))
    }

    fn anaphor_referent<'a>(&'a self, ctx: &'a Context) -> Referent<'a> {
        let node = self.tree.node(self.anaphor).expect("anaphor is in its tree");
        Referent::of_node(ctx.kb, node)
    }

    fn test_name(&self) -> &'static str {
        match self.kind {
            AnaphorKind::Nominal => "NomAnaphorTest",
            AnaphorKind::Pronominal => "PronAnaphorTest",
        }
    }

    /// Entity and concept of an intrasentential candidate under center
    /// reading `c`: its binding there, else its own entity.
    fn candidate_entity(&self, ctx: &Context, space: &AmbiguitySpace, c: usize, pos: usize) -> Option<(String, Option<String>)> {
        let reading = &space.state(self.target)?.readings[c];
        let node = self.tree.node(pos).ok()?;
        let entity = reading.bindings.get(&pos).or(node.entity.as_ref())?.clone();
        let concept = ctx
            .entity_concepts
            .get(&entity)
            .cloned()
            .or_else(|| concept_of_node(ctx.kb, node).map(str::to_string));
        Some((entity, concept))
    }

    fn build_walk(&mut self, ctx: &Context) {
        let candidates = intrasentential_candidates(&self.tree, &ctx.kb.categories, self.anaphor).unwrap_or_default();
        let chain = self.tree.head_chain(self.anaphor).unwrap_or_default();
        self.walk.clear();
        for (i, &head) in chain.iter().enumerate() {
            self.walk.push(WalkItem::Head { level: i + 1, pos: head });
            self.walk
                .extend(candidates.iter().filter(|c| c.level == i + 1).map(|c| WalkItem::Candidate(*c)));
        }
    }

    fn finish_center(&mut self, space: &AmbiguitySpace, c: usize, antecedent: Option<String>, resolution: Resolution) {
        self.outcomes.push(CenterOutcome { center: self.center_id(space, c), antecedent, resolution });
        self.phase = Phase::Scan { c: c + 1, k: 0 };
    }

    /// Advances by one protocol step. Returns `None` once finished.
    pub fn step(&mut self, ctx: &Context, space: &mut AmbiguitySpace) -> Result<Option<TraceEvent>, CenteringError> {
        use MessageKind as K;
        use Role as R;
        let search = K::search(self.kind);
        loop {
            match self.phase {
                Phase::Done => return Ok(None),
                Phase::Route(n) => {
                    let (from, to) = match n {
                        1 => (R::Anaphor, R::PhraseActor),
                        2 => (R::PhraseActor, R::ContainerActor),
                        3 => (R::ContainerActor, R::ParserActor),
                        _ => (R::ParserActor, R::CenteringActor),
                    };
                    let mut ev = self.event(n, search, from, to, None);
                    ev.outcome = if n == 1 { "dispatched".into() } else { "forwarded".into() };
                    self.phase = if n < 4 { Phase::Route(n + 1) } else { Phase::Copy };
                    return Ok(Some(ev));
                }
                Phase::Copy => {
                    space.copy_into(self.source, self.target, self.reading)?;
                    let mut ev = self.event(5, search, R::CenteringActor, R::CenteringActor, None);
                    ev.outcome = format!("copied {} to {}", self.source, self.target);
                    self.phase = Phase::Distribute(0);
                    return Ok(Some(ev));
                }
                Phase::Distribute(c) => {
                    if c >= self.center_count(space) {
                        self.phase = Phase::Scan { c: 0, k: 0 };
                        continue;
                    }
                    let center = self.center_id(space, c);
                    let mut ev = self.event(6, search, R::CenteringActor, R::CenterActor, Some(center));
                    ev.outcome = "distributed".into();
                    self.phase = Phase::Distribute(c + 1);
                    return Ok(Some(ev));
                }
                Phase::Scan { c, k } => {
                    if c >= self.center_count(space) {
                        self.phase = Phase::Done;
                        return Ok(None);
                    }
                    let reading = &space.state(self.target).expect("copied").readings[c];
                    let center = reading.id;
                    if k >= reading.cf.len() {
                        let mut ev = self.event(13, K::CfExhausted, R::CenterActor, R::Anaphor, Some(center));
                        ev.outcome = "Cf list exhausted".into();
                        self.phase = Phase::Intra { c };
                        return Ok(Some(ev));
                    }
                    let entry = &reading.cf[k];
                    let ante = Referent { category: &entry.category, features: &entry.features, concept: Some(&entry.concept) };
                    let ok = anaphor_test(ctx.kb, self.kind, &self.anaphor_referent(ctx), &ante);
                    let mut ev = self.event(7, search, R::CenterActor, R::CenterActor, Some(center));
                    ev.message.candidate = Some(entry.entity.clone());
                    ev.outcome = format!("{} {}", self.test_name(), if ok { "succeeds" } else { "fails" });
                    self.phase = if ok { Phase::Found { c, k } } else { Phase::Scan { c, k: k + 1 } };
                    return Ok(Some(ev));
                }
                Phase::Found { c, k } => {
                    let reading = &space.state(self.target).expect("copied").readings[c];
                    let mut ev = self.event(8, K::AntecedentFound, R::CenterActor, R::Anaphor, Some(reading.id));
                    ev.message.candidate = Some(reading.cf[k].entity.clone());
                    ev.outcome = "antecedent proposed".into();
                    self.phase = Phase::Permit { c, k };
                    return Ok(Some(ev));
                }
                Phase::Permit { c, k } => {
                    let reading = &space.state(self.target).expect("copied").readings[c];
                    let entry = &reading.cf[k];
                    let (ok, text) = self.permit(ctx, Some(&entry.concept));
                    let mut ev = self.event(9, K::AntecedentFound, R::Anaphor, R::Head, Some(reading.id));
                    ev.message.candidate = Some(entry.entity.clone());
                    ev.outcome = text;
                    self.phase = if ok { Phase::Succeed { c, k } } else { Phase::Reject { c, k } };
                    return Ok(Some(ev));
                }
                Phase::Reject { c, k } => {
                    let reading = &space.state(self.target).expect("copied").readings[c];
                    let mut ev = self.event(12, K::AnaphorReject, R::Anaphor, R::CenterActor, Some(reading.id));
                    ev.message.candidate = Some(reading.cf[k].entity.clone());
                    ev.outcome = "rejected, scan continues".into();
                    self.phase = Phase::Scan { c, k: k + 1 };
                    return Ok(Some(ev));
                }
                Phase::Succeed { c, k } => {
                    let reading = &space.state(self.target).expect("copied").readings[c];
                    let mut ev = self.event(10, K::AnaphorSucceed, R::Anaphor, R::CenterActor, Some(reading.id));
                    ev.message.candidate = Some(reading.cf[k].entity.clone());
                    ev.outcome = "attachment confirmed".into();
                    self.phase = Phase::Consume { c, k };
                    return Ok(Some(ev));
                }
                Phase::Consume { c, k } => {
                    let copy = space.copy_mut(self.target).expect("copied");
                    let reading = &mut copy.readings[c];
                    let entity = reading.cf[k].entity.clone();
                    consume_antecedent(reading, &entity)?;
                    reading.bindings.insert(self.anaphor, entity.clone());
                    let center = reading.id;
                    let mut ev = self.event(11, K::AnaphorSucceed, R::CenterActor, R::CenterActor, Some(center));
                    ev.message.candidate = Some(entity.clone());
                    ev.outcome = format!("consumed {entity}; bound");
                    self.finish_center(space, c, Some(entity), Resolution::Intersentential);
                    return Ok(Some(ev));
                }
                Phase::Intra { c } => {
                    self.build_walk(ctx);
                    let center = self.center_id(space, c);
                    let mut ev = self.event(14, search, R::Anaphor, R::PhraseActor, Some(center));
                    ev.outcome = "intrasentential search".into();
                    self.phase = Phase::Walk { c, i: 0 };
                    return Ok(Some(ev));
                }
                Phase::Walk { c, i } => {
                    let center = self.center_id(space, c);
                    let Some(item) = self.walk.get(i).copied() else {
                        let mut ev = self.event(19, K::AnaphorReject, R::PhraseActor, R::Anaphor, Some(center));
                        ev.outcome = "no antecedent; unresolved".into();
                        self.finish_center(space, c, None, Resolution::Unresolved);
                        return Ok(Some(ev));
                    };
                    let ev = match item {
                        WalkItem::Head { level, pos } => {
                            let (step, from) = if level == 1 { (15, R::Anaphor) } else { (16, R::Head) };
                            let mut ev = self.event(step, search, from, R::Head, Some(center));
                            let form = self.tree.node(pos).map(|n| n.lexeme.form.clone()).unwrap_or_default();
                            ev.outcome = format!("Head{level} {pos}:{form}");
                            self.phase = Phase::Walk { c, i: i + 1 };
                            ev
                        }
                        WalkItem::Candidate(cand) => {
                            let mut ev = self.event(17, search, R::Head, R::Antecedent, Some(center));
                            let form = self.tree.node(cand.position).map(|n| n.lexeme.form.clone()).unwrap_or_default();
                            ev.message.candidate = Some(format!("{}:{form}", cand.position));
                            let head_form = self.tree.node(cand.head).map(|n| n.lexeme.form.clone()).unwrap_or_default();
                            ev.outcome = format!("reached {} of {}:{head_form}", cand.relation, cand.head);
                            self.phase = Phase::Test { c, i };
                            ev
                        }
                    };
                    return Ok(Some(ev));
                }
                Phase::Test { c, i } => {
                    let WalkItem::Candidate(cand) = self.walk[i] else { unreachable!("test follows a candidate") };
                    let center = self.center_id(space, c);
                    let mut ev = self.event(18, search, R::Antecedent, R::Antecedent, Some(center));
                    let resolved = self.candidate_entity(ctx, space, c, cand.position);
                    let (ok, text) = match &resolved {
                        None => (false, "candidate has no referent".to_string()),
                        Some((entity, concept)) => {
                            ev.message.candidate = Some(entity.clone());
                            let node = self.tree.node(cand.position).expect("candidate in tree");
                            let ante = Referent {
                                category: &node.lexeme.category,
                                features: &node.resolved,
                                concept: concept.as_deref(),
                            };
                            if !anaphor_test(ctx.kb, self.kind, &self.anaphor_referent(ctx), &ante) {
                                (false, format!("{} fails", self.test_name()))
                            } else {
                                let (ok, p) = self.permit(ctx, concept.as_deref());
                                (ok, format!("{} succeeds; {p}", self.test_name()))
                            }
                        }
                    };
                    ev.outcome = text;
                    self.phase = if ok { Phase::Bind { c, i } } else { Phase::Walk { c, i: i + 1 } };
                    return Ok(Some(ev));
                }
                Phase::Bind { c, i } => {
                    let WalkItem::Candidate(cand) = self.walk[i] else { unreachable!("bind follows a candidate") };
                    let (entity, _) = self.candidate_entity(ctx, space, c, cand.position).expect("tested above");
                    let copy = space.copy_mut(self.target).expect("copied");
                    let reading = &mut copy.readings[c];
                    reading.bindings.insert(self.anaphor, entity.clone());
                    let center = reading.id;
                    let mut ev = self.event(19, K::AntecedentFound, R::Antecedent, R::Anaphor, Some(center));
                    ev.message.candidate = Some(entity.clone());
                    ev.outcome = format!("bound to {entity} via {}:{}", cand.position, self.tree.node(cand.position).map(|n| n.lexeme.form.as_str()).unwrap_or(""));
                    self.finish_center(space, c, Some(entity), Resolution::Intrasentential);
                    return Ok(Some(ev));
                }
            }
        }
    }
}

/// Order in which sibling branches take steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// Round robin in dispatch order, one step each.
    #[default]
    Fifo,
    /// A seeded random interleaving; every branch still runs its own steps in order.
    Random(u64),
}

pub(crate) struct Scheduler {
    rng: Option<ChaCha8Rng>,
}

impl Scheduler {
    pub fn new(schedule: Schedule) -> Self {
        Scheduler {
            rng: match schedule {
                Schedule::Fifo => None,
                Schedule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
        }
    }

    /// Runs `branches` to completion, appending their events to `out`.
    pub fn run(
        &mut self,
        branches: &mut [Branch],
        ctx: &Context,
        space: &mut AmbiguitySpace,
        out: &mut Vec<TraceEvent>,
    ) -> Result<(), CenteringError> {
        match &mut self.rng {
            None => loop {
                let mut progressed = false;
                for b in branches.iter_mut() {
                    if let Some(ev) = b.step(ctx, space)? {
                        out.push(ev);
                        progressed = true;
                    }
                }
                if !progressed {
                    return Ok(());
                }
            },
            Some(rng) => loop {
                let open: Vec<usize> = (0..branches.len()).filter(|&i| !branches[i].is_done()).collect();
                if open.is_empty() {
                    return Ok(());
                }
                let pick = open[rng.random_range(0..open.len())];
                if let Some(ev) = branches[pick].step(ctx, space)? {
                    out.push(ev);
                }
            },
        }
    }
}

//! Run results and their text renderings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::protocol::{CenterOutcome, TraceEvent};
use crate::centering::{CenterId, CenterReading, Transition};
use crate::constraints::AnaphorKind;
use crate::dependency::{Dependency, ReadingId};

/// One row of the centering table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenteringRow {
    pub utterance: u32,
    pub reading: String,
    pub cb: Option<String>,
    pub cf: Vec<String>,
    pub transition: Transition,
}

impl CenteringRow {
    pub fn from_reading(utterance: u32, r: &CenterReading) -> Self {
        CenteringRow {
            utterance,
            reading: format!("R{}", r.id.0),
            cb: r.cb.as_ref().map(|e| e.to_string()),
            cf: r.cf.iter().map(|e| e.to_string()).collect(),
            transition: r.transition.unwrap_or(Transition::Continue),
        }
    }

    pub fn render(&self) -> String {
        format!(
            "({})\t{}\t{}\t[{}]\t{}",
            self.utterance,
            self.reading,
            self.cb.as_deref().unwrap_or("-"),
            self.cf.join(", "),
            self.transition
        )
    }
}

/// One antecedent search: an anaphor in one phrase reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub sentence: u32,
    pub anaphor: usize,
    pub form: String,
    pub kind: AnaphorKind,
    pub reading: ReadingId,
    /// Live phrase readings when the search was launched.
    pub live_readings: usize,
    pub attachment: Option<Dependency>,
    pub outcomes: Vec<CenterOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingDeath {
    pub sentence: u32,
    pub reading: ReadingId,
    pub position: usize,
    pub surface: String,
    pub cause: String,
}

/// A reading of a finished sentence: which phrase reading and previous
/// center reading it came from, and how its anaphors were bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommittedReading {
    pub center: CenterId,
    pub phrase: ReadingId,
    pub previous: CenterId,
    /// Anaphor position → (surface, kind, antecedent entity).
    pub bindings: BTreeMap<usize, (String, AnaphorKind, Option<String>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceResult {
    pub sentence: u32,
    pub readings: Vec<CommittedReading>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbiguityClass {
    Unambiguous,
    Local,
    Global,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounClass {
    pub sentence: u32,
    pub position: usize,
    pub form: String,
    pub class: AmbiguityClass,
    pub max_live_readings: usize,
    pub distinct_bindings: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    pub pronouns: Vec<PronounClass>,
    pub ambiguous: usize,
    pub local: usize,
    pub global: usize,
    pub unambiguous: usize,
}

impl AmbiguityReport {
    pub fn total(&self) -> usize {
        self.ambiguous + self.unambiguous
    }

    pub fn class_of(&self, sentence: u32, position: usize) -> Option<AmbiguityClass> {
        self.pronouns.iter().find(|p| p.sentence == sentence && p.position == position).map(|p| p.class)
    }
}

/// Classifies every pronominal anaphor of a run.
///
/// Locally ambiguous: some search for it started while more than one phrase
/// reading was alive. Otherwise globally ambiguous: the committed readings
/// of its sentence bind it differently. Otherwise unambiguous.
pub fn classify_pronoun_ambiguity(episodes: &[EpisodeRecord], sentences: &[SentenceResult]) -> AmbiguityReport {
    let mut live: BTreeMap<(u32, usize), (String, usize)> = BTreeMap::new();
    for e in episodes.iter().filter(|e| e.kind == AnaphorKind::Pronominal) {
        let slot = live.entry((e.sentence, e.anaphor)).or_insert((e.form.clone(), 0));
        slot.1 = slot.1.max(e.live_readings);
    }
    let mut report = AmbiguityReport::default();
    for ((sentence, position), (form, max_live)) in live {
        let bindings: BTreeSet<Option<&str>> = sentences
            .iter()
            .filter(|s| s.sentence == sentence)
            .flat_map(|s| &s.readings)
            .filter_map(|r| r.bindings.get(&position))
            .map(|(_, _, b)| b.as_deref())
            .collect();
        let class = if max_live > 1 {
            AmbiguityClass::Local
        } else if bindings.len() > 1 {
            AmbiguityClass::Global
        } else {
            AmbiguityClass::Unambiguous
        };
        match class {
            AmbiguityClass::Local => report.local += 1,
            AmbiguityClass::Global => report.global += 1,
            AmbiguityClass::Unambiguous => report.unambiguous += 1,
        }
        report.pronouns.push(PronounClass {
            sentence,
            position,
            form,
            class,
            max_live_readings: max_live,
            distinct_bindings: bindings.len(),
        });
    }
    report.ambiguous = report.local + report.global;
    report
}

/// Everything one document run produces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub doc_id: String,
    pub rows: Vec<CenteringRow>,
    pub sentences: Vec<SentenceResult>,
    pub episodes: Vec<EpisodeRecord>,
    pub deaths: Vec<ReadingDeath>,
    pub trace: Vec<TraceEvent>,
    pub ambiguity: AmbiguityReport,
}

fn percent(part: usize, total: usize) -> usize {
    if total == 0 {
        0
    } else {
        (200 * part + total) / (2 * total)
    }
}

impl RunReport {
    pub fn centering_text(&self) -> String {
        self.rows.iter().map(|r| r.render() + "\n").collect()
    }

    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|e| e.to_string() + "\n").collect()
    }

    pub fn ambiguity_text(&self) -> String {
        let a = &self.ambiguity;
        let t = a.total();
        let mut out = String::new();
        let _ = writeln!(out, "ambiguous\t{}\t({} %)", a.ambiguous, percent(a.ambiguous, t));
        let _ = writeln!(out, "  locally\t{}\t({} %)", a.local, percent(a.local, t));
        let _ = writeln!(out, "  globally\t{}\t({} %)", a.global, percent(a.global, t));
        let _ = writeln!(out, "unambiguous\t{}\t({} %)", a.unambiguous, percent(a.unambiguous, t));
        for p in &a.pronouns {
            let class = match p.class {
                AmbiguityClass::Local => "locally ambiguous",
                AmbiguityClass::Global => "globally ambiguous",
                AmbiguityClass::Unambiguous => "unambiguous",
            };
            let _ = writeln!(out, "# ({}) {}:{}\t{class}", p.sentence, p.position, p.form);
        }
        out
    }

    /// The whole report as one pretty-printed JSON object.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&serde_json::json!({
            "doc": self.doc_id,
            "centering": self.rows,
            "sentences": self.sentences,
            "episodes": self.episodes,
            "deaths": self.deaths,
            "trace": self.trace,
            "ambiguity": self.ambiguity,
        }))
    }

    pub fn resolution_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            let _ = writeln!(out, "sentence ({})", s.sentence);
            for e in self.episodes.iter().filter(|e| e.sentence == s.sentence) {
                let att = e.attachment.map_or("none".to_string(), |d| d.to_string());
                let _ = writeln!(
                    out,
                    "  search {}:{} {} in {} ({} live) attachment={att}",
                    e.anaphor,
                    e.form,
                    e.kind.name(),
                    e.reading,
                    e.live_readings
                );
                for o in &e.outcomes {
                    let ante = o.antecedent.as_deref().unwrap_or("-");
                    let _ = writeln!(out, "    {}: {ante} ({:?})", o.center, o.resolution);
                }
            }
            for d in self.deaths.iter().filter(|d| d.sentence == s.sentence) {
                let _ = writeln!(out, "  died {} at {}:{}: {}", d.reading, d.position, d.surface, d.cause);
            }
            for r in &s.readings {
                let binds: Vec<String> = r
                    .bindings
                    .iter()
                    .map(|(pos, (form, _, b))| format!("{pos}:{form}={}", b.as_deref().unwrap_or("unresolved")))
                    .collect();
                let _ = writeln!(out, "  R{} from {}/{}: {}", r.center.0, r.phrase, r.previous, binds.join(" "));
            }
        }
        out
    }
}

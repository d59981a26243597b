//! The annotated document format.
//!
//! One token per line, seven tab-separated fields:
//!
//! ```text
//! surface  lemma  category  morph  concept  valence  hints
//! ```
//!
//! `morph` lists alternative feature structures separated by `|`; `concept`
//! names a concept or instance; `valence` is a comma list of relations with
//! `!` marking obligatory ones; `hints` is a `|` list of `±offset:relation`
//! pointing at candidate heads. `_` stands for an empty field. Lines starting
//! with `#sent N` open a sentence, `#doc`, `#taxonomy` and `#categories` are
//! header directives, and any other `#` line is a comment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FormatError, LoadError};
use crate::lexicon::{CategoryHierarchy, FeatureStructure, KnowledgeBase, Lexeme, Relation, Taxonomy, Valence};

/// A candidate head at `offset` words from the token, with the relations to try.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachHint {
    pub offset: i32,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lemma: String,
    pub category: String,
    pub morph: Vec<FeatureStructure>,
    pub concept: Option<String>,
    pub valence: Vec<Valence>,
    pub sentence: u32,
    pub hints: Vec<AttachHint>,
}

impl AnnotatedToken {
    /// One lexeme per morphological reading.
    pub fn lexemes(&self) -> Vec<Lexeme> {
        self.morph
            .iter()
            .map(|fs| Lexeme {
                form: self.surface.clone(),
                lemma: self.lemma.clone(),
                category: self.category.clone(),
                features: *fs,
                concept: self.concept.clone(),
                valence: self.valence.clone(),
            })
            .collect()
    }

    fn parse_line(line: &str, sentence: u32) -> Result<Self, FormatError> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(FormatError::new(format!("expected 7 tab-separated fields, found {}", fields.len())));
        }
        let text = |i: usize, what: &str| -> Result<String, FormatError> {
            let f = fields[i].trim();
            if f.is_empty() {
                Err(FormatError::new(format!("empty {what}")))
            } else {
                Ok(f.to_string())
            }
        };
        let morph = fields[3]
            .split('|')
            .map(|m| m.trim().parse::<FeatureStructure>())
            .collect::<Result<Vec<_>, _>>()?;
        if morph.iter().any(FeatureStructure::is_bottom) {
            return Err(FormatError::new("inconsistent morphological reading"));
        }
        let concept = match fields[4].trim() {
            "_" | "" => None,
            c => Some(c.to_string()),
        };
        Ok(AnnotatedToken {
            surface: text(0, "surface")?,
            lemma: text(1, "lemma")?,
            category: text(2, "category")?,
            morph,
            concept,
            valence: parse_valence(fields[5].trim())?,
            sentence,
            hints: parse_hints(fields[6].trim())?,
        })
    }

    fn render(&self) -> String {
        let morph: Vec<String> = self.morph.iter().map(|m| m.to_string()).collect();
        let valence = if self.valence.is_empty() {
            "_".to_string()
        } else {
            self.valence
                .iter()
                .map(|v| format!("{}{}", if v.obligatory { "!" } else { "" }, v.relation))
                .collect::<Vec<_>>()
                .join(",")
        };
        let hints = if self.hints.is_empty() {
            "_".to_string()
        } else {
            self.hints
                .iter()
                .map(|h| format!("{:+}:{}", h.offset, h.relation))
                .collect::<Vec<_>>()
                .join("|")
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.surface,
            self.lemma,
            self.category,
            morph.join("|"),
            self.concept.as_deref().unwrap_or("_"),
            valence,
            hints
        )
    }
}

fn parse_valence(field: &str) -> Result<Vec<Valence>, FormatError> {
    if field == "_" || field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(',')
        .map(|v| {
            let v = v.trim();
            let (obligatory, name) = match v.strip_prefix('!') {
                Some(rest) => (true, rest),
                None => (false, v),
            };
            Ok(Valence { relation: name.parse()?, obligatory })
        })
        .collect()
}

fn parse_hints(field: &str) -> Result<Vec<AttachHint>, FormatError> {
    if field == "_" || field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split('|')
        .map(|h| {
            let (off, rel) = h
                .trim()
                .split_once(':')
                .ok_or_else(|| FormatError::new(format!("hint `{h}` is not `offset:relation`")))?;
            let offset: i32 = off.parse().map_err(|_| FormatError::new(format!("bad hint offset `{off}`")))?;
            if offset == 0 {
                return Err(FormatError::new("hint offset 0 points at the token itself"));
            }
            Ok(AttachHint { offset, relation: rel.parse()? })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub taxonomy: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub tokens: Vec<AnnotatedToken>,
}

impl Document {
    pub fn parse(text: &str, path: &Path) -> Result<Self, LoadError> {
        let mut doc = Document::default();
        let mut sentence: Option<u32> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(directive) = line.strip_prefix('#') {
                let (key, value) = match directive.split_once(char::is_whitespace) {
                    Some((k, v)) => (k, v.trim()),
                    None => (directive, ""),
                };
                match key {
                    "sent" => {
                        let n: u32 = value
                            .parse()
                            .map_err(|_| LoadError::parse(path, line_no, format!("bad sentence number `{value}`")))?;
                        if sentence.is_some_and(|prev| n < prev) {
                            return Err(LoadError::parse(path, line_no, format!("sentence {n} after a later one")));
                        }
                        sentence = Some(n);
                    }
                    "doc" => doc.doc_id = value.to_string(),
                    "taxonomy" => doc.taxonomy = Some(PathBuf::from(value)),
                    "categories" => doc.categories = Some(PathBuf::from(value)),
                    _ => {}
                }
                continue;
            }
            let sent = sentence.ok_or_else(|| LoadError::parse(path, line_no, "token before the first `#sent`"))?;
            let token =
                AnnotatedToken::parse_line(line, sent).map_err(|e| LoadError::parse(path, line_no, e.message))?;
            doc.tokens.push(token);
        }
        Ok(doc)
    }

    /// Text form that [`Document::parse`] reads back to an equal value.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if !self.doc_id.is_empty() {
            let _ = writeln!(out, "#doc {}", self.doc_id);
        }
        if let Some(t) = &self.taxonomy {
            let _ = writeln!(out, "#taxonomy {}", t.display());
        }
        if let Some(c) = &self.categories {
            let _ = writeln!(out, "#categories {}", c.display());
        }
        let mut current = None;
        for tok in &self.tokens {
            if current != Some(tok.sentence) {
                let _ = writeln!(out, "#sent {}", tok.sentence);
                current = Some(tok.sentence);
            }
            out.push_str(&tok.render());
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    /// Sentence ids in order of appearance.
    pub fn sentence_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = Vec::new();
        for t in &self.tokens {
            if ids.last() != Some(&t.sentence) {
                ids.push(t.sentence);
            }
        }
        ids
    }

    /// Tokens of each sentence, in order.
    pub fn sentences(&self) -> Vec<(u32, &[AnnotatedToken])> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.tokens.len() {
            if i == self.tokens.len() || self.tokens[i].sentence != self.tokens[start].sentence {
                out.push((self.tokens[start].sentence, &self.tokens[start..i]));
                start = i;
            }
        }
        out
    }

    /// Checks every identifier against the knowledge base and every hint
    /// against its sentence.
    pub fn validate(&self, kb: &KnowledgeBase, path: &Path) -> Result<(), LoadError> {
        for (sent, tokens) in self.sentences() {
            for (i, tok) in tokens.iter().enumerate() {
                let at = |msg: String| LoadError::invalid(path, format!("sentence {sent}, token {} `{}`: {msg}", i + 1, tok.surface));
                if !kb.categories.contains(&tok.category) {
                    return Err(at(format!("unknown category `{}`", tok.category)));
                }
                if let Some(c) = &tok.concept {
                    if !kb.taxonomy.knows(c) {
                        return Err(at(format!("unknown concept `{c}`")));
                    }
                }
                if tok.morph.is_empty() {
                    return Err(at("no morphological reading".into()));
                }
                for h in &tok.hints {
                    let target = i as i64 + 1 + h.offset as i64;
                    if target < 1 || target > tokens.len() as i64 {
                        return Err(at(format!("hint {:+} points outside the sentence", h.offset)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A document together with the knowledge it refers to.
#[derive(Clone, Debug)]
pub struct LoadedDocument {
    pub path: PathBuf,
    pub document: Document,
    pub kb: KnowledgeBase,
}

impl LoadedDocument {
    /// Loads `path` and its knowledge files. Explicit paths override the
    /// document's directives, which are resolved relative to the document.
    /// Without a category file the built-in hierarchy is used; without a
    /// taxonomy the document may not cite concepts.
    pub fn load(path: &Path, taxonomy: Option<&Path>, categories: Option<&Path>) -> Result<Self, LoadError> {
        let document = Document::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let categories = match categories.map(Path::to_path_buf).or_else(|| document.categories.as_deref().map(resolve)) {
            Some(p) => CategoryHierarchy::load(&p)?,
            None => CategoryHierarchy::default_hierarchy(),
        };
        let taxonomy = match taxonomy.map(Path::to_path_buf).or_else(|| document.taxonomy.as_deref().map(resolve)) {
            Some(p) => Taxonomy::load(&p)?,
            None => Taxonomy::default(),
        };
        let kb = KnowledgeBase::new(categories, taxonomy);
        document.validate(&kb, path)?;
        Ok(LoadedDocument { path: path.to_path_buf(), document, kb })
    }
}

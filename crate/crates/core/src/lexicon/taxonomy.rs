//! Concept taxonomy (isa_F), role constraints and the `permit` predicate.
//!
//! File format, one declaration per line:
//!
//! ```text
//! concept HARD-DISK isa DEVICE, PRODUCT
//! role SCORE-EVENT.subject : DEVICE [0..1]
//! instance LPS-105 : HARD-DISK-LPS105-TYPE
//! ```
//!
//! `max` may be `*` for unbounded; the bracket may be omitted (`[0..*]`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::hierarchy::{split_isa, Declaration, Hierarchy};
use super::Relation;
use crate::error::{LoadError, LookupError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleConstraint {
    pub relation: Relation,
    pub filler: String,
    pub min: u32,
    /// `None` is unbounded.
    pub max: Option<u32>,
}

impl fmt::Display for RoleConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.max.map_or("*".to_string(), |m| m.to_string());
        write!(f, "{} : {} [{}..{}]", self.relation, self.filler, self.min, max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub parents: Vec<String>,
    pub roles: Vec<RoleConstraint>,
}

/// Concept hierarchy plus named instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    hierarchy: Hierarchy,
    concepts: BTreeMap<String, Concept>,
    instances: BTreeMap<String, String>,
}

impl Default for Taxonomy {
    fn default() -> Self {
        Taxonomy::parse("", Path::new("<empty>")).expect("empty taxonomy")
    }
}

impl Taxonomy {
    pub fn parse(text: &str, path: &Path) -> Result<Self, LoadError> {
        let mut decls = Vec::new();
        let mut roles: Vec<(usize, String, RoleConstraint)> = Vec::new();
        let mut instances: Vec<(usize, String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| LoadError::parse(path, lineno, m);
            if let Some(rest) = line.strip_prefix("concept ") {
                let (name, parents) = split_isa(rest).map_err(err)?;
                decls.push(Declaration { name, parents, line: lineno });
            } else if let Some(rest) = line.strip_prefix("role ") {
                let (owner, role) = parse_role(rest).map_err(err)?;
                roles.push((lineno, owner, role));
            } else if let Some(rest) = line.strip_prefix("instance ") {
                let (id, concept) = rest
                    .split_once(':')
                    .ok_or_else(|| err("expected `instance ID : CONCEPT`".into()))?;
                let (id, concept) = (id.trim(), concept.trim());
                if id.is_empty() || concept.is_empty() || id.contains(char::is_whitespace) {
                    return Err(err("expected `instance ID : CONCEPT`".into()));
                }
                instances.push((lineno, id.to_string(), concept.to_string()));
            } else {
                return Err(err("expected `concept`, `role` or `instance` declaration".into()));
            }
        }

        let hierarchy = Hierarchy::build(&decls).map_err(|(l, m)| LoadError::parse(path, l, m))?;
        let mut concepts: BTreeMap<String, Concept> = decls
            .iter()
            .map(|d| {
                (d.name.clone(), Concept { name: d.name.clone(), parents: d.parents.clone(), roles: Vec::new() })
            })
            .collect();
        for (lineno, owner, role) in roles {
            if role.max.is_some_and(|m| role.min > m) {
                return Err(LoadError::parse(path, lineno, "role min exceeds max"));
            }
            if !concepts.contains_key(&role.filler) {
                return Err(LoadError::parse(path, lineno, format!("unknown filler concept `{}`", role.filler)));
            }
            concepts
                .get_mut(&owner)
                .ok_or_else(|| LoadError::parse(path, lineno, format!("unknown concept `{owner}`")))?
                .roles
                .push(role);
        }
        let mut inst = BTreeMap::new();
        for (lineno, id, concept) in instances {
            if !concepts.contains_key(&concept) {
                return Err(LoadError::parse(path, lineno, format!("unknown concept `{concept}`")));
            }
            if concepts.contains_key(&id) || inst.insert(id.clone(), concept).is_some() {
                return Err(LoadError::parse(path, lineno, format!("`{id}` declared twice")));
            }
        }
        Ok(Taxonomy { hierarchy, concepts, instances: inst })
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.get(name)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn is_instance(&self, id: &str) -> bool {
        self.instances.contains_key(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = (&str, &str)> {
        self.instances.iter().map(|(i, c)| (i.as_str(), c.as_str()))
    }

    /// Whether `id` names a concept or an instance.
    pub fn knows(&self, id: &str) -> bool {
        self.concepts.contains_key(id) || self.instances.contains_key(id)
    }

    /// The concept an identifier denotes: itself for concepts, the declared
    /// type for instances.
    pub fn concept_of<'a>(&'a self, id: &'a str) -> Result<&'a str, LookupError> {
        if self.concepts.contains_key(id) {
            Ok(id)
        } else {
            self.instances
                .get(id)
                .map(String::as_str)
                .ok_or_else(|| LookupError::Concept(id.to_string()))
        }
    }

    fn id(&self, name: &str) -> Result<usize, LookupError> {
        self.hierarchy.id(name).ok_or_else(|| LookupError::Concept(name.to_string()))
    }

    /// `sub isa_F* sup` over concepts.
    pub fn isa_f_star(&self, sub: &str, sup: &str) -> Result<bool, LookupError> {
        Ok(self.hierarchy.isa_star(self.id(sub)?, self.id(sup)?))
    }

    /// Whether `head` admits `modifier` in `relation`, given how many fillers
    /// of each relation `head` already has.
    ///
    /// Role constraints are inherited from isa_F ancestors; the first
    /// declaring concept in lineage order shadows farther ones. A relation
    /// declared nowhere is not admitted.
    pub fn permit(
        &self,
        head: &str,
        relation: Relation,
        modifier: &str,
        current_fillers: &BTreeMap<Relation, u32>,
    ) -> Result<bool, LookupError> {
        let head_id = self.id(head)?;
        let modifier_id = self.id(modifier)?;
        let used = current_fillers.get(&relation).copied().unwrap_or(0);
        for anc in self.hierarchy.lineage(head_id) {
            let concept = &self.concepts[self.hierarchy.name(anc)];
            let declared: Vec<&RoleConstraint> =
                concept.roles.iter().filter(|r| r.relation == relation).collect();
            if declared.is_empty() {
                continue;
            }
            return Ok(declared.iter().any(|r| {
                let filler = self.hierarchy.id(&r.filler).expect("validated at load");
                self.hierarchy.isa_star(modifier_id, filler) && r.max.is_none_or(|m| used < m)
            }));
        }
        Ok(false)
    }
}

fn parse_role(rest: &str) -> Result<(String, RoleConstraint), String> {
    let (target, spec) = rest.split_once(':').ok_or("expected `role NAME.RELATION : FILLER [min..max]`")?;
    let (owner, relation) = target.trim().split_once('.').ok_or("expected `NAME.RELATION`")?;
    let relation: Relation = relation.trim().parse().map_err(|e: crate::error::FormatError| e.message)?;
    let spec = spec.trim();
    let (filler, bounds) = match spec.split_once('[') {
        Some((f, b)) => (f.trim(), Some(b.trim().strip_suffix(']').ok_or("unterminated `[`")?)),
        None => (spec, None),
    };
    if filler.is_empty() || filler.contains(char::is_whitespace) {
        return Err(format!("bad filler `{filler}`"));
    }
    let (min, max) = match bounds {
        None => (0, None),
        Some(b) => {
            let (lo, hi) = b.split_once("..").ok_or("expected `[min..max]`")?;
            let min = lo.trim().parse::<u32>().map_err(|_| format!("bad min `{lo}`"))?;
            let max = match hi.trim() {
                "*" => None,
                h => Some(h.parse::<u32>().map_err(|_| format!("bad max `{h}`"))?),
            };
            (min, max)
        }
    };
    Ok((owner.trim().to_string(), RoleConstraint { relation, filler: filler.to_string(), min, max }))
}

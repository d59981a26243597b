use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A named DAG with a precomputed reflexive-transitive closure.
///
/// Shared by the lexical category hierarchy (isa_C) and the concept
/// taxonomy (isa_F).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct Hierarchy {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    // ancestors[i][j]: j isa* i
    ancestors: Vec<Vec<bool>>,
}

/// One `NAME isa P1, P2` declaration with the line it came from.
pub(crate) struct Declaration {
    pub name: String,
    pub parents: Vec<String>,
    pub line: usize,
}

impl Hierarchy {
    /// Builds the hierarchy; errors carry the offending line.
    pub fn build(decls: &[Declaration]) -> Result<Self, (usize, String)> {
        let mut names = Vec::new();
        let mut index = BTreeMap::new();
        for d in decls {
            if index.insert(d.name.clone(), names.len()).is_some() {
                return Err((d.line, format!("`{}` declared twice", d.name)));
            }
            names.push(d.name.clone());
        }
        let mut parents = Vec::with_capacity(names.len());
        for d in decls {
            let mut ps = Vec::new();
            for p in &d.parents {
                let id = *index
                    .get(p)
                    .ok_or_else(|| (d.line, format!("`{}` names undeclared parent `{p}`", d.name)))?;
                if !ps.contains(&id) {
                    ps.push(id);
                }
            }
            parents.push(ps);
        }

        // 0 = unvisited, 1 = on stack, 2 = done
        let n = names.len();
        let mut state = vec![0u8; n];
        let mut ancestors = vec![Vec::new(); n];
        for start in 0..n {
            if state[start] == 0 {
                visit(start, &parents, &mut state, &mut ancestors).map_err(|cyc| {
                    let line = decls[cyc].line;
                    (line, format!("cycle through `{}`", names[cyc]))
                })?;
            }
        }
        Ok(Hierarchy { names, index, parents, ancestors })
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn parents(&self, id: usize) -> &[usize] {
        &self.parents[id]
    }

    pub fn isa_star(&self, sub: usize, sup: usize) -> bool {
        self.ancestors[sub][sup]
    }

    /// `id` followed by its strict ancestors, nearest first (breadth-first,
    /// declaration order among parents).
    pub fn lineage(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            for &p in &self.parents[out[i]] {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            i += 1;
        }
        out
    }
}

fn visit(
    node: usize,
    parents: &[Vec<usize>],
    state: &mut [u8],
    ancestors: &mut [Vec<bool>],
) -> Result<(), usize> {
    state[node] = 1;
    let mut mine = vec![false; parents.len()];
    mine[node] = true;
    for &p in &parents[node] {
        match state[p] {
            1 => return Err(p),
            0 => visit(p, parents, state, ancestors)?,
            _ => {}
        }
        for (slot, &a) in mine.iter_mut().zip(&ancestors[p]) {
            *slot |= a;
        }
    }
    ancestors[node] = mine;
    state[node] = 2;
    Ok(())
}

/// Splits a `NAME isa A, B` tail into the name and its parent list.
pub(crate) fn split_isa(rest: &str) -> Result<(String, Vec<String>), String> {
    let rest = rest.trim();
    let (name, parents) = match rest.split_once(" isa ") {
        Some((n, p)) => (n.trim(), Some(p)),
        None => (rest, None),
    };
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(format!("bad name `{name}`"));
    }
    let parents = match parents {
        None => Vec::new(),
        Some(p) => {
            let list: Vec<String> = p.split(',').map(|s| s.trim().to_string()).collect();
            if list.iter().any(|s| s.is_empty() || s.contains(char::is_whitespace)) {
                return Err(format!("bad parent list `{}`", p.trim()));
            }
            list
        }
    };
    Ok((name.to_string(), parents))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl(name: &str, parents: &[&str], line: usize) -> Declaration {
        Declaration {
            name: name.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            line,
        }
    }

    #[test]
    fn closure_is_reflexive_and_transitive() {
        let h = Hierarchy::build(&[decl("a", &[], 1), decl("b", &["a"], 2), decl("c", &["b"], 3)])
            .unwrap();
        let (a, b, c) = (h.id("a").unwrap(), h.id("b").unwrap(), h.id("c").unwrap());
        assert!(h.isa_star(c, a));
        assert!(h.isa_star(b, b));
        assert!(!h.isa_star(a, c));
        assert_eq!(h.lineage(c), vec![c, b, a]);
    }

    #[test]
    fn cycle_is_rejected() {
        let err = Hierarchy::build(&[decl("a", &["b"], 1), decl("b", &["a"], 2)]).unwrap_err();
        assert!(err.1.contains("cycle"));
    }

    #[test]
    fn forward_parent_reference_is_allowed() {
        assert!(Hierarchy::build(&[decl("b", &["a"], 1), decl("a", &[], 2)]).is_ok());
    }

    #[test]
    fn undeclared_parent_is_rejected() {
        assert!(Hierarchy::build(&[decl("b", &["zzz"], 1)]).is_err());
    }
}

//! AMR graph data model.
//!
//! A graph is a root variable plus instance triples `(var, concept)` and
//! edges `(source, role, target)` where the target is either another
//! variable (a relation) or a constant (an attribute). Edges are kept in a
//! single list so that document order survives a parse/serialize cycle;
//! [`AmrGraph::relations`] and [`AmrGraph::attributes`] give the two views.
//!
//! Construction through [`AmrGraph::builder`] performs no checks, so that
//! malformed graphs can be represented and reported by [`AmrGraph::validate`].
//! Graphs returned by [`parse_penman`] always satisfy the invariants.

mod penman;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use penman::{parse_penman, serialize_penman, PenmanError};
pub use validate::{Finding, ValidationReport};

/// A concept node: `(var / concept)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub var: String,
    pub concept: String,
}

/// What an edge points at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// Another variable of the same graph.
    Var(String),
    /// A constant, stored verbatim (quoted strings keep their quotes).
    Const(String),
}

/// A labeled edge. `role` is stored without the leading colon and exactly as
/// written, so inverse roles keep their `-of` suffix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: String,
    pub role: String,
    pub target: Target,
}

/// A relation triple view: `(source, role, target variable)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation<'a> {
    pub source: &'a str,
    pub role: &'a str,
    pub target: &'a str,
}

/// An attribute triple view: `(source, role, constant)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attribute<'a> {
    pub source: &'a str,
    pub role: &'a str,
    pub value: &'a str,
}

/// Errors raised when a graph does not satisfy the invariants an operation
/// depends on.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("root variable `{0}` has no instance")]
    MissingRoot(String),
    #[error("variable `{0}` has more than one instance")]
    DuplicateInstance(String),
    #[error("variable `{0}` is used but has no instance")]
    UndefinedVariable(String),
    #[error("variable `{0}` is not reachable from the root")]
    Unreachable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    root: String,
    instances: Vec<Instance>,
    edges: Vec<Edge>,
}

impl AmrGraph {
    pub fn builder(root: impl Into<String>) -> GraphBuilder {
        GraphBuilder {
            graph: AmrGraph {
                root: root.into(),
                instances: Vec::new(),
                edges: Vec::new(),
            },
        }
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// Instances in definition order.
    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// All edges in document order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn relations(&self) -> impl Iterator<Item = Relation<'_>> + '_ {
        self.edges.iter().filter_map(|e| match &e.target {
            Target::Var(t) => Some(Relation {
                source: &e.source,
                role: &e.role,
                target: t,
            }),
            Target::Const(_) => None,
        })
    }

    pub fn attributes(&self) -> impl Iterator<Item = Attribute<'_>> + '_ {
        self.edges.iter().filter_map(|e| match &e.target {
            Target::Const(c) => Some(Attribute {
                source: &e.source,
                role: &e.role,
                value: c,
            }),
            Target::Var(_) => None,
        })
    }

    pub fn concept_of(&self, var: &str) -> Option<&str> {
        self.instances
            .iter()
            .find(|i| i.var == var)
            .map(|i| i.concept.as_str())
    }

    pub fn variable_count(&self) -> usize {
        self.instances.len()
    }

    /// Consistent renaming of every variable. Used mostly to build
    /// alpha-equivalent copies.
    pub fn rename_variables(&self, rename: impl Fn(&str) -> String) -> AmrGraph {
        AmrGraph {
            root: rename(&self.root),
            instances: self
                .instances
                .iter()
                .map(|i| Instance {
                    var: rename(&i.var),
                    concept: i.concept.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    source: rename(&e.source),
                    role: e.role.clone(),
                    target: match &e.target {
                        Target::Var(v) => Target::Var(rename(v)),
                        Target::Const(c) => Target::Const(c.clone()),
                    },
                })
                .collect(),
        }
    }

    /// Checks cycles, reachability, duplicate and undefined variables.
    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    /// Returns the first hard invariant violation, if any. Cycles are not
    /// an invariant violation.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let mut seen: HashMap<&str, ()> = HashMap::with_capacity(self.instances.len());
        for inst in &self.instances {
            if seen.insert(&inst.var, ()).is_some() {
                return Err(GraphError::DuplicateInstance(inst.var.clone()));
            }
        }
        if !seen.contains_key(self.root.as_str()) {
            return Err(GraphError::MissingRoot(self.root.clone()));
        }
        for e in &self.edges {
            if !seen.contains_key(e.source.as_str()) {
                return Err(GraphError::UndefinedVariable(e.source.clone()));
            }
            if let Target::Var(t) = &e.target {
                if !seen.contains_key(t.as_str()) {
                    return Err(GraphError::UndefinedVariable(t.clone()));
                }
            }
        }
        if let Some(v) = validate::unreachable(self).into_iter().next() {
            return Err(GraphError::Unreachable(v));
        }
        Ok(())
    }
}

impl fmt::Display for AmrGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serialize_penman(self) {
            Ok(text) => f.write_str(&text),
            Err(e) => write!(f, "<invalid graph: {e}>"),
        }
    }
}

/// Literal graph equality: same root, same instance set and the same
/// relation and attribute multisets. Variable names are compared as
/// written; use Smatch for alignment-aware comparison.
pub fn graph_equal(a: &AmrGraph, b: &AmrGraph) -> bool {
    fn sorted<T: Ord + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
        let mut v: Vec<T> = items.collect();
        v.sort();
        v
    }
    if a.root != b.root {
        return false;
    }
    let mut ia = sorted(a.instances.iter().cloned());
    let mut ib = sorted(b.instances.iter().cloned());
    ia.dedup();
    ib.dedup();
    ia == ib
        && sorted(a.relations()) == sorted(b.relations())
        && sorted(a.attributes()) == sorted(b.attributes())
}

/// Unchecked graph construction.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    graph: AmrGraph,
}

impl GraphBuilder {
    pub fn instance(mut self, var: impl Into<String>, concept: impl Into<String>) -> Self {
        self.graph.instances.push(Instance {
            var: var.into(),
            concept: concept.into(),
        });
        self
    }

    /// Adds a relation. A leading `:` on the role is dropped.
    pub fn relation(
        mut self,
        source: impl Into<String>,
        role: impl AsRef<str>,
        target: impl Into<String>,
    ) -> Self {
        self.graph.edges.push(Edge {
            source: source.into(),
            role: bare_role(role.as_ref()),
            target: Target::Var(target.into()),
        });
        self
    }

    /// Adds an attribute. A leading `:` on the role is dropped.
    pub fn attribute(
        mut self,
        source: impl Into<String>,
        role: impl AsRef<str>,
        value: impl Into<String>,
    ) -> Self {
        self.graph.edges.push(Edge {
            source: source.into(),
            role: bare_role(role.as_ref()),
            target: Target::Const(value.into()),
        });
        self
    }

    pub fn build(self) -> AmrGraph {
        self.graph
    }
}

fn bare_role(role: &str) -> String {
    role.strip_prefix(':').unwrap_or(role).to_string()
}

/// Roles that end in `-of` without being inverses.
const NON_INVERTED_OF_ROLES: &[&str] = &["consist-of", "prep-out-of", "prep-on-behalf-of"];

/// If `role` is an inverse role (`ARG0-of`), returns the forward label.
pub fn inverse_base(role: &str) -> Option<&str> {
    if NON_INVERTED_OF_ROLES.contains(&role) {
        return None;
    }
    role.strip_suffix("-of").filter(|base| !base.is_empty())
}

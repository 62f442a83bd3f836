use std::collections::{HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::{inverse_base, AmrGraph, Target};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    /// Variables on a directed cycle, after `-of` roles are turned around.
    /// Listed in instance order.
    Cycle(Vec<String>),
    Unreachable(String),
    DuplicateInstance(String),
    UndefinedVariable(String),
    MissingRoot(String),
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Cycle(vars) => write!(f, "cycle through [{}]", vars.join(", ")),
            Finding::Unreachable(v) => write!(f, "variable `{v}` is unreachable from the root"),
            Finding::DuplicateInstance(v) => write!(f, "variable `{v}` has several instances"),
            Finding::UndefinedVariable(v) => write!(f, "variable `{v}` has no instance"),
            Finding::MissingRoot(v) => write!(f, "root `{v}` has no instance"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn cycles(&self) -> impl Iterator<Item = &[String]> {
        self.findings.iter().filter_map(|f| match f {
            Finding::Cycle(v) => Some(v.as_slice()),
            _ => None,
        })
    }
}

pub(super) fn validate(g: &AmrGraph) -> ValidationReport {
    let mut findings = Vec::new();

    let mut order: HashMap<&str, usize> = HashMap::new();
    for inst in &g.instances {
        if order.contains_key(inst.var.as_str()) {
            let dup = Finding::DuplicateInstance(inst.var.clone());
            if !findings.contains(&dup) {
                findings.push(dup);
            }
        } else {
            order.insert(&inst.var, order.len());
        }
    }
    if !order.contains_key(g.root.as_str()) {
        findings.push(Finding::MissingRoot(g.root.clone()));
    }

    let mut undefined = Vec::new();
    for e in &g.edges {
        let mut check = |v: &str| {
            if !order.contains_key(v) && !undefined.iter().any(|u: &String| u == v) {
                undefined.push(v.to_string());
            }
        };
        check(&e.source);
        if let Target::Var(t) = &e.target {
            check(t);
        }
    }
    findings.extend(undefined.into_iter().map(Finding::UndefinedVariable));

    if order.contains_key(g.root.as_str()) {
        findings.extend(unreachable(g).into_iter().map(Finding::Unreachable));
    }

    // Directed cycles over canonical edge directions.
    let mut dg: DiGraph<usize, ()> = DiGraph::with_capacity(order.len(), g.edges.len());
    let nodes: Vec<_> = (0..order.len()).map(|i| dg.add_node(i)).collect();
    let mut self_loops = HashSet::new();
    for e in &g.edges {
        let Target::Var(t) = &e.target else { continue };
        let (Some(&s), Some(&t)) = (order.get(e.source.as_str()), order.get(t.as_str())) else {
            continue;
        };
        let (from, to) = if inverse_base(&e.role).is_some() { (t, s) } else { (s, t) };
        if from == to {
            self_loops.insert(from);
        }
        dg.add_edge(nodes[from], nodes[to], ());
    }
    let names: Vec<&str> = {
        let mut v = vec![""; order.len()];
        for (name, &i) in &order {
            v[i] = name;
        }
        v
    };
    let mut cycles: Vec<Vec<usize>> = tarjan_scc(&dg)
        .into_iter()
        .map(|scc| scc.into_iter().map(|n| dg[n]).collect::<Vec<_>>())
        .filter(|scc| scc.len() > 1 || self_loops.contains(&scc[0]))
        .map(|mut scc| {
            scc.sort_unstable();
            scc
        })
        .collect();
    cycles.sort();
    findings.extend(
        cycles
            .into_iter()
            .map(|c| Finding::Cycle(c.into_iter().map(|i| names[i].to_string()).collect())),
    );

    ValidationReport { findings }
}

/// Defined variables not reachable from the root along edges as written.
pub(super) fn unreachable(g: &AmrGraph) -> Vec<String> {
    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    for r in g.relations() {
        adjacency.entry(r.source).or_default().push(r.target);
    }
    let mut seen: HashSet<&str> = HashSet::new();
    let mut stack = vec![g.root.as_str()];
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        if let Some(next) = adjacency.get(v) {
            stack.extend(next.iter().copied());
        }
    }
    let mut out: Vec<String> = Vec::new();
    for inst in &g.instances {
        if !seen.contains(inst.var.as_str()) && !out.contains(&inst.var) {
            out.push(inst.var.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_graph_has_empty_report() {
        let g = AmrGraph::builder("r")
            .instance("r", "recommend-01")
            .instance("a", "advocate-01")
            .instance("i", "it")
            .instance("v", "vigorous")
            .relation("r", "ARG1", "a")
            .relation("a", "ARG1", "i")
            .relation("a", "manner", "v")
            .build();
        assert!(g.validate().is_empty());
    }

    #[test]
    fn two_cycle_is_reported() {
        let g = AmrGraph::builder("a")
            .instance("a", "x")
            .instance("b", "y")
            .relation("a", "ARG0", "b")
            .relation("b", "ARG0", "a")
            .build();
        let report = g.validate();
        assert_eq!(report.findings, vec![Finding::Cycle(vec!["a".into(), "b".into()])]);
    }

    #[test]
    fn inverse_role_closes_cycle() {
        // `a :ARG0 b` and `a :ARG0-of b` (i.e. `b :ARG0 a`).
        let g = AmrGraph::builder("a")
            .instance("a", "x")
            .instance("b", "y")
            .relation("a", "ARG0", "b")
            .relation("a", "ARG0-of", "b")
            .build();
        assert_eq!(g.validate().cycles().count(), 1);
    }

    #[test]
    fn reentrancy_is_not_a_cycle() {
        let g = AmrGraph::builder("w")
            .instance("w", "want-01")
            .instance("b", "boy")
            .instance("g", "go-02")
            .relation("w", "ARG0", "b")
            .relation("w", "ARG1", "g")
            .relation("g", "ARG0", "b")
            .build();
        assert!(g.validate().is_empty());
    }

    #[test]
    fn orphan_is_unreachable() {
        let g = AmrGraph::builder("a")
            .instance("a", "x")
            .instance("o", "orphan")
            .build();
        assert_eq!(g.validate().findings, vec![Finding::Unreachable("o".into())]);
    }

    #[test]
    fn duplicate_and_undefined() {
        let g = AmrGraph::builder("a")
            .instance("a", "x")
            .instance("a", "y")
            .relation("a", "mod", "q")
            .build();
        let f = g.validate().findings;
        assert!(f.contains(&Finding::DuplicateInstance("a".into())));
        assert!(f.contains(&Finding::UndefinedVariable("q".into())));
    }

    #[test]
    fn self_loop() {
        let g = AmrGraph::builder("a")
            .instance("a", "x")
            .relation("a", "mod", "a")
            .build();
        assert_eq!(g.validate().findings, vec![Finding::Cycle(vec!["a".into()])]);
    }
}

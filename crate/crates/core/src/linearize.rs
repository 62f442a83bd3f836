//! Graph to token-sequence conversion and joint AMR+text stream assembly.
//!
//! Three representations are supported:
//!
//! * [`Representation::NodesOnly`]: concept labels (and constants) in depth
//!   first visit order.
//! * [`Representation::DfsWithEdges`]: the same walk with a `:role` token in
//!   front of every child.
//! * [`Representation::Penman`]: the single-line PENMAN serialization split
//!   into tokens, with parentheses and `/` standing alone.
//!
//! Variables never appear in the first two; a re-entrant variable repeats
//! its concept label and is not expanded again.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::graph::{serialize_penman, AmrGraph, Edge, GraphError, Target};

/// Default token separating the AMR from the text.
pub const DEFAULT_SEPARATOR: &str = "<sep>";
/// Pseudo-role added to every arc vocabulary.
pub const ROOT_LABEL: &str = ":root";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    NodesOnly,
    DfsWithEdges,
    Penman,
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nodes" => Ok(Representation::NodesOnly),
            "dfs" => Ok(Representation::DfsWithEdges),
            "penman" => Ok(Representation::Penman),
            other => Err(format!("unknown representation `{other}` (expected nodes, dfs or penman)")),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::NodesOnly => "nodes",
            Representation::DfsWithEdges => "dfs",
            Representation::Penman => "penman",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinearizeOptions {
    /// Drop PropBank sense suffixes (`recommend-01` becomes `recommend`) in
    /// the node and DFS representations. Penman output is never modified.
    pub strip_sense: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedAmr {
    tokens: Vec<String>,
    representation: Representation,
}

impl LinearizedAmr {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinearizeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("separator `{0}` also occurs as an ordinary token")]
    SeparatorCollision(String),
}

pub fn linearize(g: &AmrGraph, repr: Representation) -> Result<LinearizedAmr, GraphError> {
    linearize_with(g, repr, LinearizeOptions::default())
}

pub fn linearize_with(
    g: &AmrGraph,
    repr: Representation,
    opts: LinearizeOptions,
) -> Result<LinearizedAmr, GraphError> {
    let tokens = match repr {
        Representation::Penman => penman_tokens(&serialize_penman(g)?),
        Representation::NodesOnly | Representation::DfsWithEdges => {
            g.check_invariants()?;
            let mut walk = DepthFirst::new(g, repr == Representation::DfsWithEdges, opts);
            walk.visit(g.root());
            walk.tokens
        }
    };
    Ok(LinearizedAmr {
        tokens,
        representation: repr,
    })
}

struct DepthFirst<'a> {
    children: HashMap<&'a str, Vec<&'a Edge>>,
    concepts: HashMap<&'a str, &'a str>,
    visited: HashSet<&'a str>,
    with_edges: bool,
    opts: LinearizeOptions,
    tokens: Vec<String>,
}

impl<'a> DepthFirst<'a> {
    fn new(g: &'a AmrGraph, with_edges: bool, opts: LinearizeOptions) -> Self {
        let mut children: HashMap<&str, Vec<&Edge>> = HashMap::new();
        for e in g.edges() {
            children.entry(e.source.as_str()).or_default().push(e);
        }
        DepthFirst {
            children,
            concepts: g
                .instances()
                .iter()
                .map(|i| (i.var.as_str(), i.concept.as_str()))
                .collect(),
            visited: HashSet::new(),
            with_edges,
            opts,
            tokens: Vec::new(),
        }
    }

    fn concept(&self, var: &str) -> String {
        let c = self.concepts[var];
        if self.opts.strip_sense {
            strip_sense(c).to_string()
        } else {
            c.to_string()
        }
    }

    fn visit(&mut self, var: &'a str) {
        self.visited.insert(var);
        self.tokens.push(self.concept(var));
        let edges = self.children.get(var).cloned().unwrap_or_default();
        for e in edges {
            if self.with_edges {
                self.tokens.push(format!(":{}", e.role));
            }
            match &e.target {
                Target::Const(c) => self.tokens.push(c.clone()),
                Target::Var(t) if self.visited.contains(t.as_str()) => {
                    self.tokens.push(self.concept(t))
                }
                Target::Var(t) => self.visit(t),
            }
        }
    }
}

/// `want-01` -> `want`. Labels without a numeric sense are returned as is.
pub fn strip_sense(concept: &str) -> &str {
    match concept.rfind('-') {
        Some(i)
            if i > 0
                && i + 1 < concept.len()
                && concept[i + 1..].bytes().all(|b| b.is_ascii_digit()) =>
        {
            &concept[..i]
        }
        _ => concept,
    }
}

/// Splits PENMAN text into tokens: parentheses and `/` are standalone,
/// quoted strings stay whole, everything else splits on whitespace.
pub fn penman_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_quote = false;
    let mut escaped = false;
    for c in text.chars() {
        if in_quote {
            cur.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '"' => {
                cur.push(c);
                in_quote = true;
            }
            '(' | ')' | '/' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            _ if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Reserved vocabulary for AMR-specific symbols plus the AMR/text separator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialSymbolMap {
    separator: String,
    reserved: BTreeMap<String, u32>,
}

impl SpecialSymbolMap {
    /// Builds a map assigning ids in sorted label order.
    pub fn new(separator: impl Into<String>, labels: impl IntoIterator<Item = String>) -> Self {
        let sorted: BTreeSet<String> = labels.into_iter().collect();
        SpecialSymbolMap {
            separator: separator.into(),
            reserved: sorted
                .into_iter()
                .enumerate()
                .map(|(i, l)| (l, i as u32))
                .collect(),
        }
    }

    pub fn with_separator(mut self, separator: impl Into<String>) -> Self {
        self.separator = separator.into();
        self
    }

    pub fn separator(&self) -> &str {
        &self.separator
    }

    pub fn reserved(&self) -> &BTreeMap<String, u32> {
        &self.reserved
    }

    /// Reserved token standing in for a special surface form, if any.
    pub fn reserved_token(&self, surface: &str) -> Option<String> {
        self.reserved.get(surface).map(|id| reserved_token_name(*id))
    }

    pub fn len(&self) -> usize {
        self.reserved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reserved.is_empty()
    }
}

pub fn reserved_token_name(id: u32) -> String {
    format!("<unused{id}>")
}

/// Collects every relation and attribute label seen in `corpus`, plus
/// `:root`.
pub fn extract_arc_vocabulary<'a>(corpus: impl IntoIterator<Item = &'a AmrGraph>) -> SpecialSymbolMap {
    let mut labels: BTreeSet<String> = BTreeSet::new();
    labels.insert(ROOT_LABEL.to_string());
    for g in corpus {
        for e in g.edges() {
            labels.insert(format!(":{}", e.role));
        }
    }
    SpecialSymbolMap::new(DEFAULT_SEPARATOR, labels)
}

/// `amr ++ [separator] ++ text`, with reserved symbols substituted.
/// `text_tokens` is empty when building a decoding context.
pub fn assemble_joint(
    amr: &LinearizedAmr,
    text_tokens: &[String],
    sym: &SpecialSymbolMap,
) -> Result<Vec<String>, LinearizeError> {
    let sep = sym.separator();
    if let Some(t) = amr.tokens.iter().chain(text_tokens).find(|t| t.as_str() == sep) {
        return Err(LinearizeError::SeparatorCollision(t.clone()));
    }
    let mut out = Vec::with_capacity(amr.len() + 1 + text_tokens.len());
    out.extend(
        amr.tokens
            .iter()
            .map(|t| sym.reserved_token(t).unwrap_or_else(|| t.clone())),
    );
    out.push(sep.to_string());
    out.extend(text_tokens.iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;

    const RECOMMEND: &str =
        "(r / recommend-01 :ARG1 (a / advocate-01 :ARG1 (i / it) :manner (v / vigorous)))";

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn lin(src: &str, repr: Representation) -> Vec<String> {
        linearize(&parse_penman(src).unwrap(), repr).unwrap().tokens
    }

    #[test]
    fn single_node() {
        assert_eq!(lin("(a / thing)", Representation::Penman), toks("( a / thing )"));
        assert_eq!(lin("(a / thing)", Representation::NodesOnly), toks("thing"));
        assert_eq!(lin("(a / thing)", Representation::DfsWithEdges), toks("thing"));
    }

    #[test]
    fn recommend_graph_representations() {
        assert_eq!(
            lin(RECOMMEND, Representation::DfsWithEdges),
            toks("recommend-01 :ARG1 advocate-01 :ARG1 it :manner vigorous")
        );
        assert_eq!(
            lin(RECOMMEND, Representation::NodesOnly),
            toks("recommend-01 advocate-01 it vigorous")
        );
        assert_eq!(
            lin(RECOMMEND, Representation::Penman),
            toks("( r / recommend-01 :ARG1 ( a / advocate-01 :ARG1 ( i / it ) :manner ( v / vigorous ) ) )")
        );
    }

    #[test]
    fn strip_sense_only_touches_node_and_dfs() {
        let g = parse_penman(RECOMMEND).unwrap();
        let opts = LinearizeOptions { strip_sense: true };
        let dfs = linearize_with(&g, Representation::DfsWithEdges, opts).unwrap();
        assert_eq!(dfs.joined(), "recommend :ARG1 advocate :ARG1 it :manner vigorous");
        let pen = linearize_with(&g, Representation::Penman, opts).unwrap();
        assert!(pen.tokens().contains(&"recommend-01".to_string()));
    }

    #[test]
    fn strip_sense_rules() {
        assert_eq!(strip_sense("want-01"), "want");
        assert_eq!(strip_sense("have-org-role-91"), "have-org-role");
        assert_eq!(strip_sense("it"), "it");
        assert_eq!(strip_sense("-01"), "-01");
        assert_eq!(strip_sense("x-"), "x-");
        assert_eq!(strip_sense("multi-sentence"), "multi-sentence");
    }

    #[test]
    fn reentrancy_repeats_concept() {
        let src = "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))";
        assert_eq!(
            lin(src, Representation::DfsWithEdges),
            toks("want-01 :ARG0 boy :ARG1 go-02 :ARG0 boy")
        );
        assert_eq!(lin(src, Representation::NodesOnly), toks("want-01 boy go-02 boy"));
    }

    #[test]
    fn constants_are_kept() {
        let src = r#"(g / go-02 :polarity - :ARG0 (n / name :op1 "New York"))"#;
        assert_eq!(
            lin(src, Representation::DfsWithEdges),
            vec!["go-02", ":polarity", "-", ":ARG0", "name", ":op1", "\"New York\""]
        );
        let pen = lin(src, Representation::Penman);
        assert!(pen.contains(&"\"New York\"".to_string()));
        let rejoined = pen.join(" ");
        assert_eq!(parse_penman(&rejoined).unwrap(), parse_penman(src).unwrap());
    }

    #[test]
    fn joint_assembly() {
        let amr = LinearizedAmr {
            tokens: toks("x y"),
            representation: Representation::NodesOnly,
        };
        let sym = SpecialSymbolMap::new("⟂", Vec::new());
        assert_eq!(assemble_joint(&amr, &toks("u"), &sym).unwrap(), toks("x y ⟂ u"));
        assert_eq!(assemble_joint(&amr, &[], &sym).unwrap(), toks("x y ⟂"));
        let err = assemble_joint(&amr, &toks("⟂"), &sym).unwrap_err();
        assert_eq!(err, LinearizeError::SeparatorCollision("⟂".into()));
    }

    #[test]
    fn joint_assembly_substitutes_reserved() {
        let g = parse_penman(RECOMMEND).unwrap();
        let sym = extract_arc_vocabulary([&g]);
        let amr = linearize(&g, Representation::DfsWithEdges).unwrap();
        let stream = assemble_joint(&amr, &toks("it is recommended"), &sym).unwrap();
        assert!(stream.iter().all(|t| !sym.reserved().contains_key(t)));
        let arg1 = sym.reserved_token(":ARG1").unwrap();
        assert_eq!(stream.iter().filter(|t| **t == arg1).count(), 2);
        assert_eq!(stream.iter().filter(|t| *t == sym.separator()).count(), 1);
    }

    #[test]
    fn arc_vocabulary() {
        let g = parse_penman(RECOMMEND).unwrap();
        let sym = extract_arc_vocabulary([&g]);
        let keys: Vec<_> = sym.reserved().keys().cloned().collect();
        assert_eq!(keys, vec![":ARG1", ":manner", ":root"]);

        let bare = [parse_penman("(a / thing)").unwrap(), parse_penman("(b / other)").unwrap()];
        let keys: Vec<_> = extract_arc_vocabulary(&bare).reserved().keys().cloned().collect();
        assert_eq!(keys, vec![":root"]);

        let shared = [
            parse_penman("(a / x :ARG0 (b / y))").unwrap(),
            parse_penman("(c / z :ARG0 (d / w) :polarity -)").unwrap(),
        ];
        let sym = extract_arc_vocabulary(&shared);
        assert_eq!(sym.reserved().keys().filter(|k| *k == ":ARG0").count(), 1);
        let ids: BTreeSet<u32> = sym.reserved().values().copied().collect();
        assert_eq!(ids.len(), sym.len());
    }

    #[test]
    fn representation_names() {
        for r in [Representation::NodesOnly, Representation::DfsWithEdges, Representation::Penman] {
            assert_eq!(r.to_string().parse::<Representation>().unwrap(), r);
        }
        assert!("bfs".parse::<Representation>().is_err());
    }
}

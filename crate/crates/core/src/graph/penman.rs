//! PENMAN notation reader and writer.
//!
//! Bare symbols in target position are variable references when the symbol
//! is defined anywhere in the graph (forward references are allowed) and
//! constants otherwise. An undefined symbol shaped like an AMR variable
//! (a lowercase letter followed by digits) is rejected as an undefined
//! reference. Alignment suffixes such as `~e.3` are dropped while lexing.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::{AmrGraph, Edge, GraphError, Instance, Target};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PenmanError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("variable `{var}` defined twice (second definition at {line}:{column})")]
    DuplicateVariable {
        var: String,
        line: usize,
        column: usize,
    },
    #[error("reference to undefined variable `{var}` at {line}:{column}")]
    UndefinedVariable {
        var: String,
        line: usize,
        column: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Slash,
    Role(String),
    Symbol(String),
    Quoted(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Open => "`(`".into(),
            Tok::Close => "`)`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Role(r) => format!("role `:{r}`"),
            Tok::Symbol(s) => format!("symbol `{s}`"),
            Tok::Quoted(s) => format!("string {s}"),
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> PenmanError {
    PenmanError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')' || c == '/'
}

/// `~e.12`, `~12`, `~e.3,4` style alignment markers.
fn is_alignment(suffix: &str) -> bool {
    let rest = match suffix.find('.') {
        Some(dot) if suffix[..dot].chars().all(|c| c.is_ascii_alphabetic()) && dot > 0 => {
            &suffix[dot + 1..]
        }
        _ => suffix,
    };
    !rest.is_empty()
        && rest.starts_with(|c: char| c.is_ascii_digit())
        && rest.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
}

fn strip_alignment(text: &str) -> &str {
    match text.rfind('~') {
        Some(i) if i > 0 && is_alignment(&text[i + 1..]) => &text[..i],
        _ => text,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, PenmanError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut pos = Pos { line: 1, column: 1 };

    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    };

    while let Some(&c) = chars.peek() {
        let start = pos;
        match c {
            _ if c.is_whitespace() => {
                chars.next();
                advance(c, &mut pos);
            }
            '(' | ')' | '/' => {
                chars.next();
                advance(c, &mut pos);
                out.push((
                    match c {
                        '(' => Tok::Open,
                        ')' => Tok::Close,
                        _ => Tok::Slash,
                    },
                    start,
                ));
            }
            '"' => {
                let mut text = String::from('"');
                chars.next();
                advance(c, &mut pos);
                let mut closed = false;
                while let Some(c) = chars.next() {
                    advance(c, &mut pos);
                    text.push(c);
                    if c == '\\' {
                        if let Some(escaped) = chars.next() {
                            advance(escaped, &mut pos);
                            text.push(escaped);
                        }
                    } else if c == '"' {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(syntax(start, "unterminated string"));
                }
                // Alignment right after a closing quote.
                if chars.peek() == Some(&'~') {
                    let mut suffix = String::new();
                    while let Some(&c) = chars.peek() {
                        if is_delimiter(c) {
                            break;
                        }
                        suffix.push(c);
                        chars.next();
                        advance(c, &mut pos);
                    }
                    if !is_alignment(&suffix[1..]) {
                        return Err(syntax(start, format!("unexpected `{suffix}` after string")));
                    }
                }
                out.push((Tok::Quoted(text), start));
            }
            _ => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if is_delimiter(c) || (c == '"' && !text.is_empty()) {
                        break;
                    }
                    text.push(c);
                    chars.next();
                    advance(c, &mut pos);
                }
                let text = strip_alignment(&text);
                if let Some(role) = text.strip_prefix(':') {
                    if role.is_empty() {
                        return Err(syntax(start, "empty role name"));
                    }
                    out.push((Tok::Role(role.to_string()), start));
                } else {
                    out.push((Tok::Symbol(text.to_string()), start));
                }
            }
        }
    }
    Ok(out)
}

fn looks_like_variable(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    instances: Vec<Instance>,
    defined: HashMap<String, Pos>,
    edges: Vec<Edge>,
    // Edge index, symbol position, for bare symbols resolved after parsing.
    pending: Vec<(usize, Pos)>,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, Pos)> {
        self.toks.get(self.at)
    }

    fn next(&mut self, expected: &str) -> Result<(Tok, Pos), PenmanError> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => Err(syntax(self.end, format!("unexpected end of input, expected {expected}"))),
        }
    }

    fn node(&mut self) -> Result<String, PenmanError> {
        let (tok, pos) = self.next("`(`")?;
        if tok != Tok::Open {
            return Err(syntax(pos, format!("expected `(`, found {}", tok.describe())));
        }
        let (tok, var_pos) = self.next("a variable")?;
        let Tok::Symbol(var) = tok else {
            return Err(syntax(var_pos, format!("expected a variable, found {}", tok.describe())));
        };
        let (tok, pos) = self.next("`/`")?;
        if tok != Tok::Slash {
            return Err(syntax(pos, format!("expected `/` after `{var}`, found {}", tok.describe())));
        }
        let (tok, pos) = self.next("a concept")?;
        let concept = match tok {
            Tok::Symbol(s) | Tok::Quoted(s) => s,
            other => {
                return Err(syntax(pos, format!("expected a concept, found {}", other.describe())))
            }
        };
        if self.defined.contains_key(&var) {
            return Err(PenmanError::DuplicateVariable {
                var,
                line: var_pos.line,
                column: var_pos.column,
            });
        }
        self.defined.insert(var.clone(), var_pos);
        self.instances.push(Instance {
            var: var.clone(),
            concept,
        });

        loop {
            let (tok, pos) = self.next("a role or `)`")?;
            match tok {
                Tok::Close => return Ok(var),
                Tok::Role(role) => {
                    let target = match self.peek() {
                        Some((Tok::Open, _)) => Target::Var(self.node()?),
                        Some((Tok::Symbol(_), _)) => {
                            let (Tok::Symbol(s), p) = self.next("a value")? else { unreachable!() };
                            self.pending.push((self.edges.len(), p));
                            Target::Const(s)
                        }
                        Some((Tok::Quoted(_), _)) => {
                            let (Tok::Quoted(s), _) = self.next("a value")? else { unreachable!() };
                            Target::Const(s)
                        }
                        Some((other, p)) => {
                            return Err(syntax(
                                *p,
                                format!("expected a value for `:{role}`, found {}", other.describe()),
                            ))
                        }
                        None => {
                            return Err(syntax(self.end, format!("missing value for `:{role}`")))
                        }
                    };
                    self.edges.push(Edge {
                        source: var.clone(),
                        role,
                        target,
                    });
                }
                other => {
                    return Err(syntax(pos, format!("expected a role or `)`, found {}", other.describe())))
                }
            }
        }
    }
}

/// Parses one PENMAN expression into a graph whose root is the first
/// variable.
pub fn parse_penman(src: &str) -> Result<AmrGraph, PenmanError> {
    let toks = lex(src)?;
    let end = {
        let mut line = 1;
        let mut column = 1;
        for c in src.chars() {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        Pos { line, column }
    };
    if toks.is_empty() {
        return Err(syntax(end, "empty input"));
    }
    let mut p = Parser {
        toks,
        at: 0,
        end,
        instances: Vec::new(),
        defined: HashMap::new(),
        edges: Vec::new(),
        pending: Vec::new(),
    };
    let root = p.node()?;
    if let Some((tok, pos)) = p.peek() {
        return Err(syntax(*pos, format!("unexpected {} after the graph", tok.describe())));
    }

    for (idx, pos) in std::mem::take(&mut p.pending) {
        let edge = &mut p.edges[idx];
        let Target::Const(symbol) = &edge.target else { continue };
        if p.defined.contains_key(symbol) {
            edge.target = Target::Var(symbol.clone());
        } else if looks_like_variable(symbol) {
            return Err(PenmanError::UndefinedVariable {
                var: symbol.clone(),
                line: pos.line,
                column: pos.column,
            });
        }
    }

    Ok(AmrGraph {
        root,
        instances: p.instances,
        edges: p.edges,
    })
}

/// Writes a graph as single-line PENMAN, depth first from the root with
/// edges in stored order. The first visit of a variable defines it; later
/// visits are bare references.
pub fn serialize_penman(g: &AmrGraph) -> Result<String, GraphError> {
    g.check_invariants()?;
    let mut children: HashMap<&str, Vec<&Edge>> = HashMap::new();
    for e in &g.edges {
        children.entry(e.source.as_str()).or_default().push(e);
    }
    let concepts: HashMap<&str, &str> = g
        .instances
        .iter()
        .map(|i| (i.var.as_str(), i.concept.as_str()))
        .collect();

    struct Writer<'a> {
        children: HashMap<&'a str, Vec<&'a Edge>>,
        concepts: HashMap<&'a str, &'a str>,
        visited: HashSet<&'a str>,
        out: String,
    }

    impl<'a> Writer<'a> {
        fn node(&mut self, var: &'a str) {
            self.visited.insert(var);
            let _ = write!(self.out, "({var} / {}", self.concepts[var]);
            let edges = self.children.get(var).cloned().unwrap_or_default();
            for e in edges {
                let _ = write!(self.out, " :{} ", e.role);
                match &e.target {
                    Target::Const(c) => self.out.push_str(c),
                    Target::Var(t) if self.visited.contains(t.as_str()) => self.out.push_str(t),
                    Target::Var(t) => self.node(t),
                }
            }
            self.out.push(')');
        }
    }

    let mut w = Writer {
        children,
        concepts,
        visited: HashSet::new(),
        out: String::new(),
    };
    w.node(&g.root);
    Ok(w.out)
}

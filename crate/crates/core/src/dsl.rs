//! The `.ptree` text format, plus DOT and JSON exporters.
//!
//! ```text
//! tree     := node
//! node     := "(" IDENT branch+ ")" | "(leaf)"
//! branch   := "(" IDENT prob child? ")"        ; no child means a leaf
//! prob     := INT "/" INT | INT | DECIMAL
//! IDENT    := [A-Za-z_~][A-Za-z0-9_~]*
//! ```
//!
//! Whitespace is insignificant and `;` starts a comment running to the end of
//! the line. Variable domains are inferred from the branches of every node
//! that resolves the variable.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::rational::{format_rational, parse_rational, Rational};
use crate::tree::{Node, ProbabilityTree, Step, ValueId, VariableId, Violation};

/// 1-based line and column of a position in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocatedViolation {
    pub violation: Violation,
    pub span: Option<Span>,
}

impl fmt::Display for LocatedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(span) => write!(f, "{span}: {}", self.violation),
            None => write!(f, "{}", self.violation),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: bad probability `{literal}`: {reason}")]
    Probability {
        span: Span,
        literal: String,
        reason: String,
    },
    #[error("{}", describe(.0))]
    Validation(Vec<LocatedViolation>),
}

fn describe(issues: &[LocatedViolation]) -> String {
    match issues {
        [] => "invalid tree".to_string(),
        [one] => format!("invalid tree: {one}"),
        [first, rest @ ..] => format!("invalid tree: {first} (and {} more)", rest.len()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Slash,
    Ident(String),
    Number(String),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            column: self.column,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Span)>, DslError> {
        let word = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '~' || c == '.';
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let span = self.span();
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                ';' => {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                }
                '(' | ')' | '/' => {
                    self.bump();
                    let tok = match c {
                        '(' => Tok::Open,
                        ')' => Tok::Close,
                        _ => Tok::Slash,
                    };
                    out.push((tok, span));
                }
                c if word(c) => {
                    let mut s = String::new();
                    while let Some(&c) = self.chars.peek().filter(|&&c| word(c)) {
                        s.push(c);
                        self.bump();
                    }
                    let first = s.chars().next().unwrap();
                    if first.is_ascii_digit() || first == '.' {
                        out.push((Tok::Number(s), span));
                    } else if s.contains('.') {
                        return Err(DslError::Syntax {
                            span,
                            message: format!("invalid identifier `{s}`"),
                        });
                    } else {
                        out.push((Tok::Ident(s), span));
                    }
                }
                other => {
                    return Err(DslError::Syntax {
                        span,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        Ok(out)
    }
}

fn describe_tok(tok: Option<&Tok>) -> String {
    match tok {
        None => "end of input".to_string(),
        Some(Tok::Open) => "`(`".to_string(),
        Some(Tok::Close) => "`)`".to_string(),
        Some(Tok::Slash) => "`/`".to_string(),
        Some(Tok::Ident(s)) => format!("identifier `{s}`"),
        Some(Tok::Number(s)) => format!("number `{s}`"),
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
    spans: HashMap<Vec<Step>, Span>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|(_, s)| *s).unwrap_or(self.end)
    }

    fn unexpected(&self, wanted: &str) -> DslError {
        DslError::Syntax {
            span: self.span(),
            message: format!("expected {wanted}, found {}", describe_tok(self.peek())),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), DslError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<String, DslError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn node(&mut self, path: &mut Vec<Step>) -> Result<Node, DslError> {
        let start = self.span();
        self.expect(Tok::Open, "`(`")?;
        let var = self.ident("a variable name or `leaf`")?;
        if var == "leaf" && self.peek() == Some(&Tok::Close) {
            self.pos += 1;
            return Ok(Node::Leaf);
        }
        self.spans.insert(path.clone(), start);
        let variable = VariableId::new(&var);
        let mut branches = Vec::new();
        while self.peek() == Some(&Tok::Open) {
            branches.push(self.branch(&variable, path)?);
        }
        if branches.is_empty() {
            return Err(self.unexpected("a branch `(value prob ...)`"));
        }
        self.expect(Tok::Close, "`(` or `)`")?;
        Ok(Node::Internal { variable, branches })
    }

    fn branch(
        &mut self,
        variable: &VariableId,
        path: &mut Vec<Step>,
    ) -> Result<crate::tree::Branch, DslError> {
        self.expect(Tok::Open, "`(`")?;
        let value = ValueId::new(self.ident("a value name")?);
        let prob = self.prob()?;
        path.push((variable.clone(), value.clone()));
        let child = if self.peek() == Some(&Tok::Open) {
            self.node(path)
        } else {
            Ok(Node::Leaf)
        };
        path.pop();
        let child = child?;
        self.expect(Tok::Close, "`)` closing the branch")?;
        Ok(crate::tree::Branch { value, prob, child })
    }

    fn prob(&mut self) -> Result<Rational, DslError> {
        let span = self.span();
        let Some(Tok::Number(num)) = self.peek().cloned() else {
            return Err(self.unexpected("a probability"));
        };
        self.pos += 1;
        let mut literal = num;
        if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Number(den)) => {
                    self.pos += 1;
                    literal = format!("{literal}/{den}");
                }
                _ => return Err(self.unexpected("a denominator")),
            }
        }
        parse_rational(&literal).map_err(|e| DslError::Probability {
            span,
            reason: e.to_string(),
            literal,
        })
    }
}

/// Source text together with the tree it describes and the position of each
/// internal node, keyed by the path leading to it.
#[derive(Clone, Debug)]
pub struct TreeDocument {
    pub source: String,
    pub tree: ProbabilityTree,
    pub spans: HashMap<Vec<Step>, Span>,
}

impl TreeDocument {
    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, DslError> {
        let doc = Self::parse_unchecked(text)?;
        let issues: Vec<_> = doc
            .tree
            .validate()
            .into_iter()
            .map(|violation| LocatedViolation {
                span: doc.spans.get(&violation.path).copied(),
                violation,
            })
            .collect();
        if issues.is_empty() {
            Ok(doc)
        } else {
            Err(DslError::Validation(issues))
        }
    }

    /// Parses the syntax only; the tree may violate structural invariants.
    pub fn parse_unchecked(text: &str) -> Result<Self, DslError> {
        let toks = Lexer::new(text).tokens()?;
        let end = {
            let mut lx = Lexer::new(text);
            while lx.bump().is_some() {}
            lx.span()
        };
        let mut p = Parser {
            toks,
            pos: 0,
            end,
            spans: HashMap::new(),
        };
        let root = p.node(&mut Vec::new())?;
        if p.peek().is_some() {
            return Err(p.unexpected("end of input"));
        }
        Ok(Self {
            source: text.to_string(),
            tree: ProbabilityTree::unchecked(root),
            spans: p.spans,
        })
    }

    /// Location of the node reached by `path`, if it is an internal node.
    pub fn span_of(&self, path: &[Step]) -> Option<Span> {
        self.spans.get(path).copied()
    }
}

/// Parses a `.ptree` document into a validated tree.
pub fn parse(text: &str) -> Result<ProbabilityTree, DslError> {
    TreeDocument::parse(text).map(|d| d.tree)
}

/// Canonical text: two-space indentation, lowest-terms rationals, branches in
/// authored order. A node whose branches are all leaves stays on one line.
pub fn serialize(tree: &ProbabilityTree) -> String {
    let mut out = String::new();
    write_node(&mut out, tree.root(), 0);
    out
}

fn write_node(out: &mut String, node: &Node, indent: usize) {
    let Node::Internal { variable, branches } = node else {
        out.push_str("(leaf)");
        return;
    };
    let inline = branches.iter().all(|b| b.child.is_leaf());
    write!(out, "({variable}").unwrap();
    for b in branches {
        if inline {
            out.push(' ');
        } else {
            out.push('\n');
            out.push_str(&" ".repeat(indent + 2));
        }
        write!(out, "({} {}", b.value, format_rational(&b.prob)).unwrap();
        if !b.child.is_leaf() {
            out.push(' ');
            write_node(out, &b.child, indent + 2);
        }
        out.push(')');
    }
    out.push(')');
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz document: internal nodes are labeled with their variable, leaves
/// with their path probability, edges with `value prob`.
pub fn export_dot(tree: &ProbabilityTree) -> String {
    fn go(out: &mut String, node: &Node, reach: &Rational, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        match node {
            Node::Leaf => {
                writeln!(
                    out,
                    "  n{id} [shape=box, label=\"{}\"];",
                    format_rational(reach)
                )
                .unwrap();
            }
            Node::Internal { variable, branches } => {
                writeln!(
                    out,
                    "  n{id} [label=\"{}\"];",
                    dot_escape(variable.as_str())
                )
                .unwrap();
                for b in branches {
                    let child = go(out, &b.child, &(reach * &b.prob), next);
                    writeln!(
                        out,
                        "  n{id} -> n{child} [label=\"{} {}\"];",
                        dot_escape(b.value.as_str()),
                        format_rational(&b.prob)
                    )
                    .unwrap();
                }
            }
        }
        id
    }
    let mut out = String::from("digraph ptree {\n  node [shape=ellipse];\n");
    go(
        &mut out,
        tree.root(),
        &Rational::from_integer(1.into()),
        &mut 0,
    );
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct JsonNode {
    var: String,
    branches: Vec<JsonBranch>,
}

#[derive(Serialize)]
struct JsonBranch {
    value: String,
    prob: String,
    child: Option<JsonNode>,
}

fn to_json(node: &Node) -> Option<JsonNode> {
    match node {
        Node::Leaf => None,
        Node::Internal { variable, branches } => Some(JsonNode {
            var: variable.to_string(),
            branches: branches
                .iter()
                .map(|b| JsonBranch {
                    value: b.value.to_string(),
                    prob: format!("{}/{}", b.prob.numer(), b.prob.denom()),
                    child: to_json(&b.child),
                })
                .collect(),
        }),
    }
}

/// Nested `{"var", "branches": [{"value", "prob": "num/den", "child"}]}`
/// objects. Leaves are `null`.
pub fn export_json(tree: &ProbabilityTree) -> String {
    serde_json::to_string_pretty(&to_json(tree.root())).expect("tree serializes")
}

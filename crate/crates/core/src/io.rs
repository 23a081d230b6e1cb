//! Textual tree DSL, canonical serializer, and DOT export.
//!
//! Grammar (see also the bundled `.tree` files):
//!
//! ```text
//! document   := "tree" STRING "{" agentsDecl? nodeDecl+ eventDecl? "}"
//! agentsDecl := "agents" ":" IDENT ("," IDENT)* ";"
//! nodeDecl   := "node" IDENT kind ";"?
//! kind       := "decision" "agent" "=" IDENT ("infoset" "=" IDENT)?
//!                   "{" ("act" IDENT "->" IDENT ";")+ "}"
//!             | "ambiguity" "{" ("->" IDENT ";")+ "}"
//!             | "probability" "{" (RATIONAL "->" IDENT ";")+ "}"
//!             | "outcome" ("bad")?
//! eventDecl  := "event" "{" IDENT ("," IDENT)* "}"
//! RATIONAL   := INT "/" INT | DECIMAL | INT
//! ```
//!
//! The first declared node is the root. `#` starts a comment. Node names may
//! be plain integers (the climate trees use `1`..`14`). Outcomes carry the
//! event membership inline via `bad`; an `event { ... }` block overrides the
//! inline flags. Parsing validates the tree; serialization emits a canonical
//! preorder form that round-trips structurally.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::rat::{display, parse_rational};
use crate::tree::{
    validate, ActionLabel, AgentId, DecisionTree, Event, InfoSetId, NodeId, NodeKind, TreeSpec, Violation,
};

/// A named tree together with its undesired event and optional display
/// labels. Labels are presentation metadata for DOT output; they are not
/// part of the DSL and not considered by structural equality.
#[derive(Clone, Debug)]
pub struct TreeDocument {
    pub name: String,
    pub tree: DecisionTree,
    pub event: Event,
    pub node_labels: BTreeMap<NodeId, String>,
}

impl TreeDocument {
    pub fn new(name: impl Into<String>, tree: DecisionTree, event: Event) -> Self {
        TreeDocument { name: name.into(), tree, event, node_labels: BTreeMap::new() }
    }

    /// Structural equality: same name, nodes, kinds, edges, information
    /// partition and event (labels excluded).
    pub fn structurally_eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.event == other.event
            && serialize_body(self) == serialize_body(other)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("validation failed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number(String),
    Punct(char),
    Arrow,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, message: message.into() }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(b) = self.peek() {
                if b == b'#' {
                    while let Some(c) = self.bump() {
                        if c == b'\n' {
                            break;
                        }
                    }
                } else if b.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else { break };
            let tok = match b {
                b'{' | b'}' | b';' | b',' | b'=' | b':' => {
                    self.bump();
                    Tok::Punct(b as char)
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.error("expected `->`"));
                    }
                }
                b'"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some(b'"') => break,
                            Some(c) => s.push(c as char),
                            None => return Err(self.error("unterminated string")),
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() {
                            s.push(c as char);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if self.peek() == Some(b'.') || self.peek() == Some(b'/') {
                        s.push(self.bump().unwrap() as char);
                        let mut digits = 0;
                        while let Some(c) = self.peek() {
                            if c.is_ascii_digit() {
                                s.push(c as char);
                                self.bump();
                                digits += 1;
                            } else {
                                break;
                            }
                        }
                        if digits == 0 {
                            return Err(self.error(format!("malformed number `{s}`")));
                        }
                    }
                    Tok::Number(s)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' {
                            s.push(c as char);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => return Err(self.error(format!("unexpected character `{}`", other as char))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn error_at(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .or_else(|| self.toks.last().map(|(_, l, c)| (*l, *c)))
            .unwrap_or((1, 1));
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error_at(format!("expected `{c}`")))
            }
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) if s == kw => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error_at(format!("expected `{kw}`")))
            }
        }
    }

    /// Identifiers double as node names; bare integers are allowed as node
    /// names too.
    fn name(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(Tok::Number(s)) if !s.contains('.') && !s.contains('/') => Ok(s),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error_at("expected an identifier"))
            }
        }
    }

    fn keyword_is(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }
}

/// Parse a document; the tree is validated before being returned.
pub fn parse(text: &str) -> Result<TreeDocument, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    p.expect_keyword("tree")?;
    let name = match p.next() {
        Some(Tok::Str(s)) => s,
        _ => {
            p.pos = p.pos.saturating_sub(1);
            return Err(p.error_at("expected the tree name as a quoted string"));
        }
    };
    p.expect_punct('{')?;

    let mut spec = TreeSpec::default();
    if p.keyword_is("agents") {
        p.next();
        p.expect_punct(':')?;
        loop {
            spec.agents.push(AgentId::new(p.name()?));
            match p.peek() {
                Some(Tok::Punct(',')) => {
                    p.next();
                }
                _ => break,
            }
        }
        p.expect_punct(';')?;
    }

    let mut inline_bad: Vec<NodeId> = Vec::new();
    let mut explicit_event: Option<Vec<NodeId>> = None;
    loop {
        if p.keyword_is("node") {
            p.next();
            let id = NodeId::new(p.name()?);
            let kind = parse_kind(&mut p, &id, &mut inline_bad)?;
            if matches!(p.peek(), Some(Tok::Punct(';'))) {
                p.next();
            }
            spec.nodes.push((id, kind));
        } else if p.keyword_is("event") {
            p.next();
            p.expect_punct('{')?;
            let mut ids = Vec::new();
            loop {
                ids.push(NodeId::new(p.name()?));
                match p.peek() {
                    Some(Tok::Punct(',')) => {
                        p.next();
                    }
                    _ => break,
                }
            }
            p.expect_punct('}')?;
            explicit_event = Some(ids);
        } else {
            break;
        }
    }
    p.expect_punct('}')?;
    if p.peek().is_some() {
        return Err(p.error_at("trailing input after the closing `}`"));
    }

    let tree = validate(&spec).map_err(ParseError::Invalid)?;
    let members = explicit_event.unwrap_or(inline_bad);
    for m in &members {
        if !tree.contains(m) {
            return Err(ParseError::Invalid(vec![Violation {
                node: Some(m.clone()),
                message: "event member is not a declared node".into(),
            }]));
        }
        if !matches!(tree.kind(m).unwrap(), NodeKind::Outcome) {
            return Err(ParseError::Invalid(vec![Violation {
                node: Some(m.clone()),
                message: "event member is not an outcome node".into(),
            }]));
        }
    }
    let event = Event(members.into_iter().collect());
    Ok(TreeDocument { name, tree, event, node_labels: BTreeMap::new() })
}

fn parse_kind(p: &mut Parser, id: &NodeId, inline_bad: &mut Vec<NodeId>) -> Result<NodeKind, ParseError> {
    if p.keyword_is("decision") {
        p.next();
        p.expect_keyword("agent")?;
        p.expect_punct('=')?;
        let agent = AgentId::new(p.name()?);
        let info_set = if p.keyword_is("infoset") {
            p.next();
            p.expect_punct('=')?;
            Some(InfoSetId::new(p.name()?))
        } else {
            None
        };
        p.expect_punct('{')?;
        let mut actions = Vec::new();
        while p.keyword_is("act") {
            p.next();
            let label = ActionLabel::new(p.name()?);
            match p.next() {
                Some(Tok::Arrow) => {}
                _ => {
                    p.pos = p.pos.saturating_sub(1);
                    return Err(p.error_at("expected `->`"));
                }
            }
            let target = NodeId::new(p.name()?);
            p.expect_punct(';')?;
            actions.push((label, target));
        }
        p.expect_punct('}')?;
        if actions.is_empty() {
            return Err(p.error_at("decision node needs at least one `act`"));
        }
        Ok(NodeKind::Decision { agent, info_set, actions })
    } else if p.keyword_is("ambiguity") {
        p.next();
        p.expect_punct('{')?;
        let mut successors = Vec::new();
        while matches!(p.peek(), Some(Tok::Arrow)) {
            p.next();
            successors.push(NodeId::new(p.name()?));
            p.expect_punct(';')?;
        }
        p.expect_punct('}')?;
        if successors.is_empty() {
            return Err(p.error_at("ambiguity node needs at least one successor"));
        }
        Ok(NodeKind::Ambiguity { successors })
    } else if p.keyword_is("probability") {
        p.next();
        p.expect_punct('{')?;
        let mut successors = Vec::new();
        while let Some(Tok::Number(n)) = p.peek().cloned() {
            p.next();
            let w = parse_rational(&n).ok_or_else(|| p.error_at(format!("malformed rational `{n}`")))?;
            match p.next() {
                Some(Tok::Arrow) => {}
                _ => {
                    p.pos = p.pos.saturating_sub(1);
                    return Err(p.error_at("expected `->`"));
                }
            }
            let target = NodeId::new(p.name()?);
            p.expect_punct(';')?;
            successors.push((w, target));
        }
        p.expect_punct('}')?;
        if successors.is_empty() {
            return Err(p.error_at("probability node needs at least one successor"));
        }
        Ok(NodeKind::Probability { successors })
    } else if p.keyword_is("outcome") {
        p.next();
        if p.keyword_is("bad") {
            p.next();
            inline_bad.push(id.clone());
        }
        Ok(NodeKind::Outcome)
    } else {
        Err(p.error_at("expected `decision`, `ambiguity`, `probability` or `outcome`"))
    }
}

fn serialize_body(doc: &TreeDocument) -> String {
    let tree = &doc.tree;
    let mut out = String::new();
    if !tree.agents().is_empty() {
        let names: Vec<&str> = tree.agents().iter().map(|a| a.as_str()).collect();
        let _ = writeln!(out, "  agents: {};", names.join(", "));
    }
    for id in tree.preorder_ids() {
        match tree.kind(id).unwrap() {
            NodeKind::Decision { agent, actions, .. } => {
                let infoset = if tree.is_complete_information(id).unwrap() {
                    String::new()
                } else {
                    let ix = tree.ix(id).unwrap();
                    let class = tree.class_of_ix(ix).unwrap();
                    format!(" infoset=y{class}")
                };
                let _ = write!(out, "  node {id} decision agent={agent}{infoset} {{ ");
                for (label, target) in actions {
                    let _ = write!(out, "act {label} -> {target}; ");
                }
                let _ = writeln!(out, "}}");
            }
            NodeKind::Ambiguity { successors } => {
                let _ = write!(out, "  node {id} ambiguity {{ ");
                for s in successors {
                    let _ = write!(out, "-> {s}; ");
                }
                let _ = writeln!(out, "}}");
            }
            NodeKind::Probability { successors } => {
                let _ = write!(out, "  node {id} probability {{ ");
                for (w, s) in successors {
                    let _ = write!(out, "{} -> {s}; ", display(w));
                }
                let _ = writeln!(out, "}}");
            }
            NodeKind::Outcome => {
                let bad = if doc.event.contains(id) { " bad" } else { "" };
                let _ = writeln!(out, "  node {id} outcome{bad}");
            }
        }
    }
    out
}

/// Canonical text form: preorder node ordering, inline `bad` flags, info set
/// names renumbered by class. Round-trips through [`parse`] structurally.
pub fn serialize(doc: &TreeDocument) -> String {
    format!("tree \"{}\" {{\n{}}}\n", doc.name, serialize_body(doc))
}

/// Graphviz DOT view: decision and ambiguity nodes are diamonds, probability
/// nodes squares, outcomes circles (grey when undesired); information
/// equivalence is drawn as dashed undirected edges.
pub fn emit_dot(doc: &TreeDocument) -> String {
    let tree = &doc.tree;
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", doc.name);
    let _ = writeln!(out, "  rankdir=TB;");
    for id in tree.preorder_ids() {
        let label = doc.node_labels.get(id).cloned().unwrap_or_else(|| id.to_string());
        match tree.kind(id).unwrap() {
            NodeKind::Decision { agent, .. } => {
                let _ = writeln!(out, "  \"{id}\" [shape=diamond, label=\"{label}\\n{agent}\"];");
            }
            NodeKind::Ambiguity { .. } => {
                let _ = writeln!(out, "  \"{id}\" [shape=diamond, label=\"{label}\"];");
            }
            NodeKind::Probability { .. } => {
                let _ = writeln!(out, "  \"{id}\" [shape=square, label=\"{label}\"];");
            }
            NodeKind::Outcome => {
                let fill = if doc.event.contains(id) {
                    ", style=filled, fillcolor=grey"
                } else {
                    ""
                };
                let _ = writeln!(out, "  \"{id}\" [shape=circle, label=\"{label}\"{fill}];");
            }
        }
    }
    for id in tree.preorder_ids() {
        match tree.kind(id).unwrap() {
            NodeKind::Decision { actions, .. } => {
                for (label, target) in actions {
                    let _ = writeln!(out, "  \"{id}\" -> \"{target}\" [label=\"{label}\"];");
                }
            }
            NodeKind::Ambiguity { successors } => {
                for s in successors {
                    let _ = writeln!(out, "  \"{id}\" -> \"{s}\";");
                }
            }
            NodeKind::Probability { successors } => {
                for (w, s) in successors {
                    let _ = writeln!(out, "  \"{id}\" -> \"{s}\" [label=\"{}\"];", display(w));
                }
            }
            NodeKind::Outcome => {}
        }
    }
    // dashed chains inside each information set
    let mut emitted = std::collections::BTreeSet::new();
    for id in tree.preorder_ids() {
        let ix = tree.ix(id).unwrap();
        if let Some(class) = tree.class_of_ix(ix) {
            if !emitted.insert(class) {
                continue;
            }
            let members = tree.class_members(class);
            for pair in members.windows(2) {
                let a = tree.id_of(pair[0]);
                let b = tree.id_of(pair[1]);
                let _ = writeln!(
                    out,
                    "  \"{a}\" -> \"{b}\" [style=dashed, dir=none, constraint=false];"
                );
            }
        }
    }
    let _ = writeln!(out, "}}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    const GUN: &str = r#"
# load and shoot
tree "load_and_shoot" {
  agents: i;
  node v0 ambiguity { -> v1; -> v2; }
  node v1 decision agent=i infoset=y { act shoot -> v4; act wait -> v3; }
  node v2 decision agent=i infoset=y { act shoot -> v6; act wait -> v5; }
  node v3 outcome
  node v4 outcome
  node v5 outcome
  node v6 outcome bad
}
"#;

    #[test]
    fn parses_gun_tree() {
        let doc = parse(GUN).unwrap();
        assert_eq!(doc.name, "load_and_shoot");
        assert_eq!(doc.tree.len(), 7);
        assert!(doc.event.contains(&NodeId::new("v6")));
        assert_eq!(doc.event.0.len(), 1);
    }

    #[test]
    fn dangling_reference_is_reported_by_name() {
        let text = r#"tree "t" { node a ambiguity { -> missing; } }"#;
        match parse(text) {
            Err(ParseError::Invalid(vs)) => {
                assert!(vs.iter().any(|v| v.message.contains("missing")))
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn rationals_parse_exactly() {
        let text = r#"tree "p" {
          node p probability { 7/10 -> a; 0.3 -> b; }
          node a outcome bad
          node b outcome
        }"#;
        let doc = parse(text).unwrap();
        match doc.tree.kind(&NodeId::new("p")).unwrap() {
            NodeKind::Probability { successors } => {
                assert_eq!(successors[0].0, rat(7, 10));
                assert_eq!(successors[1].0, rat(3, 10));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn event_block_overrides_inline_flags() {
        let text = r#"tree "t" {
          node a ambiguity { -> b; -> c; }
          node b outcome bad
          node c outcome
          event { c }
        }"#;
        let doc = parse(text).unwrap();
        assert!(!doc.event.contains(&NodeId::new("b")));
        assert!(doc.event.contains(&NodeId::new("c")));
    }

    #[test]
    fn serialize_round_trips_and_is_idempotent() {
        let doc = parse(GUN).unwrap();
        let s1 = serialize(&doc);
        let doc2 = parse(&s1).unwrap();
        assert!(doc.structurally_eq(&doc2));
        let s2 = serialize(&parse(&serialize(&doc2)).unwrap());
        assert_eq!(s1, s2);
    }

    #[test]
    fn numeric_node_names_round_trip() {
        let text = r#"tree "climate" {
          node 0 ambiguity { -> 1; -> 2; }
          node 1 outcome bad
          node 2 outcome
        }"#;
        let doc = parse(text).unwrap();
        let again = parse(&serialize(&doc)).unwrap();
        assert!(doc.structurally_eq(&again));
    }

    #[test]
    fn dot_marks_event_outcomes_grey() {
        let doc = parse(GUN).unwrap();
        let dot = emit_dot(&doc);
        assert!(dot.contains("\"v6\" [shape=circle, label=\"v6\", style=filled, fillcolor=grey];"));
        assert!(dot.contains("style=dashed"));
        assert_eq!(dot.matches("fillcolor=grey").count(), 1);
    }
}

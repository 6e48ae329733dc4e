// SPDX-License-Identifier: Apache-2.0

//! Signal dependency graphs over a structural Verilog subset.
//!
//! Supported: module headers (ANSI and non-ANSI ports, parameter lists),
//! net/variable declarations with initializers, continuous assignments,
//! `always`/`initial` blocks with blocking and non-blocking assignments under
//! `begin`/`if`/`case`/loops, module and gate-primitive instantiations and
//! generate blocks. Anything else is skipped and reported as a warning.
//!
//! Node names are scoped by module (`module.signal`). Top-level items that
//! sit outside any module use unscoped names.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
    /// Constructs the parser skipped.
    pub warnings: Vec<String>,
    /// Number of constructs the parser recognized; zero means no coverage.
    pub recognized: usize,
}

impl DependencyGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn add_edge(&mut self, source: String, sink: String) {
        self.nodes.insert(source.clone());
        self.nodes.insert(sink.clone());
        self.edges.insert((source, sink));
    }
}

pub fn build_dependency_graph(rtl: &str) -> DependencyGraph {
    let toks = tokenize(rtl);
    let mut p = Parser { toks: &toks, pos: 0, warnings: Vec::new(), recognized: 0 };
    let modules = p.parse_source();

    let ports: BTreeMap<&str, &Vec<(String, Dir)>> =
        modules.iter().map(|m| (m.name.as_str(), &m.ports)).collect();

    let mut graph = DependencyGraph {
        warnings: std::mem::take(&mut p.warnings),
        recognized: p.recognized,
        ..Default::default()
    };
    for m in &modules {
        lower_module(m, &ports, &mut graph);
    }
    graph
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Input,
    Output,
    Inout,
}

#[derive(Debug, Default)]
struct Module {
    name: String,
    ports: Vec<(String, Dir)>,
    signals: BTreeSet<String>,
    constants: BTreeSet<String>,
    assigns: Vec<Assign>,
    instances: Vec<Instance>,
}

#[derive(Debug)]
struct Assign {
    targets: Vec<String>,
    sources: BTreeSet<String>,
}

#[derive(Debug)]
struct Instance {
    kind: String,
    name: String,
    line: usize,
    conns: Vec<Connection>,
}

#[derive(Debug)]
struct Connection {
    port: Option<String>,
    /// Identifiers in the connected expression.
    signals: Vec<String>,
}

const GATE_PRIMITIVES: &[&str] =
    &["and", "or", "nand", "nor", "xor", "xnor", "not", "buf", "bufif0", "bufif1", "notif0", "notif1"];

const DECL_KEYWORDS: &[&str] = &[
    "wire", "reg", "logic", "integer", "tri", "tri0", "tri1", "wand", "wor", "supply0",
    "supply1", "real", "realtime", "time", "bit", "byte", "int", "shortint", "longint", "var",
    "uwire", "trireg",
];

const TYPE_MODIFIERS: &[&str] = &[
    "wire", "reg", "logic", "signed", "unsigned", "integer", "var", "bit", "int", "byte",
    "shortint", "longint", "tri", "real", "time", "const", "static", "automatic", "scalared",
    "vectored", "input", "output", "inout", "parameter", "localparam", "genvar", "uwire", "interconnect",
];

fn is_keyword(s: &str) -> bool {
    TYPE_MODIFIERS.contains(&s)
        || matches!(
            s,
            "begin" | "end" | "if" | "else" | "case" | "casez" | "casex" | "endcase" | "default"
                | "for" | "while" | "repeat" | "forever" | "posedge" | "negedge" | "or" | "and"
                | "assign" | "always" | "initial" | "module" | "endmodule" | "generate"
                | "endgenerate" | "function" | "endfunction" | "task" | "endtask" | "edge"
                | "unique" | "priority" | "inside"
        )
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    warnings: Vec<String>,
    recognized: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_some_and(|t| t.is_op(op))
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(kw))
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn line(&self) -> usize {
        self.peek().or_else(|| self.toks.last()).map_or(0, |t| t.line)
    }

    fn warn(&mut self, what: &str, line: usize) {
        self.warnings.push(format!("line {line}: skipped {what}"));
    }

    /// Consumes a balanced group starting at an opening delimiter and returns
    /// the tokens strictly inside it.
    fn group(&mut self) -> &'a [Token] {
        let (open, close) = match self.peek().map(|t| &t.tok) {
            Some(Tok::Op("(")) => ("(", ")"),
            Some(Tok::Op("[")) => ("[", "]"),
            Some(Tok::Op("{")) => ("{", "}"),
            _ => return &[],
        };
        let start = self.pos + 1;
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            if t.is_op(open) {
                depth += 1;
            } else if t.is_op(close) {
                depth -= 1;
                if depth == 0 {
                    return &self.toks[start..self.pos - 1];
                }
            }
        }
        &self.toks[start.min(self.toks.len())..]
    }

    /// Tokens up to (not including) the next `;` at nesting depth zero; the
    /// semicolon is consumed.
    fn until_semi(&mut self) -> &'a [Token] {
        let start = self.pos;
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
                Tok::Op(";") if depth <= 0 => {
                    let body = &self.toks[start..self.pos];
                    self.pos += 1;
                    return body;
                }
                _ => {}
            }
            // never run across a module boundary while recovering
            if t.is_kw("endmodule") || (t.is_kw("module") && self.pos > start) {
                return &self.toks[start..self.pos];
            }
            self.pos += 1;
        }
        &self.toks[start..]
    }

    fn skip_to_keyword(&mut self, end_kw: &str) {
        while let Some(t) = self.peek() {
            if t.is_kw("endmodule") {
                return;
            }
            self.pos += 1;
            if t.is_kw(end_kw) {
                return;
            }
        }
    }

    fn parse_source(&mut self) -> Vec<Module> {
        let mut modules = Vec::new();
        let mut loose = Module::default();
        while let Some(t) = self.peek() {
            if t.is_kw("module") || t.is_kw("macromodule") {
                self.pos += 1;
                modules.push(self.parse_module());
            } else if t.is_kw("endmodule") {
                self.pos += 1;
            } else {
                self.parse_item(&mut loose);
            }
        }
        if !loose.assigns.is_empty() || !loose.instances.is_empty() || !loose.signals.is_empty() {
            modules.push(loose);
        }
        modules
    }

    fn parse_module(&mut self) -> Module {
        let mut m = Module::default();
        let line = self.line();
        match self.bump().and_then(Token::ident) {
            Some(name) => m.name = name.to_string(),
            None => {
                self.warn("module without a name", line);
                self.skip_to_keyword("endmodule");
                return m;
            }
        }
        self.recognized += 1;
        if self.eat_op("#") {
            let params = self.group();
            for (i, t) in params.iter().enumerate() {
                if let Some(name) = t.ident() {
                    if params.get(i + 1).is_some_and(|n| n.is_op("=")) {
                        m.constants.insert(name.to_string());
                    }
                }
            }
        }
        if self.at_op("(") {
            let ports = self.group();
            self.parse_port_list(ports, &mut m);
        }
        self.eat_op(";");
        while let Some(t) = self.peek() {
            if t.is_kw("endmodule") {
                self.pos += 1;
                break;
            }
            if t.is_kw("module") {
                // missing endmodule; let the caller start the next module
                break;
            }
            self.parse_item(&mut m);
        }
        m
    }

    fn parse_port_list(&mut self, toks: &[Token], m: &mut Module) {
        let mut dir: Option<Dir> = None;
        for seg in split_top(toks, ",") {
            if let Some(d) = seg.iter().find_map(direction) {
                dir = Some(d);
            }
            if let Some(name) = last_plain_ident(seg) {
                m.signals.insert(name.clone());
                match dir {
                    Some(d) => m.ports.push((name, d)),
                    // non-ANSI header; direction comes from a later declaration
                    None => m.ports.push((name, Dir::Inout)),
                }
            }
        }
    }

    fn parse_item(&mut self, m: &mut Module) {
        let Some(t) = self.peek() else { return };
        let line = t.line;
        match &t.tok {
            Tok::Op(";") => {
                self.pos += 1;
            }
            Tok::Ident(kw) => match kw.as_str() {
                "input" | "output" | "inout" => {
                    let d = direction(t).expect("direction keyword");
                    self.pos += 1;
                    let body = self.until_semi();
                    let names = self.declaration(body, m);
                    for name in names {
                        match m.ports.iter_mut().find(|(p, _)| *p == name) {
                            Some(port) => port.1 = d,
                            None => m.ports.push((name, d)),
                        }
                    }
                    self.recognized += 1;
                }
                "parameter" | "localparam" | "defparam" => {
                    self.pos += 1;
                    let body = self.until_semi();
                    for (i, t) in body.iter().enumerate() {
                        if let Some(name) = t.ident() {
                            if body.get(i + 1).is_some_and(|n| n.is_op("=")) {
                                m.constants.insert(name.to_string());
                            }
                        }
                    }
                    self.recognized += 1;
                }
                "genvar" => {
                    self.pos += 1;
                    for t in self.until_semi() {
                        if let Some(name) = t.ident() {
                            m.constants.insert(name.to_string());
                        }
                    }
                    self.recognized += 1;
                }
                k if DECL_KEYWORDS.contains(&k) => {
                    self.pos += 1;
                    let body = self.until_semi();
                    self.declaration(body, m);
                    self.recognized += 1;
                }
                "assign" => {
                    self.pos += 1;
                    self.skip_delay();
                    let body = self.until_semi();
                    for seg in split_top(body, ",") {
                        if let Some(a) = assignment(seg) {
                            m.assigns.push(a);
                        }
                    }
                    self.recognized += 1;
                }
                "always" | "always_ff" | "always_comb" | "always_latch" | "initial" | "final" => {
                    self.pos += 1;
                    self.recognized += 1;
                    self.parse_statement(m);
                }
                "generate" | "endgenerate" => {
                    self.pos += 1;
                }
                "begin" => {
                    self.pos += 1;
                    self.skip_label();
                    while let Some(t) = self.peek() {
                        if t.is_kw("end") {
                            self.pos += 1;
                            self.skip_label();
                            break;
                        }
                        if t.is_kw("endmodule") {
                            break;
                        }
                        self.parse_item(m);
                    }
                }
                "if" => {
                    self.pos += 1;
                    self.group();
                    self.parse_item(m);
                    if self.at_kw("else") {
                        self.pos += 1;
                        self.parse_item(m);
                    }
                }
                "for" => {
                    self.pos += 1;
                    self.group();
                    self.parse_item(m);
                }
                "function" | "task" => {
                    self.pos += 1;
                    let end = if kw == "function" { "endfunction" } else { "endtask" };
                    self.skip_to_keyword(end);
                    self.warn(kw, line);
                }
                "specify" => {
                    self.skip_to_keyword("endspecify");
                    self.warn("specify block", line);
                }
                "typedef" => {
                    self.pos += 1;
                    let body = self.until_semi();
                    // enum members act as constants
                    if body.first().is_some_and(|t| t.is_kw("enum")) {
                        if let Some(open) = body.iter().position(|t| t.is_op("{")) {
                            let close = body.iter().rposition(|t| t.is_op("}")).unwrap_or(body.len());
                            for seg in split_top(&body[open + 1..close.max(open + 1)], ",") {
                                if let Some(name) = seg.first().and_then(Token::ident) {
                                    m.constants.insert(name.to_string());
                                }
                            }
                        }
                        self.recognized += 1;
                    } else {
                        self.warn("typedef", line);
                    }
                }
                "enum" => {
                    // anonymous enum declaration: `enum {A, B} state;`
                    self.pos += 1;
                    while !self.at_op("{") && self.peek().is_some() && !self.at_op(";") {
                        self.pos += 1;
                    }
                    let members = self.group();
                    for seg in split_top(members, ",") {
                        if let Some(name) = seg.first().and_then(Token::ident) {
                            m.constants.insert(name.to_string());
                        }
                    }
                    let body = self.until_semi();
                    self.declaration(body, m);
                    self.recognized += 1;
                }
                _ => self.parse_instance_or_typed_decl(m),
            },
            _ => {
                let _ = self.until_semi();
                self.warn("unrecognized item", line);
            }
        }
    }

    fn skip_label(&mut self) {
        if self.at_op(":") {
            self.pos += 1;
            if self.peek().and_then(Token::ident).is_some() {
                self.pos += 1;
            }
        }
    }

    fn skip_delay(&mut self) {
        if self.at_op("(") {
            // drive strength, e.g. `assign (strong0, weak1) y = a;`
            let inner = self.toks.get(self.pos + 1).and_then(Token::ident).unwrap_or("");
            if inner.starts_with("strong") || inner.starts_with("weak") || inner.starts_with("pull")
                || inner.starts_with("supply") || inner.starts_with("highz")
            {
                self.group();
            }
        }
        if self.eat_op("#") {
            if self.at_op("(") {
                self.group();
            } else {
                self.pos += 1;
            }
        }
    }

    fn parse_instance_or_typed_decl(&mut self, m: &mut Module) {
        let line = self.line();
        let kind = self.bump().and_then(Token::ident).unwrap_or_default().to_string();
        let is_gate = GATE_PRIMITIVES.contains(&kind.as_str());
        if self.eat_op("#") {
            if self.at_op("(") {
                self.group();
            } else {
                self.pos += 1;
            }
        }
        // gate primitives may omit the instance name
        if is_gate && self.at_op("(") {
            let name = format!("{kind}${line}");
            let conns = self.group();
            m.instances.push(Instance { kind: kind.clone(), name, line, conns: connections(conns) });
            self.eat_op(",");
        }
        let mut any = false;
        while let Some(name) = self.peek().and_then(Token::ident).map(str::to_string) {
            self.pos += 1;
            // instance arrays `u[3:0]`
            if self.at_op("[") {
                self.group();
            }
            if self.at_op("(") {
                let conns = self.group();
                m.instances.push(Instance {
                    kind: kind.clone(),
                    name,
                    line,
                    conns: connections(conns),
                });
                any = true;
            } else {
                // user-defined type declaration: `state_t state, next;`
                m.signals.insert(name.clone());
                if self.at_op("=") {
                    let rest = self.until_semi();
                    let mut seg = vec![Token { tok: Tok::Ident(name), line }];
                    seg.extend_from_slice(rest);
                    if let Some(a) = assignment(&seg) {
                        m.assigns.push(a);
                    }
                    self.recognized += 1;
                    return;
                }
                any = true;
            }
            if !self.eat_op(",") {
                break;
            }
        }
        if any && self.eat_op(";") {
            self.recognized += 1;
        } else {
            let _ = self.until_semi();
            self.warn(&format!("`{kind}` construct"), line);
        }
    }

    /// Registers declared names and any initializer assignments; returns the
    /// declared names.
    fn declaration(&mut self, body: &[Token], m: &mut Module) -> Vec<String> {
        let mut names = Vec::new();
        for seg in split_top(body, ",") {
            let eq = seg.iter().position(|t| t.is_op("="));
            let head = &seg[..eq.unwrap_or(seg.len())];
            if let Some(name) = last_plain_ident(head) {
                m.signals.insert(name.clone());
                if let Some(eq) = eq {
                    m.assigns.push(Assign {
                        targets: vec![name.clone()],
                        sources: expr_idents(&seg[eq + 1..]).into_iter().collect(),
                    });
                }
                names.push(name);
            }
        }
        names
    }

    fn parse_statement(&mut self, m: &mut Module) {
        let Some(t) = self.peek() else { return };
        let line = t.line;
        match &t.tok {
            Tok::Op(";") => {
                self.pos += 1;
            }
            Tok::Op("@") => {
                self.pos += 1;
                if self.at_op("(") {
                    self.group();
                } else {
                    // `@*` or `@name`
                    self.pos += 1;
                }
                self.parse_statement(m);
            }
            Tok::Op("#") => {
                self.pos += 1;
                if self.at_op("(") {
                    self.group();
                } else {
                    self.pos += 1;
                }
                self.parse_statement(m);
            }
            Tok::Op("->") => {
                let _ = self.until_semi();
            }
            Tok::System(_) => {
                let _ = self.until_semi();
            }
            Tok::Ident(kw) => match kw.as_str() {
                "begin" | "fork" => {
                    self.pos += 1;
                    self.skip_label();
                    while let Some(t) = self.peek() {
                        if t.is_kw("end") || t.is_kw("join") || t.is_kw("join_any") || t.is_kw("join_none") {
                            self.pos += 1;
                            self.skip_label();
                            break;
                        }
                        if t.is_kw("endmodule") {
                            self.warn("unterminated block", line);
                            break;
                        }
                        self.parse_statement(m);
                    }
                }
                "if" => {
                    self.pos += 1;
                    self.group();
                    self.parse_statement(m);
                    if self.at_kw("else") {
                        self.pos += 1;
                        self.parse_statement(m);
                    }
                }
                "unique" | "unique0" | "priority" => {
                    self.pos += 1;
                    self.parse_statement(m);
                }
                "case" | "casez" | "casex" => {
                    self.pos += 1;
                    self.group();
                    self.parse_case_items(m);
                }
                "for" | "while" | "repeat" | "wait" | "foreach" => {
                    self.pos += 1;
                    self.group();
                    self.parse_statement(m);
                }
                "forever" => {
                    self.pos += 1;
                    self.parse_statement(m);
                }
                "disable" | "return" | "break" | "continue" | "release" | "deassign" => {
                    let _ = self.until_semi();
                }
                "assign" | "force" => {
                    // procedural continuous assignment
                    self.pos += 1;
                    let body = self.until_semi();
                    if let Some(a) = assignment(body) {
                        m.assigns.push(a);
                    }
                }
                k if DECL_KEYWORDS.contains(&k) => {
                    self.pos += 1;
                    let body = self.until_semi();
                    self.declaration(body, m);
                }
                "endmodule" | "module" => {
                    self.warn("statement cut short by module boundary", line);
                }
                "end" | "endcase" | "else" => {
                    // stray closer; let the enclosing construct deal with it
                    self.warn(&format!("unexpected `{kw}`"), line);
                    self.pos += 1;
                }
                _ => {
                    let body = self.until_semi();
                    match assignment(body) {
                        Some(a) => m.assigns.push(a),
                        // task call or unsupported statement
                        None if body.iter().any(|t| t.is_op("=")) => self.warn("statement", line),
                        None => {}
                    }
                }
            },
            _ => {
                let _ = self.until_semi();
                self.warn("statement", line);
            }
        }
    }

    fn parse_case_items(&mut self, m: &mut Module) {
        while let Some(t) = self.peek() {
            if t.is_kw("endcase") {
                self.pos += 1;
                return;
            }
            if t.is_kw("endmodule") {
                self.warn("unterminated case", t.line);
                return;
            }
            if t.is_kw("default") {
                self.pos += 1;
                self.eat_op(":");
                self.parse_statement(m);
                continue;
            }
            // labels up to `:` at depth zero
            let mut depth = 0i32;
            let start = self.pos;
            while let Some(t) = self.peek() {
                match t.tok {
                    Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                    Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
                    Tok::Op(":") if depth == 0 => break,
                    Tok::Op(";") if depth == 0 => break,
                    _ => {}
                }
                if t.is_kw("endcase") || t.is_kw("endmodule") {
                    break;
                }
                self.pos += 1;
            }
            if self.eat_op(":") {
                self.parse_statement(m);
            } else {
                let line = self.toks.get(start).map_or(0, |t| t.line);
                self.warn("case item", line);
                self.eat_op(";");
            }
        }
    }
}

fn direction(t: &Token) -> Option<Dir> {
    match t.ident()? {
        "input" => Some(Dir::Input),
        "output" => Some(Dir::Output),
        "inout" => Some(Dir::Inout),
        _ => None,
    }
}

/// Splits at separator tokens that sit at nesting depth zero.
fn split_top<'t>(toks: &'t [Token], sep: &str) -> Vec<&'t [Token]> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
            Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
            _ if depth == 0 && t.is_op(sep) => {
                out.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < toks.len() {
        out.push(&toks[start..]);
    }
    out
}

/// Last identifier outside any brackets that is not a keyword.
fn last_plain_ident(toks: &[Token]) -> Option<String> {
    let mut depth = 0i32;
    let mut last = None;
    for t in toks {
        match &t.tok {
            Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
            Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
            Tok::Ident(s) if depth == 0 && !is_keyword(s) => last = Some(s.clone()),
            _ => {}
        }
    }
    last
}

/// Identifiers referenced by an expression: function names and hierarchical
/// prefixes are excluded, numbers and system calls never appear.
fn expr_idents(toks: &[Token]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if let Tok::Ident(s) = &t.tok {
            if is_keyword(s) {
                continue;
            }
            let next = toks.get(i + 1);
            if next.is_some_and(|n| n.is_op("(") || n.is_op(".") || n.is_op("::")) {
                continue;
            }
            if i > 0 && (toks[i - 1].is_op(".") || toks[i - 1].is_op("::")) {
                continue;
            }
            out.push(s.clone());
        }
    }
    out
}

/// Identifiers written by an lvalue; index expressions do not count.
fn lvalue_targets(toks: &[Token]) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    for t in toks {
        match &t.tok {
            Tok::Op("[") | Tok::Op("(") => depth += 1,
            Tok::Op("]") | Tok::Op(")") => depth -= 1,
            Tok::Ident(s) if depth == 0 && !is_keyword(s) => out.push(s.clone()),
            _ => {}
        }
    }
    out
}

const COMPOUND_OPS: &[&str] =
    &["+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", "<<<=", ">>>="];

/// `lhs = rhs`, `lhs <= rhs`, `lhs op= rhs`, `x++`.
fn assignment(toks: &[Token]) -> Option<Assign> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
            Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
            Tok::Op(op) if depth == 0 && (op == "=" || op == "<=" || COMPOUND_OPS.contains(&op)) => {
                let targets = lvalue_targets(&toks[..i]);
                if targets.is_empty() {
                    return None;
                }
                let mut rhs = &toks[i + 1..];
                // intra-assignment delay `q <= #1 d;`
                if rhs.first().is_some_and(|t| t.is_op("#")) {
                    rhs = rhs.get(2..).unwrap_or(&[]);
                }
                let mut sources: BTreeSet<String> = expr_idents(rhs).into_iter().collect();
                if op != "=" && op != "<=" {
                    sources.extend(targets.iter().cloned());
                }
                return Some(Assign { targets, sources });
            }
            Tok::Op(op) if depth == 0 && (op == "++" || op == "--") => {
                let targets = lvalue_targets(&toks[..i.max(1)]);
                let targets = if targets.is_empty() { lvalue_targets(&toks[i + 1..]) } else { targets };
                if targets.is_empty() {
                    return None;
                }
                let sources = targets.iter().cloned().collect();
                return Some(Assign { targets, sources });
            }
            _ => {}
        }
    }
    None
}

fn connections(toks: &[Token]) -> Vec<Connection> {
    split_top(toks, ",")
        .into_iter()
        .filter(|seg| !seg.is_empty())
        .map(|seg| {
            if seg[0].is_op(".") {
                let port = seg.get(1).and_then(Token::ident).map(str::to_string);
                let inner = seg.get(2..).unwrap_or(&[]);
                let inner = if inner.first().is_some_and(|t| t.is_op("(")) && inner.len() >= 2 {
                    &inner[1..inner.len() - 1]
                } else {
                    // `.name` implicit connection
                    &[][..]
                };
                let signals = if inner.is_empty() && seg.len() == 2 {
                    port.iter().cloned().collect()
                } else {
                    expr_idents(inner)
                };
                Connection { port, signals }
            } else {
                Connection { port: None, signals: expr_idents(seg) }
            }
        })
        .collect()
}

fn lower_module(
    m: &Module,
    ports: &BTreeMap<&str, &Vec<(String, Dir)>>,
    g: &mut DependencyGraph,
) {
    let q = |s: &str| {
        if m.name.is_empty() {
            s.to_string()
        } else {
            format!("{}.{}", m.name, s)
        }
    };
    for s in &m.signals {
        if !m.constants.contains(s) {
            g.nodes.insert(q(s));
        }
    }
    for a in &m.assigns {
        for d in a.targets.iter().filter(|d| !m.constants.contains(*d)) {
            for s in a.sources.iter().filter(|s| !m.constants.contains(*s)) {
                g.add_edge(q(s), q(d));
            }
        }
    }
    for inst in &m.instances {
        let node = q(&inst.name);
        g.nodes.insert(node.clone());
        let gate = GATE_PRIMITIVES.contains(&inst.kind.as_str());
        let child = ports.get(inst.kind.as_str());
        let mut unresolved = false;
        for (idx, conn) in inst.conns.iter().enumerate() {
            let dir = if gate {
                Some(if idx == 0 { Dir::Output } else { Dir::Input })
            } else {
                child.and_then(|ps| match &conn.port {
                    Some(name) => ps.iter().find(|(p, _)| p == name).map(|p| p.1),
                    None => ps.get(idx).map(|p| p.1),
                })
            };
            let dir = dir.unwrap_or_else(|| {
                unresolved = true;
                Dir::Input
            });
            for s in conn.signals.iter().filter(|s| !m.constants.contains(*s)) {
                match dir {
                    Dir::Input => g.add_edge(q(s), node.clone()),
                    Dir::Output => g.add_edge(node.clone(), q(s)),
                    Dir::Inout => {
                        g.add_edge(q(s), node.clone());
                        g.add_edge(node.clone(), q(s));
                    }
                }
            }
        }
        if unresolved {
            g.warnings.push(format!(
                "line {}: port directions of `{}` unknown; connections of `{}` treated as inputs",
                inst.line, inst.kind, inst.name
            ));
        }
    }
}

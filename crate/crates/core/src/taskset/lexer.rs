// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for the structural Verilog subset.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// `$display`, `$clog2`, ...
    System(String),
    /// Literal numbers, based numbers and macro uses; never a signal.
    Number,
    Str,
    Op(&'static str),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        matches!(self.tok, Tok::Op(o) if o == op)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Ident(s) if s == kw)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }
}

// Longest first so greedy matching works.
const OPS: &[&str] = &[
    "<<<=", ">>>=", "<<<", ">>>", "===", "!==", "<<=", ">>=", "<=", ">=", "==", "!=", "&&", "||",
    "**", "<<", ">>", "~&", "~|", "~^", "^~", "->", "+:", "-:", "::", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "++", "--", "(", ")", "[", "]", "{", "}", ";", ",", ":", ".", "=",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "?", "@", "#", "'",
];

pub(crate) fn tokenize(src: &str) -> Vec<Token> {
    let bytes: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let n = bytes.len();

    let is_ident_start = |c: char| c.is_ascii_alphabetic() || c == '_';
    let is_ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '$';

    while i < n {
        let c = bytes[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // comments
        if c == '/' && i + 1 < n && bytes[i + 1] == '/' {
            while i < n && bytes[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && i + 1 < n && bytes[i + 1] == '*' {
            i += 2;
            while i < n && !(bytes[i] == '*' && i + 1 < n && bytes[i + 1] == '/') {
                if bytes[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(n);
            continue;
        }
        // attributes (* ... *), but not the `@(*)` sensitivity list
        if c == '(' && i + 1 < n && bytes[i + 1] == '*' && !(i + 2 < n && bytes[i + 2] == ')') {
            i += 2;
            while i < n && !(bytes[i] == '*' && i + 1 < n && bytes[i + 1] == ')') {
                if bytes[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(n);
            continue;
        }
        // compiler directives: skip the whole line for definitions, treat
        // other backtick names as constants
        if c == '`' {
            let start = i + 1;
            i += 1;
            while i < n && is_ident_char(bytes[i]) {
                i += 1;
            }
            let name: String = bytes[start..i].iter().collect();
            match name.as_str() {
                "define" | "timescale" | "include" | "default_nettype" | "ifdef" | "ifndef"
                | "else" | "elsif" | "endif" | "undef" | "resetall" | "celldefine"
                | "endcelldefine" => {
                    while i < n && bytes[i] != '\n' {
                        // line continuation inside macros
                        if bytes[i] == '\\' && i + 1 < n && bytes[i + 1] == '\n' {
                            line += 1;
                            i += 1;
                        }
                        i += 1;
                    }
                }
                _ => toks.push(Token { tok: Tok::Number, line }),
            }
            continue;
        }
        if c == '"' {
            i += 1;
            while i < n && bytes[i] != '"' {
                if bytes[i] == '\\' {
                    i += 1;
                }
                if i < n && bytes[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i += 1;
            toks.push(Token { tok: Tok::Str, line });
            continue;
        }
        if c == '\\' {
            let start = i;
            while i < n && !bytes[i].is_whitespace() {
                i += 1;
            }
            let name: String = bytes[start..i].iter().collect();
            toks.push(Token { tok: Tok::Ident(name), line });
            continue;
        }
        if c == '$' {
            let start = i;
            i += 1;
            while i < n && is_ident_char(bytes[i]) {
                i += 1;
            }
            let name: String = bytes[start..i].iter().collect();
            toks.push(Token { tok: Tok::System(name), line });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < n && is_ident_char(bytes[i]) {
                i += 1;
            }
            let name: String = bytes[start..i].iter().collect();
            toks.push(Token { tok: Tok::Ident(name), line });
            continue;
        }
        if c.is_ascii_digit() {
            while i < n && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_' || bytes[i] == '.') {
                // exponent sign: 1e-3
                if (bytes[i] == 'e' || bytes[i] == 'E')
                    && i + 1 < n
                    && (bytes[i + 1] == '-' || bytes[i + 1] == '+')
                {
                    i += 1;
                }
                i += 1;
            }
            let mut j = i;
            while j < n && (bytes[j] == ' ' || bytes[j] == '\t') {
                j += 1;
            }
            if j < n && bytes[j] == '\'' {
                i = lex_based_tail(&bytes, j);
            }
            toks.push(Token { tok: Tok::Number, line });
            continue;
        }
        if c == '\'' {
            let next = bytes.get(i + 1).copied().unwrap_or(' ');
            if matches!(next, 's' | 'S' | 'b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H')
                || matches!(next, '0' | '1' | 'x' | 'X' | 'z' | 'Z')
            {
                i = lex_based_tail(&bytes, i);
                toks.push(Token { tok: Tok::Number, line });
                continue;
            }
        }
        let rest: String = bytes[i..(i + 4).min(n)].iter().collect();
        match OPS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                i += op.chars().count();
                toks.push(Token { tok: Tok::Op(op), line });
            }
            None => {
                // unknown character; ignore it
                i += 1;
            }
        }
    }
    toks
}

/// `i` points at the apostrophe. Returns the index one past the number.
fn lex_based_tail(bytes: &[char], mut i: usize) -> usize {
    let n = bytes.len();
    i += 1;
    if i < n && matches!(bytes[i], 's' | 'S') {
        i += 1;
    }
    if i < n && matches!(bytes[i], 'b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H') {
        i += 1;
        while i < n && (bytes[i] == ' ' || bytes[i] == '\t') {
            i += 1;
        }
    }
    while i < n && (bytes[i].is_ascii_hexdigit() || matches!(bytes[i], '_' | 'x' | 'X' | 'z' | 'Z' | '?')) {
        i += 1;
    }
    i
}

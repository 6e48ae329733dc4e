// SPDX-License-Identifier: Apache-2.0

use sha2::{Digest, Sha256};

/// Canonical form of RTL source used for duplicate detection.
///
/// Line and block comments are removed (a block comment becomes a single
/// space so the tokens around it stay separated), whitespace runs collapse to
/// one space and the result is trimmed. Newlines count as whitespace, so the
/// output is a single line. String literals are copied verbatim (an
/// unterminated literal runs to the end of the text). Case is preserved.
pub fn normalize_rtl(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    // Pending whitespace is emitted lazily so trailing runs never survive.
    let mut pending_space = false;

    let push = |out: &mut String, pending: &mut bool, c: char| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
        out.push(c);
    };

    while let Some(c) = chars.next() {
        match c {
            '/' if chars.peek() == Some(&'/') => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        break;
                    }
                }
                pending_space = true;
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = '\0';
                for n in chars.by_ref() {
                    if prev == '*' && n == '/' {
                        break;
                    }
                    prev = n;
                }
                pending_space = true;
            }
            '"' => {
                push(&mut out, &mut pending_space, '"');
                let mut escaped = false;
                // copied verbatim up to the closing quote or end of text
                for n in chars.by_ref() {
                    out.push(n);
                    if escaped {
                        escaped = false;
                    } else if n == '\\' {
                        escaped = true;
                    } else if n == '"' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => pending_space = true,
            c => push(&mut out, &mut pending_space, c),
        }
    }
    out
}

/// Hex SHA-256 of the canonical text.
pub fn canonical_hash(text: &str) -> String {
    hex::encode(Sha256::digest(normalize_rtl(text).as_bytes()))
}

//! Hand-rolled lexer for the Solidity subset.

use crate::diagnostics::{codes, Diagnostic};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Identifier or keyword; the parser decides which.
    Word(String),
    /// Decimal or 0x-hex literal, text kept verbatim.
    Number(String),
    /// String literal with escapes already applied.
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn is_word(&self, w: &str) -> bool {
        matches!(&self.kind, TokenKind::Word(s) if s == w)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.kind, TokenKind::Punct(s) if *s == p)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Punct(p) => format!("`{p}`"),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

// Longest-match first.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "**", "++", "--", "+=", "-=", "*=", "/=", "%=", "&&", "||", "==", "!=",
    "<=", ">=", "<<", ">>", "&=", "|=", "^=", "=>", ":=", "+", "-", "*", "/", "%", "!",
    "~", "&", "|", "^", "<", ">", "=", "(", ")", "[", "]", "{", "}", ";", ",", ".", "?",
    ":",
];

pub fn lex(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! span_at {
        ($lo:expr, $hi:expr, $line:expr, $col:expr) => {
            Span::new($lo as u32, $hi as u32, $line, $col)
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // Line comment
        if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        // Block comment
        if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'*' {
            let (start_line, start_col) = (line, col);
            let start = i;
            i += 2;
            col += 2;
            let mut closed = false;
            while i + 1 < bytes.len() {
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    col += 2;
                    closed = true;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            if !closed {
                return Err(Diagnostic::error(codes::SYNTAX_ERROR, "unterminated block comment")
                    .at(span_at!(start, bytes.len(), start_line, start_col)));
            }
            continue;
        }
        // String literal
        if c == b'"' {
            let (start_line, start_col) = (line, col);
            let start = i;
            i += 1;
            col += 1;
            let mut value = String::new();
            let mut closed = false;
            while i < bytes.len() {
                let ch = bytes[i];
                if ch == b'"' {
                    i += 1;
                    col += 1;
                    closed = true;
                    break;
                }
                if ch == b'\n' {
                    break;
                }
                if ch == b'\\' {
                    if i + 1 >= bytes.len() {
                        break;
                    }
                    let esc = bytes[i + 1];
                    let decoded = match esc {
                        b'"' => '"',
                        b'\\' => '\\',
                        b'n' => '\n',
                        b't' => '\t',
                        b'r' => '\r',
                        other => {
                            return Err(Diagnostic::error(
                                codes::SYNTAX_ERROR,
                                format!("unsupported escape sequence `\\{}`", other as char),
                            )
                            .at(span_at!(i, i + 2, line, col)));
                        }
                    };
                    value.push(decoded);
                    i += 2;
                    col += 2;
                    continue;
                }
                value.push(ch as char);
                i += 1;
                col += 1;
            }
            if !closed {
                return Err(Diagnostic::error(codes::SYNTAX_ERROR, "unterminated string literal")
                    .at(span_at!(start, i, start_line, start_col)));
            }
            tokens.push(Token {
                kind: TokenKind::Str(value),
                span: span_at!(start, i, start_line, start_col),
            });
            continue;
        }
        // Number literal (decimal or hex, underscores allowed)
        if c.is_ascii_digit() {
            let (start_line, start_col) = (line, col);
            let start = i;
            if c == b'0' && i + 1 < bytes.len() && (bytes[i + 1] == b'x' || bytes[i + 1] == b'X') {
                i += 2;
                col += 2;
                while i < bytes.len() && (bytes[i].is_ascii_hexdigit() || bytes[i] == b'_') {
                    i += 1;
                    col += 1;
                }
            } else {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                    col += 1;
                }
            }
            // A letter immediately after a number is a malformed literal
            // (scientific notation and unit suffixes are out of subset).
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'$') {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    format!(
                        "malformed number literal `{}`",
                        &source[start..=i.min(bytes.len() - 1)]
                    ),
                )
                .at(span_at!(start, i + 1, start_line, start_col)));
            }
            tokens.push(Token {
                kind: TokenKind::Number(source[start..i].to_string()),
                span: span_at!(start, i, start_line, start_col),
            });
            continue;
        }
        // Identifier / keyword
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            let (start_line, start_col) = (line, col);
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
            {
                i += 1;
                col += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Word(source[start..i].to_string()),
                span: span_at!(start, i, start_line, start_col),
            });
            continue;
        }
        // Punctuation, longest match first
        let rest = &source[i..];
        let mut matched = None;
        for p in PUNCTS {
            if rest.starts_with(p) {
                matched = Some(*p);
                break;
            }
        }
        match matched {
            Some(p) => {
                tokens.push(Token {
                    kind: TokenKind::Punct(p),
                    span: span_at!(i, i + p.len(), line, col),
                });
                i += p.len();
                col += p.len() as u32;
            }
            None => {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    format!("unexpected character `{}`", c as char),
                )
                .at(span_at!(i, i + 1, line, col)));
            }
        }
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span::new(bytes.len() as u32, bytes.len() as u32, line, col),
    });
    Ok(tokens)
}

//! Source positions attached to AST nodes for diagnostics.

use serde::Serialize;

/// A byte range within one source file, plus the 1-based line/column of its
/// start. Line and column are carried directly so diagnostics can be rendered
/// without keeping the source text around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(lo: u32, hi: u32, line: u32, column: u32) -> Self {
        Span { lo, hi, line, column }
    }

    /// Span covering `self` through `other`.
    pub fn to(self, other: Span) -> Span {
        Span {
            lo: self.lo,
            hi: other.hi.max(self.hi),
            line: self.line,
            column: self.column,
        }
    }

    pub fn slice<'a>(&self, source: &'a str) -> &'a str {
        &source[self.lo as usize..self.hi as usize]
    }
}

// Spans are excluded from serialized ASTs so that structural comparison of
// two parses ignores where the text happened to sit in the file.
impl Serialize for Span {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_none()
    }
}

/// An identifier with its source location.
#[derive(Debug, Clone, Serialize)]
pub struct Ident {
    pub name: String,
    #[serde(skip)]
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident { name: name.into(), span }
    }

    pub fn synthetic(name: impl Into<String>) -> Self {
        Ident { name: name.into(), span: Span::default() }
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Ident {}

impl std::fmt::Display for Ident {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name)
    }
}

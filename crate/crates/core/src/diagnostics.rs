//! Structured diagnostics shared by every analysis stage.
//!
//! Each diagnostic carries a stable machine-readable `code` so CI pipelines
//! can match on it, plus source positions when the finding maps back to the
//! input contract.

use crate::span::Span;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Info => f.write_str("info"),
            Severity::Warning => f.write_str("warning"),
            Severity::Error => f.write_str("error"),
        }
    }
}

/// Stable diagnostic codes. The string form is part of the CLI contract.
pub mod codes {
    pub const SYNTAX_ERROR: &str = "SYNTAX_ERROR";
    pub const UNSUPPORTED_CONSTRUCT: &str = "UNSUPPORTED_CONSTRUCT";
    pub const UNRESOLVED_IDENTIFIER: &str = "UNRESOLVED_IDENTIFIER";
    pub const DUPLICATE_DECLARATION: &str = "DUPLICATE_DECLARATION";
    pub const SEL_CLASH: &str = "SEL_CLASH";
    pub const SLOT_ARRAY_OF_STRUCTS: &str = "SLOT_ARRAY_OF_STRUCTS";
    pub const SLOT_NESTED_STRUCT: &str = "SLOT_NESTED_STRUCT";
    pub const SLOT_PACKED_TAIL: &str = "SLOT_PACKED_TAIL";
    pub const UPGRADE_INCOMPATIBLE: &str = "UPGRADE_INCOMPATIBLE";
    pub const ORPHANED_NAMESPACE: &str = "ORPHANED_NAMESPACE";
    pub const EMPTY_CONTRACT: &str = "EMPTY_CONTRACT";
    pub const UNREFERENCED_STATE: &str = "UNREFERENCED_STATE";
    pub const PUBLIC_GETTER_DROPPED: &str = "PUBLIC_GETTER_DROPPED";
    pub const TRANSFORM_UNSUPPORTED_USAGE: &str = "TRANSFORM_UNSUPPORTED_USAGE";
    pub const FACET_MAP_INVALID: &str = "FACET_MAP_INVALID";
    pub const CLASH_IN_NEW: &str = "CLASH_IN_NEW";
    pub const REPLACE_UNKNOWN_SELECTOR: &str = "REPLACE_UNKNOWN_SELECTOR";
}

/// One source position in {line, column} form (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePos {
    pub line: u32,
    pub column: u32,
}

impl From<Span> for SourcePos {
    fn from(span: Span) -> Self {
        SourcePos { line: span.line, column: span.column }
    }
}

/// A structured remediation attached to a diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Suggestion {
    /// Rename a function to move its selector away from a clash.
    #[serde(rename_all = "camelCase")]
    RenameFunction {
        function: String,
        new_name: String,
        old_signature: String,
        new_signature: String,
        old_selector: String,
        new_selector: String,
    },
    /// Replace a dynamic array of structs with a mapping plus counter.
    #[serde(rename_all = "camelCase")]
    ArrayToMapping {
        variable: String,
        mapping_decl: String,
        counter_decl: String,
    },
    /// Free-form guidance when no mechanical rewrite applies.
    Note { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<SourcePos>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<Suggestion>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            code: code.to_string(),
            message: message.into(),
            positions: Vec::new(),
            suggestion: None,
        }
    }

    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, code, message)
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, code, message)
    }

    pub fn info(code: &str, message: impl Into<String>) -> Self {
        Self::new(Severity::Info, code, message)
    }

    pub fn at(mut self, span: Span) -> Self {
        self.positions.push(span.into());
        self
    }

    pub fn with_suggestion(mut self, suggestion: Suggestion) -> Self {
        self.suggestion = Some(suggestion);
        self
    }

    /// Render as a single human-readable line, optionally colorized.
    pub fn render(&self, color: bool) -> String {
        let sev = if color {
            match self.severity {
                Severity::Error => format!("\x1b[31m{}\x1b[0m", self.severity),
                Severity::Warning => format!("\x1b[33m{}\x1b[0m", self.severity),
                Severity::Info => format!("\x1b[36m{}\x1b[0m", self.severity),
            }
        } else {
            self.severity.to_string()
        };
        let pos = self
            .positions
            .first()
            .map(|p| format!(" at {}:{}", p.line, p.column))
            .unwrap_or_default();
        let mut line = format!("{sev}[{}]{pos}: {}", self.code, self.message);
        if let Some(Suggestion::RenameFunction { new_signature, .. }) = &self.suggestion {
            line.push_str(&format!(" (suggested fix: rename to `{new_signature}`)"));
        }
        line
    }
}

/// True when at least one diagnostic is error severity.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

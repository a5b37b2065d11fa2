//! Text format for schemes.
//!
//! ```text
//! # line comments start with '#'
//! scheme "a" {
//!   wing minus {
//!     splitter 1 ratio 1/sqrt2     # amplitude reflectance r
//!     splitter 2 intensity 0.5     # intensity reflectance R, stored as r = sqrt(R)
//!     splitter 3 ratio 0.70710678
//!     phase ab 0                   # radians, default 0
//!     phase cd 0
//!   }
//!   wing plus = minus              # clone an earlier wing
//!   annihilate { (a-, a+) -> P; (b-, b+) -> Q }
//! }
//! ```
//!
//! Missing splitter lines default to 50/50 and missing phases to 0. Numbers are
//! plain decimals or `x/sqrt2`. Rules are stored sorted by `(minus, plus)` path.
//! Files conventionally use the `.scm.txt` extension.

mod lexer;
mod parser;
mod render;

use std::fmt;

pub use parser::{parse, parse_bytes, parse_number, parse_with_warnings, Parsed};
pub use render::render;

/// 1-based position of a token; `length` counts characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line,
            column,
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            span,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            span,
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.span, self.message)
    }
}

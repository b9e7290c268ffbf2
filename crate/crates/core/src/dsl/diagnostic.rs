use std::fmt;

/// Source region: 1-based line, 1-based column range `[col_start, col_end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub line: u32,
    pub col_start: u32,
    pub col_end: u32,
}

impl Span {
    pub fn new(line: u32, col_start: u32, col_end: u32) -> Self {
        Span {
            line,
            col_start,
            col_end,
        }
    }

    /// Smallest span covering both (end of `other` when on a later line).
    pub fn to(self, other: Span) -> Span {
        if other.line == self.line {
            Span::new(self.line, self.col_start, other.col_end.max(self.col_end))
        } else {
            self
        }
    }
}

/// Optional source location carried by IR nodes.
///
/// Locations never take part in structural equality, so a re-parsed program
/// compares equal to the original regardless of layout.
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc(pub Option<Span>);

impl Loc {
    pub const NONE: Loc = Loc(None);

    pub fn at(span: Span) -> Loc {
        Loc(Some(span))
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Option<Span>,
    pub message: String,
    pub code: &'static str,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Option<Span>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
            code,
        }
    }

    pub fn warning(code: &'static str, span: Option<Span>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            span,
            message: message.into(),
            code,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: error[CODE]: message`
    pub fn render(&self, file: &str) -> String {
        match self.span {
            Some(s) => format!("{file}:{}:{}: {self}", s.line, s.col_start),
            None => format!("{file}: {self}"),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// Diagnostic codes.
pub mod codes {
    pub const SYNTAX: &str = "E001";
    pub const UNKNOWN_IDENT: &str = "E002";
    pub const TIME_IN_FINITE: &str = "E003";
    pub const NON_INCREMENT: &str = "E004";
    pub const TIME_RESET: &str = "E005";
    pub const UNDEFINED_AGENT: &str = "E006";
    pub const DUPLICATE_TARGET: &str = "E007";
    pub const DUPLICATE_NAME: &str = "E008";
    pub const RESERVED: &str = "E009";
    pub const BAD_CONSTANT: &str = "E010";
    pub const BAD_NETWORK: &str = "E011";
    pub const TIME_ATOM: &str = "E012";
    pub const UNKNOWN_OVERRIDE: &str = "E013";
    pub const BAD_REFERENCE: &str = "E014";
    pub const DIVISION: &str = "W001";
}

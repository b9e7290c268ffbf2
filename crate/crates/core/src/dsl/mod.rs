//! Text front end: lexing, parsing, name resolution, static checks and
//! pretty-printing of the model language.
//!
//! ```text
//! params { k = 0.5; }
//! vars { int X = 10; }
//! decay :- [X > 0 -> X' = X - 1]{k * X}.decay;
//! network decay;
//! ```

mod diagnostic;
mod lexer;
mod lower;
mod parser;
mod syntax;
mod unparse;
mod validate;

pub use diagnostic::{codes, Diagnostic, Loc, Severity, Span};
pub use unparse::{action_text, reset_text, unparse};
pub(crate) use validate::time_atom;
pub use validate::validate_program;

use crate::ir::Program;

/// Result of parsing: a program when no errors were found, plus every
/// diagnostic (warnings included).
#[derive(Clone, Debug)]
pub struct ParseOutcome {
    pub program: Option<Program>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseOutcome {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.is_error())
    }

    pub fn into_result(self) -> Result<Program, Vec<Diagnostic>> {
        match self.program {
            Some(p) => Ok(p),
            None => Err(self
                .diagnostics
                .into_iter()
                .filter(|d| d.is_error())
                .collect()),
        }
    }
}

/// Parses and validates a model. Warnings are dropped; use
/// [`parse_program_with`] to see them.
pub fn parse_program(text: &str) -> Result<Program, Vec<Diagnostic>> {
    parse_program_with(text, &[]).into_result()
}

/// Parses with parameter overrides (`name = value` replaces the definition
/// of parameter `name`).
pub fn parse_program_with(text: &str, overrides: &[(String, f64)]) -> ParseOutcome {
    let raw = match parser::parse_raw(text) {
        Ok(r) => r,
        Err(d) => {
            return ParseOutcome {
                program: None,
                diagnostics: vec![d],
            }
        }
    };
    let (program, mut diagnostics) = lower::lower(&raw, overrides);
    let program = match program {
        Some(p) => {
            diagnostics.extend(validate_program(&p));
            (!diagnostics.iter().any(|d| d.is_error())).then_some(p)
        }
        None => None,
    };
    ParseOutcome {
        program,
        diagnostics,
    }
}

/// Like [`parse_program_with`] for raw bytes; invalid UTF-8 is reported as
/// a syntax error at the offending position.
pub fn parse_bytes(bytes: &[u8], overrides: &[(String, f64)]) -> ParseOutcome {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_program_with(s, overrides),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() as u32 + 1;
            let col = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            ParseOutcome {
                program: None,
                diagnostics: vec![Diagnostic::error(
                    codes::SYNTAX,
                    Some(Span::new(line, col, col + 1)),
                    "input is not valid UTF-8",
                )],
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Continuation, Expr, Rate, ResetLaw, VarId, VarKind};

    const CELLS: &str = "
        params { k = 2; dt = 28; }
        vars { int X = 10; W = dt; }
        grow :- [X > 0 -> X' = X + 1]{k * X}.grow
              + [X > 0 -> X' = X - 1]{X}.grow;
        check :- [Time = W -> W' = W + dt]{inf}.check;
        network grow || check;
    ";

    #[test]
    fn parameters_are_inlined_and_clock_declared() {
        let p = parse_program(CELLS).unwrap();
        assert_eq!(p.variables.len(), 3);
        assert_eq!(p.variables[1].init, 28.0);
        assert_eq!(p.variables[2].kind, VarKind::Time);
        let b = &p.definitions[0].branches[0];
        assert_eq!(
            b.action.rate,
            Rate::Finite(Expr::mul(Expr::Const(2.0), Expr::Var(VarId(0))))
        );
        assert_eq!(b.continuation, Continuation::Agent("grow".into()));
        let c = &p.definitions[1].branches[0];
        assert_eq!(c.action.reset[0].law, ResetLaw::Increment(28.0));
    }

    #[test]
    fn overrides_replace_parameters() {
        let o = parse_program_with(CELLS, &[("k".into(), 3.5)]);
        let p = o.program.unwrap();
        assert_eq!(
            p.definitions[0].branches[0].action.rate,
            Rate::Finite(Expr::mul(Expr::Const(3.5), Expr::Var(VarId(0))))
        );
        let bad = parse_program_with(CELLS, &[("nope".into(), 1.0)]);
        assert!(bad.program.is_none());
        assert_eq!(bad.diagnostics[0].code, codes::UNKNOWN_OVERRIDE);
    }

    #[test]
    fn round_trip() {
        let p = parse_program(CELLS).unwrap();
        let text = unparse(&p);
        assert_eq!(parse_program(&text).unwrap(), p, "{text}");
    }

    #[test]
    fn invalid_utf8() {
        let o = parse_bytes(b"a :- \xff", &[]);
        assert_eq!(o.diagnostics[0].span, Some(Span::new(1, 6, 7)));
    }

    #[test]
    fn diagnostic_rendering() {
        let errs = parse_program("a :- [X > 0 -> ]{1}.a; network a;").unwrap_err();
        assert_eq!(
            errs[0].render("m.sccp"),
            "m.sccp:1:7: error[E002]: unknown identifier `X`"
        );
    }
}

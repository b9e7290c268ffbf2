//! Recursive-descent parser producing the surface syntax tree.

use super::diagnostic::{codes, Diagnostic, Span};
use super::lexer::{lex, Tok, Token};
use super::syntax::*;
use crate::ir::{BinOp, CmpOp};

pub const KEYWORDS: &[&str] = &[
    "params", "vars", "int", "network", "inf", "true", "and", "or", "not", "min", "max",
];

const DISTRIBUTIONS: &[(&str, usize)] = &[("Unif", 2), ("Exp", 1), ("Normal", 2)];

type PResult<T> = Result<T, Diagnostic>;

pub fn parse_raw(src: &str) -> PResult<RawProgram> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    p.program()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(codes::SYNTAX, Some(self.span()), msg))
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.peek() == &t {
            Ok(self.bump().span)
        } else {
            self.err(format!(
                "expected {}, found {}",
                t.describe(),
                self.peek().describe()
            ))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn name(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                self.err(format!("`{s}` is a keyword and cannot be used as {what}"))
            }
            Tok::Ident(s) => Ok((s, self.bump().span)),
            t => self.err(format!("expected {what}, found {}", t.describe())),
        }
    }

    fn program(&mut self) -> PResult<RawProgram> {
        let mut prog = RawProgram::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(s) if s == "params" => {
                    self.bump();
                    self.params_block(&mut prog)?;
                }
                Tok::Ident(s) if s == "vars" => {
                    self.bump();
                    self.vars_block(&mut prog)?;
                }
                Tok::Ident(s) if s == "network" => {
                    if prog.network.is_some() {
                        return self.err("network declared more than once");
                    }
                    let start = self.bump().span;
                    prog.network = Some(self.network(start)?);
                }
                Tok::Ident(_) if self.peek_at(1) == &Tok::Defines => {
                    let d = self.definition()?;
                    prog.defs.push(d);
                }
                t => {
                    return self.err(format!(
                        "expected a definition, `params`, `vars` or `network`, found {}",
                        t.describe()
                    ))
                }
            }
        }
        Ok(prog)
    }

    fn entry_end(&mut self) {
        if !self.eat(&Tok::Semi) {
            self.eat(&Tok::Comma);
        }
    }

    fn params_block(&mut self, prog: &mut RawProgram) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let (name, span) = self.name("a parameter name")?;
            self.expect(Tok::Eq)?;
            let value = self.expr()?;
            self.entry_end();
            prog.params.push(RawParam { name, span, value });
        }
        Ok(())
    }

    fn vars_block(&mut self, prog: &mut RawProgram) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let integer = self.eat_kw("int");
            let (name, span) = self.name("a variable name")?;
            self.expect(Tok::Eq)?;
            let init = self.expr()?;
            self.entry_end();
            prog.vars.push(RawVar {
                name,
                span,
                integer,
                init,
            });
        }
        Ok(())
    }

    fn network(&mut self, start: Span) -> PResult<(Vec<RawNetworkEntry>, Span)> {
        let mut entries = vec![self.network_entry()?];
        while self.eat(&Tok::Par) {
            entries.push(self.network_entry()?);
        }
        self.eat(&Tok::Semi);
        Ok((entries, start))
    }

    fn network_entry(&mut self) -> PResult<RawNetworkEntry> {
        if let Tok::Number(v) = *self.peek() {
            if v == 0.0 {
                let span = self.bump().span;
                return Ok(RawNetworkEntry { agent: None, span });
            }
        }
        let (name, span) = self.name("an agent name")?;
        Ok(RawNetworkEntry {
            agent: Some(name),
            span,
        })
    }

    fn definition(&mut self) -> PResult<RawDef> {
        let (name, span) = self.name("an agent name")?;
        self.expect(Tok::Defines)?;
        let mut branches = vec![self.branch()?];
        while self.eat(&Tok::Plus) {
            branches.push(self.branch()?);
        }
        self.eat(&Tok::Semi);
        Ok(RawDef {
            name,
            span,
            branches,
        })
    }

    fn branch(&mut self) -> PResult<RawBranch> {
        let start = self.expect(Tok::LBracket)?;
        let guard = if self.peek() == &Tok::Arrow {
            RawGuard::True
        } else {
            self.guard()?
        };
        self.expect(Tok::Arrow)?;
        let mut resets = Vec::new();
        if self.peek() != &Tok::RBracket {
            resets.push(self.reset()?);
            while self.eat(&Tok::Comma) || self.eat(&Tok::AndAnd) || self.eat_kw("and") {
                resets.push(self.reset()?);
            }
        }
        self.expect(Tok::RBracket)?;
        self.expect(Tok::LBrace)?;
        let rate = if self.eat_kw("inf") {
            RawRate::Inf
        } else {
            RawRate::Expr(self.expr()?)
        };
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Dot)?;
        let (cont, cont_span) = match self.peek().clone() {
            Tok::Number(0.0) => (None, self.bump().span),
            Tok::Ident(_) => {
                let (n, s) = self.name("an agent name")?;
                (Some(n), s)
            }
            t => {
                return self.err(format!(
                    "expected an agent name or `0`, found {}",
                    t.describe()
                ))
            }
        };
        Ok(RawBranch {
            guard,
            resets,
            rate,
            cont,
            cont_span,
            span: start.to(cont_span),
        })
    }

    fn reset(&mut self) -> PResult<RawReset> {
        let (target, target_span) = self.name("a variable name")?;
        self.expect(Tok::Prime)?;
        self.expect(Tok::Eq)?;
        let rhs = match self.peek().clone() {
            Tok::Ident(s) if self.peek_at(1) == &Tok::LParen => {
                match DISTRIBUTIONS.iter().find(|(n, _)| *n == s) {
                    Some(&(_, arity)) => {
                        let start = self.bump().span;
                        self.bump();
                        let mut args = vec![self.expr()?];
                        while self.eat(&Tok::Comma) {
                            args.push(self.expr()?);
                        }
                        let end = self.expect(Tok::RParen)?;
                        let span = start.to(end);
                        if args.len() != arity {
                            return Err(Diagnostic::error(
                                codes::SYNTAX,
                                Some(span),
                                format!("`{s}` takes {arity} argument(s), found {}", args.len()),
                            ));
                        }
                        RawRhs::Dist { name: s, args }
                    }
                    None => RawRhs::Expr(self.expr()?),
                }
            }
            _ => RawRhs::Expr(self.expr()?),
        };
        Ok(RawReset {
            target,
            target_span,
            rhs,
            span: target_span.to(self.prev_span()),
        })
    }

    fn guard(&mut self) -> PResult<RawGuard> {
        let mut g = self.and_guard()?;
        while self.eat_kw("or") {
            let r = self.and_guard()?;
            g = RawGuard::Or(Box::new(g), Box::new(r));
        }
        Ok(g)
    }

    fn and_guard(&mut self) -> PResult<RawGuard> {
        let mut g = self.not_guard()?;
        while self.eat_kw("and") || self.eat(&Tok::AndAnd) {
            let r = self.not_guard()?;
            g = RawGuard::And(Box::new(g), Box::new(r));
        }
        Ok(g)
    }

    fn not_guard(&mut self) -> PResult<RawGuard> {
        if self.eat_kw("not") || self.eat(&Tok::Bang) {
            return Ok(RawGuard::Not(Box::new(self.not_guard()?)));
        }
        if self.eat_kw("true") {
            return Ok(RawGuard::True);
        }
        if self.peek() == &Tok::LParen {
            // `(` opens either a sub-guard or the left operand of a
            // comparison; try the comparison first and fall back
            let save = self.pos;
            let as_cmp = self.comparison();
            if as_cmp.is_ok() {
                return as_cmp;
            }
            let cmp_err = as_cmp.unwrap_err();
            let cmp_pos = self.pos;
            self.pos = save;
            self.bump();
            let inner = self
                .guard()
                .and_then(|g| self.expect(Tok::RParen).map(|_| g));
            return match inner {
                Ok(g) => Ok(g),
                Err(e) => {
                    // report whichever attempt got further
                    if cmp_pos > self.pos {
                        Err(cmp_err)
                    } else {
                        Err(e)
                    }
                }
            };
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<RawGuard> {
        let a = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Eq => CmpOp::Eq,
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            t => {
                return self.err(format!(
                    "expected a comparison operator, found {}",
                    t.describe()
                ))
            }
        };
        self.bump();
        let b = self.expr()?;
        Ok(RawGuard::Cmp(op, a, b))
    }

    fn expr(&mut self) -> PResult<RawExpr> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let r = self.term()?;
            let span = e.span().to(r.span());
            e = RawExpr::Bin(op, Box::new(e), Box::new(r), span);
        }
        Ok(e)
    }

    fn term(&mut self) -> PResult<RawExpr> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let r = self.unary()?;
            let span = e.span().to(r.span());
            e = RawExpr::Bin(op, Box::new(e), Box::new(r), span);
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<RawExpr> {
        if self.peek() == &Tok::Minus {
            let start = self.bump().span;
            let inner = self.unary()?;
            let span = start.to(inner.span());
            return Ok(RawExpr::Neg(Box::new(inner), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<RawExpr> {
        match self.peek().clone() {
            Tok::Number(v) => Ok(RawExpr::Num(v, self.bump().span)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if (s == "min" || s == "max") => {
                let start = self.bump().span;
                self.expect(Tok::LParen)?;
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                let op = if s == "min" { BinOp::Min } else { BinOp::Max };
                Ok(RawExpr::Bin(op, Box::new(a), Box::new(b), start.to(end)))
            }
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                self.err(format!("unexpected keyword `{s}` in expression"))
            }
            Tok::Ident(s) => Ok(RawExpr::Ident(s, self.bump().span)),
            t => self.err(format!("expected an expression, found {}", t.describe())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parenthesised_guard_and_parenthesised_operand() {
        let p = parse_raw("a :- [(X + 1) > 0 and (Y > 0 or Z < 1) -> ]{1}.a; network a;").unwrap();
        match &p.defs[0].branches[0].guard {
            RawGuard::And(l, r) => {
                assert!(matches!(**l, RawGuard::Cmp(CmpOp::Gt, ..)));
                assert!(matches!(**r, RawGuard::Or(..)));
            }
            g => panic!("unexpected guard {g:?}"),
        }
    }

    #[test]
    fn null_continuation_and_distributions() {
        let p = parse_raw("a :- [true -> K' = Unif(0, 2), X' = X - 1]{inf}.0").unwrap();
        let b = &p.defs[0].branches[0];
        assert!(b.cont.is_none());
        assert!(matches!(b.rate, RawRate::Inf));
        assert!(matches!(b.resets[0].rhs, RawRhs::Dist { .. }));
        assert_eq!(b.resets.len(), 2);
    }

    #[test]
    fn missing_bracket_reports_position() {
        let e = parse_raw("a :- [X > 0 -> X' = X + 1{1}.a").unwrap_err();
        assert_eq!(e.span.unwrap().line, 1);
        assert!(e.message.contains("`]`"), "{}", e.message);
    }

    #[test]
    fn keyword_as_name_is_rejected() {
        assert!(parse_raw("inf :- [true -> ]{1}.inf").is_err());
    }

    #[test]
    fn wrong_arity() {
        let e = parse_raw("a :- [true -> K' = Unif(1)]{inf}.a").unwrap_err();
        assert!(e.message.contains("2 argument"));
    }
}

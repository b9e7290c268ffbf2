//! Name resolution: surface tree to IR. Parameters are inlined as
//! expressions, variables become ids and the clock is declared on first use.

use std::collections::HashMap;

use super::diagnostic::{codes, Diagnostic, Loc, Span};
use super::syntax::*;
use crate::ir::{
    Action, AgentDef, BinOp, Branch, Continuation, Distribution, Expr, Guard, NetworkEntry,
    Program, Rate, ResetAtom, ResetLaw, VarDecl, VarId, TIME,
};

enum Binding {
    Param(Expr),
    Var(VarId),
}

#[derive(Clone, Copy, PartialEq)]
enum Scope {
    /// Parameters only: variable initialisers.
    Constant,
    Full,
}

struct Lowerer {
    names: HashMap<String, Binding>,
    time_id: VarId,
    time_used: bool,
    diags: Vec<Diagnostic>,
}

/// Lowers a surface program. `overrides` replace parameter definitions by
/// constants; naming an unknown parameter is an error.
pub fn lower(raw: &RawProgram, overrides: &[(String, f64)]) -> (Option<Program>, Vec<Diagnostic>) {
    let mut lw = Lowerer {
        names: HashMap::new(),
        time_id: VarId(raw.vars.len()),
        time_used: false,
        diags: Vec::new(),
    };

    let mut variables = Vec::with_capacity(raw.vars.len() + 1);
    for (i, v) in raw.vars.iter().enumerate() {
        if v.name == TIME {
            lw.error(
                codes::RESERVED,
                v.span,
                format!("`{TIME}` is reserved for the clock"),
            );
        } else if lw.names.contains_key(&v.name) {
            lw.error(
                codes::DUPLICATE_NAME,
                v.span,
                format!("variable `{}` declared more than once", v.name),
            );
        } else {
            lw.names.insert(v.name.clone(), Binding::Var(VarId(i)));
        }
        // placeholder initial value, filled in once parameters are known
        variables.push(VarDecl::stream(v.name.clone(), v.integer, 0.0));
    }

    for p in &raw.params {
        if p.name == TIME {
            lw.error(
                codes::RESERVED,
                p.span,
                format!("`{TIME}` is reserved for the clock"),
            );
            continue;
        }
        if lw.names.contains_key(&p.name) {
            lw.error(
                codes::DUPLICATE_NAME,
                p.span,
                format!("`{}` is already declared", p.name),
            );
            continue;
        }
        let value = match overrides.iter().rev().find(|(n, _)| *n == p.name) {
            Some(&(_, v)) => Some(Expr::Const(v)),
            None => lw.expr(&p.value, Scope::Full),
        };
        if let Some(e) = value {
            if let Some(c) = e.const_value() {
                if !c.is_finite() {
                    lw.error(
                        codes::BAD_CONSTANT,
                        p.span,
                        format!("parameter `{}` evaluates to {c}", p.name),
                    );
                }
            }
            lw.names.insert(p.name.clone(), Binding::Param(e));
        }
    }
    for (name, _) in overrides {
        if !raw.params.iter().any(|p| &p.name == name) {
            lw.diags.push(Diagnostic::error(
                codes::UNKNOWN_OVERRIDE,
                None,
                format!("no parameter named `{name}` to override"),
            ));
        }
    }

    for (decl, v) in variables.iter_mut().zip(&raw.vars) {
        let Some(e) = lw.expr(&v.init, Scope::Constant) else {
            continue;
        };
        match e.const_value() {
            Some(c) if c.is_finite() => decl.init = if v.integer { c.round() } else { c },
            Some(c) => lw.error(
                codes::BAD_CONSTANT,
                v.init.span(),
                format!("initial value of `{}` evaluates to {c}", v.name),
            ),
            None => lw.error(
                codes::BAD_CONSTANT,
                v.init.span(),
                format!("initial value of `{}` must not depend on variables", v.name),
            ),
        }
    }

    let mut definitions: Vec<AgentDef> = Vec::with_capacity(raw.defs.len());
    for d in &raw.defs {
        if definitions.iter().any(|o| o.name == d.name) {
            lw.error(
                codes::DUPLICATE_NAME,
                d.span,
                format!("agent `{}` defined more than once", d.name),
            );
            continue;
        }
        let branches = d.branches.iter().filter_map(|b| lw.branch(b)).collect();
        definitions.push(AgentDef {
            name: d.name.clone(),
            branches,
            loc: Loc::at(d.span),
        });
    }

    let mut network = Vec::new();
    match &raw.network {
        None => lw.diags.push(Diagnostic::error(
            codes::BAD_NETWORK,
            None,
            "no `network` declaration",
        )),
        Some((entries, _)) => {
            for e in entries {
                match &e.agent {
                    Some(a) => network.push(NetworkEntry {
                        agent: a.clone(),
                        loc: Loc::at(e.span),
                    }),
                    None => lw.error(
                        codes::BAD_NETWORK,
                        e.span,
                        "the null agent cannot appear in the network",
                    ),
                }
            }
        }
    }

    if lw.time_used {
        variables.push(VarDecl::time());
    }
    let failed = lw.diags.iter().any(|d| d.is_error());
    let program = (!failed).then_some(Program {
        variables,
        definitions,
        network,
    });
    (program, lw.diags)
}

impl Lowerer {
    fn error(&mut self, code: &'static str, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, Some(span), msg));
    }

    fn expr(&mut self, e: &RawExpr, scope: Scope) -> Option<Expr> {
        match e {
            RawExpr::Num(v, _) => Some(Expr::Const(*v)),
            RawExpr::Ident(name, span) => self.ident(name, *span, scope),
            RawExpr::Neg(inner, _) => {
                let inner = self.expr(inner, scope)?;
                Some(match inner {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::sub(Expr::Const(0.0), e),
                })
            }
            RawExpr::Bin(op, a, b, _) => {
                let a = self.expr(a, scope);
                let b = self.expr(b, scope);
                Some(Expr::bin(*op, a?, b?))
            }
        }
    }

    fn ident(&mut self, name: &str, span: Span, scope: Scope) -> Option<Expr> {
        match self.names.get(name) {
            Some(Binding::Param(e)) => Some(e.clone()),
            Some(Binding::Var(id)) => Some(Expr::Var(*id)),
            None if name == TIME => {
                if scope == Scope::Constant {
                    self.error(
                        codes::BAD_CONSTANT,
                        span,
                        "initial values cannot depend on the clock",
                    );
                    return None;
                }
                self.time_used = true;
                Some(Expr::Var(self.time_id))
            }
            None => {
                self.error(
                    codes::UNKNOWN_IDENT,
                    span,
                    format!("unknown identifier `{name}`"),
                );
                None
            }
        }
    }

    fn guard(&mut self, g: &RawGuard) -> Option<Guard> {
        Some(match g {
            RawGuard::True => Guard::True,
            RawGuard::Cmp(op, a, b) => {
                let a = self.expr(a, Scope::Full);
                let b = self.expr(b, Scope::Full);
                Guard::cmp(*op, a?, b?)
            }
            RawGuard::And(a, b) => {
                let a = self.guard(a);
                let b = self.guard(b);
                Guard::and(a?, b?)
            }
            RawGuard::Or(a, b) => {
                let a = self.guard(a);
                let b = self.guard(b);
                Guard::or(a?, b?)
            }
            RawGuard::Not(a) => Guard::not(self.guard(a)?),
        })
    }

    fn reset(&mut self, r: &RawReset) -> Option<ResetAtom> {
        let target = match self.names.get(&r.target) {
            Some(Binding::Var(id)) => *id,
            Some(Binding::Param(_)) => {
                self.error(
                    codes::BAD_REFERENCE,
                    r.target_span,
                    format!("`{}` is a parameter and cannot be reset", r.target),
                );
                return None;
            }
            None if r.target == TIME => {
                self.time_used = true;
                self.time_id
            }
            None => {
                self.error(
                    codes::UNKNOWN_IDENT,
                    r.target_span,
                    format!("unknown variable `{}`", r.target),
                );
                return None;
            }
        };
        let law = match &r.rhs {
            RawRhs::Expr(e) => classify(target, self.expr(e, Scope::Full)?),
            RawRhs::Dist { name, args } => {
                let mut a = Vec::with_capacity(args.len());
                for x in args {
                    a.push(self.expr(x, Scope::Full));
                }
                let a: Option<Vec<Expr>> = a.into_iter().collect();
                let mut a = a?.into_iter();
                let mut next = || a.next().expect("arity checked by the parser");
                ResetLaw::Random(match name.as_str() {
                    "Unif" => Distribution::Uniform(next(), next()),
                    "Exp" => Distribution::Exponential(next()),
                    _ => Distribution::Normal(next(), next()),
                })
            }
        };
        Some(ResetAtom {
            target,
            law,
            loc: Loc::at(r.span),
        })
    }

    fn branch(&mut self, b: &RawBranch) -> Option<Branch> {
        let guard = self.guard(&b.guard);
        let mut reset = Some(Vec::with_capacity(b.resets.len()));
        for r in &b.resets {
            match (self.reset(r), reset.as_mut()) {
                (Some(a), Some(v)) => v.push(a),
                _ => reset = None,
            }
        }
        let rate = match &b.rate {
            RawRate::Inf => Some(Rate::Infinite),
            RawRate::Expr(e) => self.expr(e, Scope::Full).map(Rate::Finite),
        };
        let continuation = match &b.cont {
            Some(n) => Continuation::Agent(n.clone()),
            None => Continuation::Null,
        };
        Some(Branch {
            action: Action {
                guard: guard?,
                reset: reset?,
                rate: rate?,
            },
            continuation,
            loc: Loc::at(b.span),
            continuation_loc: Loc::at(b.cont_span),
        })
    }
}

/// `X' = X ± c` (with `c` free of variables) is an increment; anything
/// else is an assignment.
fn classify(target: VarId, e: Expr) -> ResetLaw {
    let is_target = |x: &Expr| matches!(x, Expr::Var(v) if *v == target);
    if is_target(&e) {
        return ResetLaw::Increment(0.0);
    }
    if let Expr::Bin(op, a, b) = &e {
        match op {
            BinOp::Add if is_target(a) => {
                if let Some(c) = b.const_value() {
                    return ResetLaw::Increment(c);
                }
            }
            BinOp::Add if is_target(b) => {
                if let Some(c) = a.const_value() {
                    return ResetLaw::Increment(c);
                }
            }
            BinOp::Sub if is_target(a) => {
                if let Some(c) = b.const_value() {
                    return ResetLaw::Increment(-c);
                }
            }
            _ => {}
        }
    }
    ResetLaw::Assign(e)
}

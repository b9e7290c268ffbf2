//! Static checks on lowered programs.

use std::collections::HashSet;

use super::diagnostic::{codes, Diagnostic, Loc};
use crate::ir::{
    BinOp, CmpOp, Continuation, Distribution, Expr, Guard, Program, Rate, ResetLaw, VarId, VarKind,
    TIME,
};

/// Runs every static check. An empty error set means the program can be
/// compiled; warnings may still be present.
pub fn validate_program(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = p.variables.len();
    let span = |l: Loc| l.0;

    let mut seen = HashSet::new();
    for v in &p.variables {
        if !seen.insert(v.name.as_str()) {
            out.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                None,
                format!("variable `{}` declared more than once", v.name),
            ));
        }
        if (v.kind == VarKind::Time) != (v.name == TIME) {
            out.push(Diagnostic::error(
                codes::RESERVED,
                None,
                format!("`{TIME}` is reserved for the clock"),
            ));
        }
    }
    let time = p.time_var();

    let mut defs = HashSet::new();
    for d in &p.definitions {
        if !defs.insert(d.name.as_str()) {
            out.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                span(d.loc),
                format!("agent `{}` defined more than once", d.name),
            ));
        }
    }

    for d in &p.definitions {
        for b in &d.branches {
            let a = &b.action;
            let bspan = span(b.loc);
            let mut reads_unknown = false;
            let mut check = |v: VarId| reads_unknown |= v.index() >= n;
            a.guard.visit_vars(&mut check);
            if let Rate::Finite(e) = &a.rate {
                e.visit_vars(&mut check);
            }
            for r in &a.reset {
                r.visit_reads(&mut check);
                check(r.target);
            }
            if reads_unknown {
                out.push(Diagnostic::error(
                    codes::BAD_REFERENCE,
                    bspan,
                    "reference to an undeclared variable",
                ));
                continue;
            }

            let mut targets = HashSet::new();
            for r in &a.reset {
                let rspan = span(r.loc).or(bspan);
                if !targets.insert(r.target) {
                    out.push(Diagnostic::error(
                        codes::DUPLICATE_TARGET,
                        rspan,
                        format!("`{}` is reset more than once", p.var_name(r.target)),
                    ));
                }
                if Some(r.target) == time {
                    out.push(Diagnostic::error(
                        codes::TIME_RESET,
                        rspan,
                        format!("`{TIME}` cannot be reset"),
                    ));
                }
                if let ResetLaw::Increment(k) = r.law {
                    if !k.is_finite() {
                        out.push(Diagnostic::error(
                            codes::BAD_CONSTANT,
                            rspan,
                            format!("increment evaluates to {k}"),
                        ));
                    }
                }
            }

            match &a.rate {
                Rate::Finite(rate) => {
                    if let Some(t) = time {
                        if a.guard.references(t) || rate.references(t) {
                            out.push(Diagnostic::error(
                                codes::TIME_IN_FINITE,
                                bspan,
                                format!("`{TIME}` may only be read by instantaneous actions"),
                            ));
                        }
                    }
                    for r in &a.reset {
                        if !r.is_increment() {
                            out.push(Diagnostic::error(
                                codes::NON_INCREMENT,
                                span(r.loc).or(bspan),
                                "finite-rate reset must be increment-by-constant",
                            ));
                        }
                    }
                }
                Rate::Infinite => {
                    if let Some(t) = time {
                        check_time_atoms(&a.guard, t, bspan, &mut out);
                    }
                }
            }

            if let Continuation::Agent(c) = &b.continuation {
                if !defs.contains(c.as_str()) {
                    out.push(Diagnostic::error(
                        codes::UNDEFINED_AGENT,
                        span(b.continuation_loc).or(bspan),
                        format!("undefined agent `{c}`"),
                    ));
                }
            }

            division_warnings(p, &a.guard, &a.rate, &a.reset, bspan, &mut out);
        }
    }

    if p.network.is_empty() {
        out.push(Diagnostic::error(
            codes::BAD_NETWORK,
            None,
            "the network is empty",
        ));
    }
    for e in &p.network {
        if !defs.contains(e.agent.as_str()) {
            out.push(Diagnostic::error(
                codes::UNDEFINED_AGENT,
                span(e.loc),
                format!("undefined agent `{}` in network", e.agent),
            ));
        }
    }
    out
}

/// Clock atoms must be top-level conjuncts of the form `Time op E` with
/// `op` one of `=`, `>=`, `<=` and `E` not reading the clock.
fn check_time_atoms(g: &Guard, t: VarId, span: Option<super::Span>, out: &mut Vec<Diagnostic>) {
    for c in g.conjuncts() {
        if !c.references(t) {
            continue;
        }
        let ok = match c {
            Guard::Cmp(op, a, b) => time_atom(*op, a, b, t).is_some(),
            _ => false,
        };
        if !ok {
            out.push(Diagnostic::error(
                codes::TIME_ATOM,
                span,
                format!(
                    "`{TIME}` may only appear as `{TIME} = E`, `{TIME} >= E` or `{TIME} <= E` \
                     conjuncts with `E` independent of `{TIME}`"
                ),
            ));
        }
    }
}

/// Normalises a clock atom to `Time op E`, if it is one.
pub(crate) fn time_atom<'a>(
    op: CmpOp,
    a: &'a Expr,
    b: &'a Expr,
    t: VarId,
) -> Option<(CmpOp, &'a Expr)> {
    let is_t = |e: &Expr| matches!(e, Expr::Var(v) if *v == t);
    let (op, e) = if is_t(a) && !b.references(t) {
        (op, b)
    } else if is_t(b) && !a.references(t) {
        (op.flip(), a)
    } else {
        return None;
    };
    matches!(op, CmpOp::Eq | CmpOp::Ge | CmpOp::Le).then_some((op, e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    const ALL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    fn point(c: f64) -> Interval {
        Interval { lo: c, hi: c }
    }

    fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn hull(v: [f64; 4]) -> Interval {
        // 0 * inf arises only at a closed endpoint, where the product is 0
        let v = v.map(|x| if x.is_nan() { 0.0 } else { x });
        Interval {
            lo: v.iter().copied().fold(f64::INFINITY, f64::min),
            hi: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn eval_interval(e: &Expr, env: &[Interval]) -> Interval {
    match e {
        Expr::Const(c) => Interval::point(*c),
        Expr::Var(v) => env[v.index()],
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_interval(a, env), eval_interval(b, env));
            match op {
                BinOp::Add => Interval {
                    lo: a.lo + b.lo,
                    hi: a.hi + b.hi,
                },
                BinOp::Sub => Interval {
                    lo: a.lo - b.hi,
                    hi: a.hi - b.lo,
                },
                BinOp::Mul => Interval::hull([a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]),
                BinOp::Div => {
                    if b.contains_zero() {
                        Interval::ALL
                    } else {
                        let r = Interval {
                            lo: 1.0 / b.hi,
                            hi: 1.0 / b.lo,
                        };
                        Interval::hull([a.lo * r.lo, a.lo * r.hi, a.hi * r.lo, a.hi * r.hi])
                    }
                }
                BinOp::Min => Interval {
                    lo: a.lo.min(b.lo),
                    hi: a.hi.min(b.hi),
                },
                BinOp::Max => Interval {
                    lo: a.lo.max(b.lo),
                    hi: a.hi.max(b.hi),
                },
            }
        }
    }
    .sanitize()
}

impl Interval {
    fn sanitize(self) -> Interval {
        if self.lo.is_nan() || self.hi.is_nan() {
            Interval::ALL
        } else {
            self
        }
    }
}

/// Assumed ranges: non-negative variables stay in `[0, inf)`, the clock
/// likewise, anything starting negative is unbounded. Guard conjuncts of
/// the form `X > c`, `X >= c` (or mirrored) tighten the lower bound.
fn variable_ranges(p: &Program, guard: &Guard) -> Vec<Interval> {
    let mut env: Vec<Interval> = p
        .variables
        .iter()
        .map(|v| {
            if v.init >= 0.0 || v.kind == VarKind::Time {
                Interval {
                    lo: 0.0,
                    hi: f64::INFINITY,
                }
            } else {
                Interval::ALL
            }
        })
        .collect();
    for c in guard.conjuncts() {
        let Guard::Cmp(op, a, b) = c else { continue };
        let (op, v, bound) = match (a, b) {
            (Expr::Var(v), e) if e.vars().is_empty() => (*op, *v, e.const_value()),
            (e, Expr::Var(v)) if e.vars().is_empty() => (op.flip(), *v, e.const_value()),
            _ => continue,
        };
        let Some(c) = bound else { continue };
        let integer = p.variables[v.index()].integer;
        let lo = match op {
            CmpOp::Gt if integer => c.floor() + 1.0,
            CmpOp::Gt => c.next_up(),
            CmpOp::Ge | CmpOp::Eq => c,
            _ => continue,
        };
        let iv = &mut env[v.index()];
        iv.lo = iv.lo.max(lo);
        if op == CmpOp::Eq {
            iv.hi = iv.hi.min(c);
        }
    }
    env
}

fn division_warnings(
    p: &Program,
    guard: &Guard,
    rate: &Rate,
    resets: &[crate::ir::ResetAtom],
    span: Option<super::Span>,
    out: &mut Vec<Diagnostic>,
) {
    let env = variable_ranges(p, guard);
    let names = p.namer();
    let mut visit = |e: &Expr| {
        let mut stack = vec![e];
        while let Some(e) = stack.pop() {
            if let Expr::Bin(op, a, b) = e {
                if *op == BinOp::Div && eval_interval(b, &env).contains_zero() {
                    out.push(Diagnostic::warning(
                        codes::DIVISION,
                        span,
                        format!("possible division by zero in `{}`", e.display_with(&names)),
                    ));
                }
                stack.push(a);
                stack.push(b);
            }
        }
    };
    for (_, a, b) in guard.atoms() {
        visit(a);
        visit(b);
    }
    if let Rate::Finite(e) = rate {
        visit(e);
    }
    for r in resets {
        match &r.law {
            ResetLaw::Increment(_) => {}
            ResetLaw::Assign(e) => visit(e),
            ResetLaw::Random(d) => match d {
                Distribution::Uniform(a, b) | Distribution::Normal(a, b) => {
                    visit(a);
                    visit(b);
                }
                Distribution::Exponential(a) => visit(a),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::dsl::{parse_program, parse_program_with};

    fn codes_of(src: &str) -> Vec<&'static str> {
        parse_program_with(src, &[])
            .diagnostics
            .iter()
            .map(|d| d.code)
            .collect()
    }

    #[test]
    fn finite_rate_assignment_rejected() {
        let src = "vars { X = 1; }\na :- [X > 0 -> X' = 2*X]{1}.a;\nnetwork a;";
        let errs = parse_program(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(
            errs[0].message,
            "finite-rate reset must be increment-by-constant"
        );
        assert_eq!(errs[0].span.unwrap().line, 2);
    }

    #[test]
    fn clock_restricted_to_instantaneous_actions() {
        let src = "vars { X = 1; }\na :- [Time >= 3 -> X' = X + 1]{1}.a; network a;";
        assert_eq!(codes_of(src), vec!["E003"]);
    }

    #[test]
    fn clock_cannot_be_reset() {
        let src = "a :- [true -> Time' = 0]{inf}.a; network a;";
        assert!(codes_of(src).contains(&"E005"));
    }

    #[test]
    fn clock_atom_shapes() {
        let ok = "vars { W = 1; }\na :- [W = Time and W > 0 -> W' = W + 1]{inf}.a; network a;";
        assert!(codes_of(ok).is_empty());
        let strict = "a :- [Time > 3 -> ]{inf}.a; network a;";
        assert_eq!(codes_of(strict), vec!["E012"]);
        let nested = "vars { W = 1; }\na :- [W > 1 or Time = 3 -> ]{inf}.a; network a;";
        assert_eq!(codes_of(nested), vec!["E012"]);
    }

    #[test]
    fn undefined_continuation_and_network() {
        let src = "a :- [true -> ]{1}.b; network a || c;";
        assert_eq!(codes_of(src), vec!["E006", "E006"]);
    }

    #[test]
    fn duplicate_reset_target() {
        let src = "vars { X = 1; }\na :- [true -> X' = X + 1, X' = X - 1]{1}.a; network a;";
        assert_eq!(codes_of(src), vec!["E007"]);
    }

    #[test]
    fn division_warning_respects_guard_bounds() {
        let guarded = "vars { int X = 5; Y = 1; }\na :- [X > 0 -> Y' = Y + 1]{Y / X}.a; network a;";
        assert!(codes_of(guarded).is_empty());
        let unguarded =
            "vars { int X = 5; Y = 1; }\na :- [true -> Y' = Y + 1]{Y / X}.a; network a;";
        assert_eq!(codes_of(unguarded), vec!["W001"]);
        let offset = "vars { Z = 5; }\na :- [true -> Z' = Z + 1]{Z / (Z + 2)}.a; network a;";
        assert!(codes_of(offset).is_empty());
    }

    #[test]
    fn unknown_identifier_has_span() {
        let errs = parse_program("a :- [Q > 0 -> ]{1}.a; network a;").unwrap_err();
        assert_eq!(errs[0].code, "E002");
        assert_eq!(errs[0].span.unwrap().col_start, 7);
    }

    #[test]
    fn missing_network() {
        assert_eq!(codes_of("a :- [true -> ]{1}.a;"), vec!["E011"]);
    }

    #[test]
    fn null_agent_in_network() {
        assert_eq!(
            codes_of("a :- [true -> ]{1}.a; network a || 0;"),
            vec!["E011"]
        );
    }
}

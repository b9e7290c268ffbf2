//! Quantifier-free guards over the store.

use std::fmt;

use super::expr::{EvalError, Expr};
use super::store::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    #[inline]
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    True,
    Cmp(CmpOp, Expr, Expr),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
    Not(Box<Guard>),
}

impl Guard {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Guard {
        Guard::Cmp(op, a, b)
    }

    /// Conjunction that drops a literal `true` on either side.
    pub fn and(a: Guard, b: Guard) -> Guard {
        match (a, b) {
            (Guard::True, g) | (g, Guard::True) => g,
            (a, b) => Guard::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Guard, b: Guard) -> Guard {
        Guard::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Guard) -> Guard {
        Guard::Not(Box::new(a))
    }

    pub fn eval(&self, values: &[f64]) -> Result<bool, EvalError> {
        Ok(match self {
            Guard::True => true,
            Guard::Cmp(op, a, b) => op.holds(a.eval(values)?, b.eval(values)?),
            Guard::And(a, b) => a.eval(values)? && b.eval(values)?,
            Guard::Or(a, b) => a.eval(values)? || b.eval(values)?,
            Guard::Not(a) => !a.eval(values)?,
        })
    }

    #[inline]
    pub fn eval_unchecked(&self, values: &[f64]) -> bool {
        match self {
            Guard::True => true,
            Guard::Cmp(op, a, b) => op.holds(a.eval_unchecked(values), b.eval_unchecked(values)),
            Guard::And(a, b) => a.eval_unchecked(values) && b.eval_unchecked(values),
            Guard::Or(a, b) => a.eval_unchecked(values) || b.eval_unchecked(values),
            Guard::Not(a) => !a.eval_unchecked(values),
        }
    }

    pub fn visit_vars(&self, f: &mut dyn FnMut(VarId)) {
        match self {
            Guard::True => {}
            Guard::Cmp(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Guard::And(a, b) | Guard::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Guard::Not(a) => a.visit_vars(f),
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| {
            if !out.contains(&v) {
                out.push(v)
            }
        });
        out
    }

    pub fn references(&self, id: VarId) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == id);
        found
    }

    pub fn remap(&self, map: &dyn Fn(VarId) -> VarId) -> Guard {
        match self {
            Guard::True => Guard::True,
            Guard::Cmp(op, a, b) => Guard::Cmp(*op, a.remap(map), b.remap(map)),
            Guard::And(a, b) => Guard::And(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Guard::Or(a, b) => Guard::Or(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Guard::Not(a) => Guard::Not(Box::new(a.remap(map))),
        }
    }

    /// Top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<&Guard> {
        match self {
            Guard::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            g => vec![g],
        }
    }

    /// Every comparison atom in the guard, in left-to-right order.
    pub fn atoms(&self) -> Vec<(CmpOp, &Expr, &Expr)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(CmpOp, &'a Expr, &'a Expr)>) {
        match self {
            Guard::True => {}
            Guard::Cmp(op, a, b) => out.push((*op, a, b)),
            Guard::And(a, b) | Guard::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Guard::Not(a) => a.collect_atoms(out),
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(VarId) -> String) -> GuardDisplay<'a> {
        GuardDisplay { guard: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            Guard::Or(..) => 1,
            Guard::And(..) => 2,
            _ => 3,
        }
    }
}

pub struct GuardDisplay<'a> {
    guard: &'a Guard,
    names: &'a dyn Fn(VarId) -> String,
}

impl GuardDisplay<'_> {
    fn write(&self, g: &Guard, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match g {
            Guard::True => f.write_str("true"),
            Guard::Cmp(op, a, b) => write!(
                f,
                "{} {} {}",
                a.display_with(self.names),
                op.symbol(),
                b.display_with(self.names)
            ),
            Guard::And(a, b) | Guard::Or(a, b) => {
                let p = g.precedence();
                let word = if matches!(g, Guard::And(..)) {
                    "and"
                } else {
                    "or"
                };
                self.child(a, a.precedence() < p, f)?;
                write!(f, " {word} ")?;
                self.child(b, b.precedence() <= p, f)
            }
            Guard::Not(a) => {
                f.write_str("not ")?;
                self.child(a, a.precedence() < 3, f)
            }
        }
    }

    fn child(&self, g: &Guard, paren: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if paren {
            f.write_str("(")?;
            self.write(g, f)?;
            f.write_str(")")
        } else {
            self.write(g, f)
        }
    }
}

impl fmt::Display for GuardDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.guard, f)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |v: VarId| format!("${}", v.index());
        fmt::Display::fmt(&self.display_with(&names), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Expr {
        Expr::var(VarId(i))
    }

    #[test]
    fn strict_positivity_at_zero() {
        let g = Guard::cmp(CmpOp::Gt, v(0), Expr::constant(0.0));
        assert!(!g.eval(&[0.0]).unwrap());
    }

    #[test]
    fn check_psa_on_guard() {
        // Time = W and V < v_on, with Time=$0, W=$1, V=$2
        let g = Guard::and(
            Guard::cmp(CmpOp::Eq, v(0), v(1)),
            Guard::cmp(CmpOp::Lt, v(2), Expr::constant(4e5)),
        );
        assert!(g.eval(&[28.0, 28.0, 3.9e5]).unwrap());
        assert!(!g.eval(&[28.5, 28.0, 3.9e5]).unwrap());
    }

    #[test]
    fn literal_true() {
        assert!(Guard::True.eval(&[]).unwrap());
        assert!(Guard::True.eval(&[1.0, -3.0]).unwrap());
    }

    #[test]
    fn and_absorbs_true() {
        let g = Guard::cmp(CmpOp::Gt, v(0), Expr::constant(0.0));
        assert_eq!(Guard::and(Guard::True, g.clone()), g);
    }

    #[test]
    fn display_parenthesises_by_precedence() {
        let a = Guard::cmp(CmpOp::Gt, v(0), Expr::constant(0.0));
        let b = Guard::cmp(CmpOp::Le, v(1), Expr::constant(1.0));
        let g = Guard::And(
            Box::new(Guard::or(a.clone(), b.clone())),
            Box::new(Guard::not(a)),
        );
        assert_eq!(g.to_string(), "($0 > 0.0 or $1 <= 1.0) and not $0 > 0.0");
    }
}

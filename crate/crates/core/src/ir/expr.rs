//! Arithmetic expressions over the variable store.

use std::fmt;

use super::store::VarId;

/// Binary arithmetic operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Min => "min",
            BinOp::Max => "max",
        }
    }

    pub(crate) fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Min => a.min(b),
            BinOp::Max => a.max(b),
        }
    }
}

/// Expression tree: constants, variable references and the six binary
/// operators. Unary minus is represented as `0 - e`, or folded into the
/// constant when applied to a literal.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(VarId),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

/// Raised when a division node meets a zero denominator.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("division by zero in `{node}`")]
pub struct EvalError {
    /// Rendering of the offending division node, with variable indices.
    pub node: String,
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(id: VarId) -> Expr {
        Expr::Var(id)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Sub, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Mul, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Div, a, b)
    }

    /// Evaluates under IEEE-754 double semantics. Fails only on an exact zero
    /// denominator.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => Ok(values[v.index()]),
            Expr::Bin(op, a, b) => {
                let x = a.eval(values)?;
                let y = b.eval(values)?;
                if *op == BinOp::Div && y == 0.0 {
                    return Err(EvalError {
                        node: self.to_string(),
                    });
                }
                Ok(op.apply(x, y))
            }
        }
    }

    /// Evaluation that lets a zero denominator produce `inf`/`NaN` instead of
    /// an error. Used in inner simulation loops after validation.
    #[inline]
    pub fn eval_unchecked(&self, values: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => values[v.index()],
            Expr::Bin(op, a, b) => op.apply(a.eval_unchecked(values), b.eval_unchecked(values)),
        }
    }

    /// Calls `f` on every variable referenced by the expression.
    pub fn visit_vars(&self, f: &mut dyn FnMut(VarId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Bin(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
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

    /// Rewrites variable indices.
    pub fn remap(&self, map: &dyn Fn(VarId) -> VarId) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => Expr::Var(map(*v)),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.remap(map), b.remap(map)),
        }
    }

    /// `Some(c)` when the expression contains no variable.
    pub fn const_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) => None,
            Expr::Bin(op, a, b) => Some(op.apply(a.const_value()?, b.const_value()?)),
        }
    }

    /// Renders with a caller-supplied variable naming.
    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(VarId) -> String) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            _ => 3,
        }
    }
}

/// Formats a constant so that it re-lexes to the identical `f64`.
pub fn format_number(v: f64) -> String {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        format!("(-{:?})", -v)
    } else {
        format!("{v:?}")
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a dyn Fn(VarId) -> String,
}

impl ExprDisplay<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            Expr::Const(c) => f.write_str(&format_number(*c)),
            Expr::Var(v) => f.write_str(&(self.names)(*v)),
            Expr::Bin(op @ (BinOp::Min | BinOp::Max), a, b) => {
                write!(f, "{}(", op.symbol())?;
                self.write(a, f)?;
                f.write_str(", ")?;
                self.write(b, f)?;
                f.write_str(")")
            }
            Expr::Bin(op, a, b) => {
                let p = e.precedence();
                // left-associative: the left child needs parentheses only when
                // it binds looser, the right child also when it binds equally
                let lp = a.precedence() < p;
                let rp = b.precedence() <= p;
                if lp {
                    f.write_str("(")?;
                }
                self.write(a, f)?;
                if lp {
                    f.write_str(")")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rp {
                    f.write_str("(")?;
                }
                self.write(b, f)?;
                if rp {
                    f.write_str(")")
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |v: VarId| format!("${}", v.index());
        fmt::Display::fmt(&self.display_with(&names), f)
    }
}

//! Surface syntax tree, before name resolution.

use super::diagnostic::Span;
use crate::ir::{BinOp, CmpOp};

#[derive(Clone, Debug)]
pub enum RawExpr {
    Num(f64, Span),
    Ident(String, Span),
    Neg(Box<RawExpr>, Span),
    Bin(BinOp, Box<RawExpr>, Box<RawExpr>, Span),
}

impl RawExpr {
    pub fn span(&self) -> Span {
        match self {
            RawExpr::Num(_, s) | RawExpr::Ident(_, s) | RawExpr::Neg(_, s) => *s,
            RawExpr::Bin(_, _, _, s) => *s,
        }
    }
}

#[derive(Clone, Debug)]
pub enum RawGuard {
    True,
    Cmp(CmpOp, RawExpr, RawExpr),
    And(Box<RawGuard>, Box<RawGuard>),
    Or(Box<RawGuard>, Box<RawGuard>),
    Not(Box<RawGuard>),
}

#[derive(Clone, Debug)]
pub enum RawRhs {
    Expr(RawExpr),
    Dist { name: String, args: Vec<RawExpr> },
}

#[derive(Clone, Debug)]
pub struct RawReset {
    pub target: String,
    pub target_span: Span,
    pub rhs: RawRhs,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum RawRate {
    Inf,
    Expr(RawExpr),
}

#[derive(Clone, Debug)]
pub struct RawBranch {
    pub guard: RawGuard,
    pub resets: Vec<RawReset>,
    pub rate: RawRate,
    /// `None` for the null agent.
    pub cont: Option<String>,
    pub cont_span: Span,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct RawDef {
    pub name: String,
    pub span: Span,
    pub branches: Vec<RawBranch>,
}

#[derive(Clone, Debug)]
pub struct RawParam {
    pub name: String,
    pub span: Span,
    pub value: RawExpr,
}

#[derive(Clone, Debug)]
pub struct RawVar {
    pub name: String,
    pub span: Span,
    pub integer: bool,
    pub init: RawExpr,
}

#[derive(Clone, Debug)]
pub struct RawNetworkEntry {
    /// `None` when the null agent was written.
    pub agent: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct RawProgram {
    pub params: Vec<RawParam>,
    pub vars: Vec<RawVar>,
    pub defs: Vec<RawDef>,
    pub network: Option<(Vec<RawNetworkEntry>, Span)>,
}

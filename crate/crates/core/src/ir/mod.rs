//! Intermediate representation of models: expressions, guards, resets,
//! actions, agents and the variable store. All values are immutable once
//! built and can be shared freely between simulation workers.

mod action;
mod expr;
mod guard;
mod program;
mod store;

pub use action::{
    apply_reset, apply_reset_in_place, Action, AgentDef, Branch, Continuation, Distribution, Rate,
    ResetAtom, ResetError, ResetLaw,
};
pub use expr::{format_number, BinOp, EvalError, Expr};
pub use guard::{CmpOp, Guard};
pub use program::{NetworkEntry, Program};
pub use store::{Store, VarDecl, VarId, VarKind, TIME};

/// Evaluates an expression at a store.
pub fn eval_expr(e: &Expr, s: &Store) -> Result<f64, EvalError> {
    e.eval(&s.values)
}

/// Evaluates a guard at a store.
pub fn eval_guard(g: &Guard, s: &Store) -> Result<bool, EvalError> {
    g.eval(&s.values)
}

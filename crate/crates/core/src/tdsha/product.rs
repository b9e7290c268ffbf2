//! Asynchronous product, the clock automaton and whole-program compilation.

use super::compile::{compile_component, CompileError};
use super::kappa::PartitionVector;
use super::model::*;
use crate::ir::{Expr, Guard, VarDecl, VarId, VarKind};
use crate::rts::Extended;

fn flows_clock(t: &Tdsha, v: VarId) -> bool {
    t.variables[v.index()].kind == VarKind::Time
        && t.continuous
            .iter()
            .any(|c| c.stoich.iter().any(|&(x, k)| x == v && k != 0.0))
}

/// Asynchronous product: modes `Q1 x Q2` (mode `(i, j)` has index
/// `i * |Q2| + j`), variables merged by name, every transition lifted with
/// the other coordinate unchanged.
pub fn product(t1: &Tdsha, t2: &Tdsha) -> Result<Tdsha, CompileError> {
    let mut variables: Vec<VarDecl> = t1.variables.clone();
    let mut map = Vec::with_capacity(t2.variables.len());
    for (j, v) in t2.variables.iter().enumerate() {
        match t1.variables.iter().position(|u| u.name == v.name) {
            Some(i) => {
                let u = &t1.variables[i];
                if u.init != v.init || u.integer != v.integer || u.kind != v.kind {
                    return Err(CompileError::InitConflict(v.name.clone()));
                }
                if flows_clock(t1, VarId(i)) && flows_clock(t2, VarId(j)) {
                    return Err(CompileError::DuplicateClock(v.name.clone()));
                }
                map.push(VarId(i));
            }
            None => {
                map.push(VarId(variables.len()));
                variables.push(v.clone());
            }
        }
    }
    let remap = |v: VarId| map[v.index()];
    let (n1, n2) = (t1.modes.len(), t2.modes.len());
    let mut modes = Vec::with_capacity(n1 * n2);
    for a in &t1.modes {
        for b in &t2.modes {
            let mut parts = a.parts.clone();
            parts.extend(b.parts.iter().cloned());
            modes.push(Mode { parts });
        }
    }
    let left = |i: usize, j: usize| i * n2 + j;

    let mut out = Tdsha {
        modes,
        variables,
        continuous: Vec::new(),
        instantaneous: Vec::new(),
        stochastic: Vec::new(),
        init_mode: left(t1.init_mode, t2.init_mode),
    };
    for c in &t1.continuous {
        for j in 0..n2 {
            out.continuous.push(ContinuousTransition {
                mode: left(c.mode, j),
                ..c.clone()
            });
        }
    }
    for c in &t2.continuous {
        let c = ContinuousTransition {
            stoich: c.stoich.iter().map(|&(v, k)| (remap(v), k)).collect(),
            rate: c.rate.remap(&remap),
            guard: c.guard.remap(&remap),
            ..c.clone()
        };
        for i in 0..n1 {
            out.continuous.push(ContinuousTransition {
                mode: left(i, c.mode),
                ..c.clone()
            });
        }
    }
    for s in &t1.stochastic {
        for j in 0..n2 {
            out.stochastic.push(StochasticTransition {
                from: left(s.from, j),
                to: left(s.to, j),
                ..s.clone()
            });
        }
    }
    for s in &t2.stochastic {
        let s = StochasticTransition {
            guard: s.guard.remap(&remap),
            reset: s.reset.iter().map(|r| r.remap(&remap)).collect(),
            rate: s.rate.remap(&remap),
            ..s.clone()
        };
        for i in 0..n1 {
            out.stochastic.push(StochasticTransition {
                from: left(i, s.from),
                to: left(i, s.to),
                ..s.clone()
            });
        }
    }
    for s in &t1.instantaneous {
        for j in 0..n2 {
            out.instantaneous.push(InstantaneousTransition {
                from: left(s.from, j),
                to: left(s.to, j),
                ..s.clone()
            });
        }
    }
    for s in &t2.instantaneous {
        let s = InstantaneousTransition {
            guard: s.guard.remap(&remap),
            reset: s.reset.iter().map(|r| r.remap(&remap)).collect(),
            weight: s.weight.remap(&remap),
            ..s.clone()
        };
        for i in 0..n1 {
            out.instantaneous.push(InstantaneousTransition {
                from: left(i, s.from),
                to: left(i, s.to),
                ..s.clone()
            });
        }
    }
    Ok(out)
}

/// One mode, variable `Time` starting at 0 and a single flow of rate 1.
pub fn time_monitor() -> Tdsha {
    Tdsha {
        modes: vec![Mode::new("clock")],
        variables: vec![VarDecl::time()],
        continuous: vec![ContinuousTransition {
            mode: 0,
            stoich: vec![(VarId(0), 1.0)],
            rate: Expr::Const(1.0),
            guard: Guard::True,
            label: "clock".to_string(),
        }],
        instantaneous: Vec::new(),
        stochastic: Vec::new(),
        init_mode: 0,
    }
}

/// Product of all compiled components, in network order.
pub fn compile_program(ext: &Extended, pv: &PartitionVector) -> Result<Tdsha, CompileError> {
    let mut acc: Option<Tdsha> = None;
    for c in 0..ext.components.len() {
        let t = compile_component(ext, c, &pv.continuous[c])?;
        acc = Some(match acc {
            None => t,
            Some(a) => product(&a, &t)?,
        });
    }
    Ok(acc.unwrap_or_else(|| Tdsha {
        modes: vec![Mode::new("empty")],
        variables: ext.variables.clone(),
        continuous: Vec::new(),
        instantaneous: Vec::new(),
        stochastic: Vec::new(),
        init_mode: 0,
    }))
}

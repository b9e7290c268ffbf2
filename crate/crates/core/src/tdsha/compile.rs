//! Compilation of one component's RTS into a TDSHA under a partition.

use std::collections::BTreeMap;

use super::kappa::forced_discrete;
use super::model::*;
use crate::ir::{CmpOp, Expr, Guard, Rate, ResetAtom, ResetLaw, VarId};
use crate::rts::Extended;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("edge `{0}` is marked continuous but must stay discrete")]
    ForcedDiscrete(String),
    #[error("partition has {got} entries for component `{component}`, expected {expected}")]
    PartitionShape {
        component: String,
        got: usize,
        expected: usize,
    },
    #[error("variable `{0}` has different initial values in the two factors")]
    InitConflict(String),
    #[error("variable `{0}` is advanced by a clock flow in both factors")]
    DuplicateClock(String),
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Compiles component `c` of an extended program.
///
/// States joined by continuous edges collapse into one mode named after
/// its lexicographically smallest member. Inside a multi-state mode the
/// indicators `P` carry the (possibly fractional) occupation of each state,
/// so flows and rates leaving a state are weighted by its indicator.
pub fn compile_component(
    ext: &Extended,
    c: usize,
    continuous: &[bool],
) -> Result<Tdsha, CompileError> {
    let rts = &ext.components[c];
    let ind = &ext.indicators[c];
    if continuous.len() != rts.edges.len() {
        return Err(CompileError::PartitionShape {
            component: rts.label.clone(),
            got: continuous.len(),
            expected: rts.edges.len(),
        });
    }
    let mut uf = UnionFind((0..rts.states.len()).collect());
    for (e, &k) in rts.edges.iter().zip(continuous) {
        if k {
            if forced_discrete(e) {
                return Err(CompileError::ForcedDiscrete(e.label()));
            }
            uf.union(e.src, e.tgt);
        }
    }
    // classes numbered by their smallest member state (the initial state's
    // class comes first)
    let mut class_of = vec![0; rts.states.len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut root_class = BTreeMap::new();
    for s in 0..rts.states.len() {
        let r = uf.find(s);
        let k = *root_class.entry(r).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        class_of[s] = k;
        members[k].push(s);
    }
    let modes: Vec<Mode> = members
        .iter()
        .map(|m| {
            let name = m
                .iter()
                .map(|&s| rts.states[s].as_str())
                .min()
                .unwrap_or("");
            Mode::new(name)
        })
        .collect();
    let multi = |s: usize| members[class_of[s]].len() > 1;
    let duplicated = rts.label.contains('#');
    let label = |e: &crate::rts::RtsEdge| {
        if duplicated {
            format!("{}:{}", rts.label, e.label())
        } else {
            e.label()
        }
    };
    let weighted = |e: Expr, s: usize| {
        if multi(s) {
            Expr::mul(e, Expr::Var(ind[s]))
        } else {
            e
        }
    };
    // statevar_res: leave every state of the exit class, enter the target
    let state_reset = |src: usize, tgt: usize| -> Vec<ResetAtom> {
        if class_of[src] == class_of[tgt] && !multi(src) {
            return Vec::new();
        }
        let mut r: Vec<ResetAtom> = members[class_of[src]]
            .iter()
            .filter(|&&m| m != tgt)
            .map(|&m| ResetAtom::assign(ind[m], Expr::Const(0.0)))
            .collect();
        r.push(ResetAtom::assign(ind[tgt], Expr::Const(1.0)));
        r
    };

    let mut t = Tdsha {
        modes,
        variables: ext.variables.clone(),
        continuous: Vec::new(),
        instantaneous: Vec::new(),
        stochastic: Vec::new(),
        init_mode: class_of[0],
    };
    for (e, &k) in rts.edges.iter().zip(continuous) {
        let a = &e.action;
        match (&a.rate, k) {
            (Rate::Finite(rate), true) => {
                let mut stoich: Vec<(VarId, f64)> = a
                    .reset
                    .iter()
                    .map(|r| match r.law {
                        ResetLaw::Increment(d) => (r.target, d),
                        _ => unreachable!("non-increment resets are forced discrete"),
                    })
                    .collect();
                if e.src != e.tgt {
                    stoich.push((ind[e.src], -1.0));
                    stoich.push((ind[e.tgt], 1.0));
                }
                t.continuous.push(ContinuousTransition {
                    mode: class_of[e.src],
                    stoich,
                    rate: weighted(rate.clone(), e.src),
                    guard: a.guard.clone(),
                    label: label(e),
                });
            }
            (Rate::Finite(rate), false) => {
                let mut reset = a.reset.clone();
                reset.extend(state_reset(e.src, e.tgt));
                t.stochastic.push(StochasticTransition {
                    from: class_of[e.src],
                    to: class_of[e.tgt],
                    guard: a.guard.clone(),
                    reset,
                    rate: weighted(rate.clone(), e.src),
                    label: label(e),
                });
            }
            (Rate::Infinite, _) => {
                let mut guard = a.guard.clone();
                if multi(e.src) {
                    guard = Guard::and(
                        guard,
                        Guard::cmp(CmpOp::Gt, Expr::Var(ind[e.src]), Expr::Const(0.0)),
                    );
                }
                let mut reset = a.reset.clone();
                reset.extend(state_reset(e.src, e.tgt));
                t.instantaneous.push(InstantaneousTransition {
                    from: class_of[e.src],
                    to: class_of[e.tgt],
                    guard,
                    reset,
                    weight: Expr::Const(1.0),
                    label: label(e),
                });
            }
        }
    }
    Ok(t)
}

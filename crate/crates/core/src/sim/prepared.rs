use std::collections::HashSet;

use crate::dsl::time_atom;
use crate::ir::{CmpOp, Expr, Guard, ResetAtom, ResetLaw, VarKind};
use crate::tdsha::{ContinuousTransition, ModeIndex, Tdsha};

/// Read-only tables derived from an automaton once and shared by every run.
#[derive(Debug)]
pub(crate) struct Prepared<'a> {
    pub t: &'a Tdsha,
    pub index: Vec<ModeIndex>,
    pub time: Option<usize>,
    /// Per stochastic transition: same-mode stochastic transitions whose
    /// rate or guard reads a variable it writes.
    pub st_rate_deps: Vec<Vec<usize>>,
    /// Per stochastic transition: instantaneous transitions of its target
    /// mode whose guard reads a variable it writes.
    pub st_inst_deps: Vec<Vec<usize>>,
    /// Per stochastic transition: instantaneous transitions of its target
    /// mode whose clock bound reads a variable it writes.
    pub st_queue_deps: Vec<Vec<usize>>,
    /// Per stochastic transition: integer targets whose new value may be
    /// fractional.
    pub st_int_checks: Vec<Vec<usize>>,
    pub inst_int_checks: Vec<Vec<usize>>,
    /// Right-hand sides of `Time = E` and `Time >= E` atoms.
    pub inst_clock_bounds: Vec<Vec<Expr>>,
    /// Instantaneous transitions whose guard contains `Time = E`; these can
    /// only become enabled at a scheduled instant.
    pub inst_point_only: Vec<bool>,
    /// Per mode: flows other than the clock's.
    pub mode_flows: Vec<Vec<&'a ContinuousTransition>>,
    /// Per mode: whether no flow changes anything a stochastic rate or
    /// guard of the mode reads (the total rate is then piecewise constant).
    pub mode_const_hazard: Vec<bool>,
    /// Variables that flow in some mode.
    pub flowing: Vec<bool>,
}

fn guard_vars(g: &Guard) -> HashSet<usize> {
    g.vars().into_iter().map(|v| v.index()).collect()
}

fn expr_vars(e: &Expr) -> HashSet<usize> {
    e.vars().into_iter().map(|v| v.index()).collect()
}

fn int_checks(t: &Tdsha, reset: &[ResetAtom]) -> Vec<usize> {
    reset
        .iter()
        .filter(|a| t.variables[a.target.index()].integer)
        .filter(|a| match a.law {
            ResetLaw::Increment(k) => k.fract() != 0.0,
            _ => true,
        })
        .map(|a| a.target.index())
        .collect()
}

impl<'a> Prepared<'a> {
    pub fn new(t: &'a Tdsha) -> Self {
        let index = t.index();
        let time = t.variables.iter().position(|v| v.kind == VarKind::Time);

        let st_reads: Vec<HashSet<usize>> = t
            .stochastic
            .iter()
            .map(|s| {
                let mut r = guard_vars(&s.guard);
                r.extend(expr_vars(&s.rate));
                r
            })
            .collect();
        let inst_reads: Vec<HashSet<usize>> = t
            .instantaneous
            .iter()
            .map(|i| guard_vars(&i.guard))
            .collect();

        let mut inst_clock_bounds = Vec::with_capacity(t.instantaneous.len());
        let mut inst_point_only = Vec::with_capacity(t.instantaneous.len());
        for i in &t.instantaneous {
            let mut bounds = Vec::new();
            let mut point = false;
            if let Some(tv) = time {
                for c in i.guard.conjuncts() {
                    if let Guard::Cmp(op, a, b) = c {
                        if let Some((op, e)) = time_atom(*op, a, b, crate::ir::VarId(tv)) {
                            match op {
                                CmpOp::Eq => {
                                    point = true;
                                    bounds.push(e.clone());
                                }
                                CmpOp::Ge => bounds.push(e.clone()),
                                _ => {}
                            }
                        }
                    }
                }
            }
            inst_clock_bounds.push(bounds);
            inst_point_only.push(point);
        }
        let bound_reads: Vec<HashSet<usize>> = inst_clock_bounds
            .iter()
            .map(|b| b.iter().flat_map(expr_vars).collect())
            .collect();

        let mut st_rate_deps = Vec::new();
        let mut st_inst_deps = Vec::new();
        let mut st_queue_deps = Vec::new();
        let mut st_int_checks = Vec::new();
        for s in &t.stochastic {
            let writes: HashSet<usize> = s.reset.iter().map(|a| a.target.index()).collect();
            let hits = |r: &HashSet<usize>| !r.is_disjoint(&writes);
            st_rate_deps.push(
                index[s.to]
                    .stochastic
                    .iter()
                    .copied()
                    .filter(|&k| hits(&st_reads[k]))
                    .collect(),
            );
            st_inst_deps.push(
                index[s.to]
                    .instantaneous
                    .iter()
                    .copied()
                    .filter(|&k| hits(&inst_reads[k]))
                    .collect(),
            );
            st_queue_deps.push(
                index[s.to]
                    .instantaneous
                    .iter()
                    .copied()
                    .filter(|&k| hits(&bound_reads[k]))
                    .collect(),
            );
            st_int_checks.push(int_checks(t, &s.reset));
        }
        let inst_int_checks = t
            .instantaneous
            .iter()
            .map(|i| int_checks(t, &i.reset))
            .collect();

        let mut mode_flows = vec![Vec::new(); t.modes.len()];
        let mut flowing = vec![false; t.variables.len()];
        for c in &t.continuous {
            let clock_only = c.stoich.iter().all(|&(v, _)| Some(v.index()) == time);
            if clock_only {
                continue;
            }
            mode_flows[c.mode].push(c);
            for &(v, k) in &c.stoich {
                if k != 0.0 {
                    flowing[v.index()] = true;
                }
            }
        }
        let mode_const_hazard = (0..t.modes.len())
            .map(|q| {
                let moved: HashSet<usize> = mode_flows[q]
                    .iter()
                    .flat_map(|c| c.stoich.iter().map(|&(v, _)| v.index()))
                    .collect();
                index[q]
                    .stochastic
                    .iter()
                    .all(|&k| st_reads[k].is_disjoint(&moved))
            })
            .collect();

        Prepared {
            t,
            index,
            time,
            st_rate_deps,
            st_inst_deps,
            st_queue_deps,
            st_int_checks,
            inst_int_checks,
            inst_clock_bounds,
            inst_point_only,
            mode_flows,
            mode_const_hazard,
            flowing,
        }
    }
}

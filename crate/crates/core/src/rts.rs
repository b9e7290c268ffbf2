//! Reachable transition systems of sequential agents and the state
//! indicator extension used to make control state explicit.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dsl::action_text;
use crate::ir::{
    Action, CmpOp, Continuation, Expr, Guard, Program, ResetAtom, VarDecl, VarId, VarKind,
};

/// Name of the sink state reached through the null agent.
pub const SINK: &str = "0";

#[derive(Clone, Debug, PartialEq)]
pub struct RtsEdge {
    pub src: usize,
    pub tgt: usize,
    pub action: Action,
    /// Definition the branch belongs to and its position in that definition.
    pub agent: String,
    pub branch: usize,
}

impl RtsEdge {
    /// `agent.branch`, the name used by partition specifications and logs.
    pub fn label(&self) -> String {
        format!("{}.{}", self.agent, self.branch)
    }
}

/// Transition system of one network component. State 0 is the initial one.
#[derive(Clone, Debug, PartialEq)]
pub struct Rts {
    pub label: String,
    pub states: Vec<String>,
    pub edges: Vec<RtsEdge>,
}

impl Rts {
    pub fn indicator_name(&self, state: usize) -> String {
        format!("P[{}:{}]", self.label, self.states[state])
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RtsError {
    #[error("undefined agent `{0}`")]
    UndefinedAgent(String),
}

/// One transition system per network entry. Components instantiating the
/// same definition more than once are labelled `name#k`.
pub fn build_rts(p: &Program) -> Result<Vec<Rts>, RtsError> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in &p.network {
        *counts.entry(e.agent.as_str()).or_default() += 1;
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut out = Vec::with_capacity(p.network.len());
    for e in &p.network {
        let k = seen.entry(e.agent.as_str()).or_default();
        *k += 1;
        let label = if counts[e.agent.as_str()] > 1 {
            format!("{}#{}", e.agent, k)
        } else {
            e.agent.clone()
        };
        out.push(component(p, &e.agent, label)?);
    }
    Ok(out)
}

fn component(p: &Program, init: &str, label: String) -> Result<Rts, RtsError> {
    let mut states = vec![init.to_string()];
    let mut index: HashMap<String, usize> = HashMap::from([(init.to_string(), 0)]);
    let mut edges = Vec::new();
    let mut has_sink = false;
    let mut i = 0;
    // breadth-first in discovery order; the sink is numbered last
    while i < states.len() {
        let name = states[i].clone();
        let def = p
            .definition(&name)
            .ok_or_else(|| RtsError::UndefinedAgent(name.clone()))?;
        for (bi, b) in def.branches.iter().enumerate() {
            let tgt = match &b.continuation {
                Continuation::Null => {
                    has_sink = true;
                    usize::MAX
                }
                Continuation::Agent(a) => match index.get(a) {
                    Some(&t) => t,
                    None => {
                        states.push(a.clone());
                        index.insert(a.clone(), states.len() - 1);
                        states.len() - 1
                    }
                },
            };
            edges.push(RtsEdge {
                src: i,
                tgt,
                action: b.action.clone(),
                agent: name.clone(),
                branch: bi,
            });
        }
        i += 1;
    }
    if has_sink {
        states.push(SINK.to_string());
        let sink = states.len() - 1;
        for e in &mut edges {
            if e.tgt == usize::MAX {
                e.tgt = sink;
            }
        }
    }
    Ok(Rts {
        label,
        states,
        edges,
    })
}

/// Program with one integer indicator variable per component state.
#[derive(Clone, Debug)]
pub struct Extended {
    pub variables: Vec<VarDecl>,
    pub components: Vec<Rts>,
    /// `indicators[c][s]` is the variable of state `s` of component `c`.
    pub indicators: Vec<Vec<VarId>>,
    /// Edge actions with the indicator guard and moves added, parallel to
    /// `components[c].edges`.
    pub actions: Vec<Vec<Action>>,
}

/// Adds indicators `P[label:state]` (1 in the initial state, 0 elsewhere).
/// Each edge guard gains `P_src = 1`; each reset gains `P_src' = 0` and
/// `P_tgt' = 1` unless the edge is a self-loop.
pub fn extend_program(p: &Program) -> Result<Extended, RtsError> {
    let components = build_rts(p)?;
    let mut variables = p.variables.clone();
    let mut indicators = Vec::with_capacity(components.len());
    for c in &components {
        let mut ids = Vec::with_capacity(c.states.len());
        for s in 0..c.states.len() {
            ids.push(VarId(variables.len()));
            variables.push(VarDecl {
                name: c.indicator_name(s),
                kind: VarKind::StateIndicator,
                integer: true,
                init: if s == 0 { 1.0 } else { 0.0 },
            });
        }
        indicators.push(ids);
    }
    let actions = components
        .iter()
        .zip(&indicators)
        .map(|(c, ids)| {
            c.edges
                .iter()
                .map(|e| {
                    let mut a = e.action.clone();
                    a.guard = Guard::and(
                        a.guard,
                        Guard::cmp(CmpOp::Eq, Expr::Var(ids[e.src]), Expr::Const(1.0)),
                    );
                    if e.src != e.tgt {
                        a.reset.push(ResetAtom::increment(ids[e.src], -1.0));
                        a.reset.push(ResetAtom::increment(ids[e.tgt], 1.0));
                    }
                    a
                })
                .collect()
        })
        .collect();
    Ok(Extended {
        variables,
        components,
        indicators,
        actions,
    })
}

/// Plain-text listing: one block per component with its states and edges.
pub fn dump_rts(p: &Program, comps: &[Rts]) -> String {
    let names = p.namer();
    let mut out = String::new();
    for c in comps {
        let _ = writeln!(out, "component {} states {}", c.label, c.states.len());
        for (i, s) in c.states.iter().enumerate() {
            let init = if i == 0 { " initial" } else { "" };
            let _ = writeln!(out, "  state {i} {s}{init}");
        }
        for e in &c.edges {
            let _ = writeln!(
                out,
                "  edge {} {}->{} {}",
                e.label(),
                e.src,
                e.tgt,
                action_text(&e.action, &names)
            );
        }
    }
    out
}

/// Graphviz rendering, one cluster per component.
pub fn to_dot(p: &Program, comps: &[Rts]) -> String {
    let names = p.namer();
    let mut out = String::from("digraph rts {\n");
    for (ci, c) in comps.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{ci} {{");
        let _ = writeln!(out, "    label = {:?};", c.label);
        for (si, s) in c.states.iter().enumerate() {
            let shape = if si == 0 { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "    c{ci}s{si} [label = {s:?}, shape = {shape}];");
        }
        for e in &c.edges {
            let text = action_text(&e.action, &names);
            let _ = writeln!(
                out,
                "    c{ci}s{} -> c{ci}s{} [label = {:?}];",
                e.src,
                e.tgt,
                format!("{}: {text}", e.label())
            );
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

use std::fmt::Write as _;

use crate::dsl::reset_text;
use crate::ir::{Expr, Guard, ResetAtom, VarDecl, VarId};

/// A control mode. Product modes keep the flattened tuple of factor names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub parts: Vec<String>,
}

impl Mode {
    pub fn new(name: impl Into<String>) -> Self {
        Mode {
            parts: vec![name.into()],
        }
    }

    pub fn name(&self) -> String {
        if self.parts.len() == 1 {
            self.parts[0].clone()
        } else {
            format!("({})", self.parts.join(","))
        }
    }
}

/// Flow `s * f(X)` active in one mode wherever `guard` holds.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousTransition {
    pub mode: usize,
    /// Sparse stoichiometry; variables not listed have coefficient 0.
    pub stoich: Vec<(VarId, f64)>,
    pub rate: Expr,
    pub guard: Guard,
    pub label: String,
}

impl ContinuousTransition {
    /// Dense stoichiometry over `n` variables.
    pub fn stoich_dense(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for &(v, k) in &self.stoich {
            s[v.index()] += k;
        }
        s
    }
}

/// Fires as soon as its guard holds; ties are broken by weight.
#[derive(Clone, Debug, PartialEq)]
pub struct InstantaneousTransition {
    pub from: usize,
    pub to: usize,
    pub guard: Guard,
    pub reset: Vec<ResetAtom>,
    pub weight: Expr,
    pub label: String,
}

/// Fires after an exponentially distributed delay with state-dependent
/// rate. Negative rates are treated as zero by the engines.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticTransition {
    pub from: usize,
    pub to: usize,
    pub guard: Guard,
    pub reset: Vec<ResetAtom>,
    pub rate: Expr,
    pub label: String,
}

/// Transition-driven stochastic hybrid automaton.
#[derive(Clone, Debug, PartialEq)]
pub struct Tdsha {
    pub modes: Vec<Mode>,
    pub variables: Vec<VarDecl>,
    pub continuous: Vec<ContinuousTransition>,
    pub instantaneous: Vec<InstantaneousTransition>,
    pub stochastic: Vec<StochasticTransition>,
    pub init_mode: usize,
}

/// Transition ids leaving one mode.
#[derive(Clone, Debug, Default)]
pub struct ModeIndex {
    pub continuous: Vec<usize>,
    pub instantaneous: Vec<usize>,
    pub stochastic: Vec<usize>,
}

impl Tdsha {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
    }

    pub fn initial_values(&self) -> Vec<f64> {
        self.variables.iter().map(|v| v.init).collect()
    }

    pub fn index(&self) -> Vec<ModeIndex> {
        let mut idx = vec![ModeIndex::default(); self.modes.len()];
        for (i, t) in self.continuous.iter().enumerate() {
            idx[t.mode].continuous.push(i);
        }
        for (i, t) in self.instantaneous.iter().enumerate() {
            idx[t.from].instantaneous.push(i);
        }
        for (i, t) in self.stochastic.iter().enumerate() {
            idx[t.from].stochastic.push(i);
        }
        idx
    }

    /// Structured text dump, one item per line.
    pub fn dump(&self) -> String {
        let names = |v: VarId| self.variables[v.index()].name.clone();
        let mut out = String::new();
        let _ = writeln!(out, "modes {}", self.modes.len());
        for (i, m) in self.modes.iter().enumerate() {
            let init = if i == self.init_mode { " initial" } else { "" };
            let _ = writeln!(out, "  mode {i} {}{init}", m.name());
        }
        let _ = writeln!(out, "variables {}", self.variables.len());
        for (i, v) in self.variables.iter().enumerate() {
            let int = if v.integer { " int" } else { "" };
            let _ = writeln!(out, "  var {i} {}{int} init={:?}", v.name, v.init);
        }
        let _ = writeln!(out, "continuous {}", self.continuous.len());
        for t in &self.continuous {
            let s: Vec<String> = t
                .stoich
                .iter()
                .map(|&(v, k)| format!("{}:{k:?}", names(v)))
                .collect();
            let _ = writeln!(
                out,
                "  flow {} mode={} stoich=[{}] rate={} guard={}",
                t.label,
                t.mode,
                s.join(" "),
                t.rate.display_with(&names),
                t.guard.display_with(&names)
            );
        }
        let _ = writeln!(out, "stochastic {}", self.stochastic.len());
        for t in &self.stochastic {
            let _ = writeln!(
                out,
                "  jump {} {}->{} guard={} rate={} reset=[{}]",
                t.label,
                t.from,
                t.to,
                t.guard.display_with(&names),
                t.rate.display_with(&names),
                resets(&t.reset, &names)
            );
        }
        let _ = writeln!(out, "instantaneous {}", self.instantaneous.len());
        for t in &self.instantaneous {
            let _ = writeln!(
                out,
                "  event {} {}->{} guard={} weight={} reset=[{}]",
                t.label,
                t.from,
                t.to,
                t.guard.display_with(&names),
                t.weight.display_with(&names),
                resets(&t.reset, &names)
            );
        }
        out
    }
}

fn resets(r: &[ResetAtom], names: &dyn Fn(VarId) -> String) -> String {
    r.iter()
        .map(|a| reset_text(a, names))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Vector field of one mode: `dX/dt = sum s * f(X) * [guard(X)]`.
#[derive(Clone, Debug)]
pub struct DriftField<'a> {
    flows: Vec<&'a ContinuousTransition>,
}

impl<'a> DriftField<'a> {
    pub fn new(t: &'a Tdsha, mode: usize) -> Self {
        DriftField {
            flows: t.continuous.iter().filter(|c| c.mode == mode).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn eval_into(&self, values: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for c in &self.flows {
            if !c.guard.eval_unchecked(values) {
                continue;
            }
            let f = c.rate.eval_unchecked(values);
            for &(v, k) in &c.stoich {
                out[v.index()] += k * f;
            }
        }
    }

    pub fn eval(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        self.eval_into(values, &mut out);
        out
    }
}

/// Drift of mode `q`.
pub fn drift_field(t: &Tdsha, q: usize) -> DriftField<'_> {
    DriftField::new(t, q)
}

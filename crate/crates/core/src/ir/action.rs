//! Guarded actions, resets and sequential agent definitions.

use rand::Rng;
use rand_distr::{Distribution as _, Exp1, StandardNormal};

use super::expr::{EvalError, Expr};
use super::guard::Guard;
use super::store::{Store, VarId};
use crate::dsl::Loc;

/// Random laws available to resets.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    /// Uniform on `[lo, hi)`.
    Uniform(Expr, Expr),
    /// Exponential with the given rate.
    Exponential(Expr),
    /// Normal with mean and standard deviation.
    Normal(Expr, Expr),
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Uniform(..) => "Unif",
            Distribution::Exponential(..) => "Exp",
            Distribution::Normal(..) => "Normal",
        }
    }

    pub fn params(&self) -> Vec<&Expr> {
        match self {
            Distribution::Uniform(a, b) | Distribution::Normal(a, b) => vec![a, b],
            Distribution::Exponential(a) => vec![a],
        }
    }

    fn params_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Distribution::Uniform(a, b) | Distribution::Normal(a, b) => vec![a, b],
            Distribution::Exponential(a) => vec![a],
        }
    }

    /// Draws one value, consuming the stream.
    pub fn sample<R: Rng + ?Sized>(&self, values: &[f64], rng: &mut R) -> f64 {
        match self {
            Distribution::Uniform(lo, hi) => {
                let (lo, hi) = (lo.eval_unchecked(values), hi.eval_unchecked(values));
                let u: f64 = rng.random();
                lo + (hi - lo) * u
            }
            Distribution::Exponential(rate) => {
                let e: f64 = Exp1.sample(rng);
                e / rate.eval_unchecked(values)
            }
            Distribution::Normal(mean, sd) => {
                let z: f64 = StandardNormal.sample(rng);
                mean.eval_unchecked(values) + sd.eval_unchecked(values) * z
            }
        }
    }
}

/// How a reset atom computes the new value of its target.
#[derive(Clone, Debug, PartialEq)]
pub enum ResetLaw {
    /// `X' = X + k`.
    Increment(f64),
    /// `X' = e`, evaluated on the pre-state.
    Assign(Expr),
    /// `X' = D(params)`.
    Random(Distribution),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResetAtom {
    pub target: VarId,
    pub law: ResetLaw,
    pub loc: Loc,
}

impl ResetAtom {
    pub fn increment(target: VarId, k: f64) -> Self {
        ResetAtom {
            target,
            law: ResetLaw::Increment(k),
            loc: Loc::NONE,
        }
    }

    pub fn assign(target: VarId, e: Expr) -> Self {
        ResetAtom {
            target,
            law: ResetLaw::Assign(e),
            loc: Loc::NONE,
        }
    }

    pub fn random(target: VarId, d: Distribution) -> Self {
        ResetAtom {
            target,
            law: ResetLaw::Random(d),
            loc: Loc::NONE,
        }
    }

    pub fn is_increment(&self) -> bool {
        matches!(self.law, ResetLaw::Increment(_))
    }

    /// Variables read by the right-hand side (the target itself for increments).
    pub fn visit_reads(&self, f: &mut dyn FnMut(VarId)) {
        match &self.law {
            ResetLaw::Increment(_) => f(self.target),
            ResetLaw::Assign(e) => e.visit_vars(f),
            ResetLaw::Random(d) => d.params().into_iter().for_each(|p| p.visit_vars(f)),
        }
    }

    pub fn remap(&self, map: &dyn Fn(VarId) -> VarId) -> ResetAtom {
        let law = match &self.law {
            ResetLaw::Increment(k) => ResetLaw::Increment(*k),
            ResetLaw::Assign(e) => ResetLaw::Assign(e.remap(map)),
            ResetLaw::Random(d) => {
                let mut d = d.clone();
                for p in d.params_mut() {
                    *p = p.remap(map);
                }
                ResetLaw::Random(d)
            }
        };
        ResetAtom {
            target: map(self.target),
            law,
            loc: self.loc,
        }
    }

    #[inline]
    fn value<R: Rng + ?Sized>(&self, pre: &[f64], rng: &mut R) -> f64 {
        match &self.law {
            ResetLaw::Increment(k) => pre[self.target.index()] + k,
            ResetLaw::Assign(e) => e.eval_unchecked(pre),
            ResetLaw::Random(d) => d.sample(pre, rng),
        }
    }
}

/// Error for reset lists that cannot be applied.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ResetError {
    #[error("variable {0} is the target of more than one reset atom")]
    DuplicateTarget(VarId),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Applies reset atoms simultaneously: every right-hand side reads the
/// pre-state and random draws are taken in atom order.
pub fn apply_reset<R: Rng + ?Sized>(
    resets: &[ResetAtom],
    store: &Store,
    rng: &mut R,
) -> Result<Store, ResetError> {
    for (i, a) in resets.iter().enumerate() {
        if resets[..i].iter().any(|b| b.target == a.target) {
            return Err(ResetError::DuplicateTarget(a.target));
        }
        if let ResetLaw::Assign(e) = &a.law {
            e.eval(&store.values)?;
        }
    }
    let mut out = store.clone();
    let mut scratch = Vec::with_capacity(resets.len());
    apply_reset_in_place(resets, &mut out.values, &mut scratch, rng);
    Ok(out)
}

/// In-place variant used by the engines. `scratch` avoids allocation.
#[inline]
pub fn apply_reset_in_place<R: Rng + ?Sized>(
    resets: &[ResetAtom],
    values: &mut [f64],
    scratch: &mut Vec<f64>,
    rng: &mut R,
) {
    scratch.clear();
    for a in resets {
        scratch.push(a.value(values, rng));
    }
    for (a, v) in resets.iter().zip(scratch.iter()) {
        values[a.target.index()] = *v;
    }
}

/// Rate of an action: finite expression or instantaneous.
#[derive(Clone, Debug, PartialEq)]
pub enum Rate {
    Finite(Expr),
    Infinite,
}

impl Rate {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Rate::Infinite)
    }
}

/// `[guard -> reset]{rate}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub guard: Guard,
    pub reset: Vec<ResetAtom>,
    pub rate: Rate,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Continuation {
    Agent(String),
    /// The null agent `0`.
    Null,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub action: Action,
    pub continuation: Continuation,
    pub loc: Loc,
    pub continuation_loc: Loc,
}

/// `name :- branch + branch + ...`
#[derive(Clone, Debug, PartialEq)]
pub struct AgentDef {
    pub name: String,
    pub branches: Vec<Branch>,
    pub loc: Loc,
}

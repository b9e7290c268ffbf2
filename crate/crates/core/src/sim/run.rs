use super::config::SimConfig;
use super::exact::run_exact;
use super::hybrid::run_hybrid;
use super::prepared::Prepared;
use super::state::failed;
use super::trajectory::Trajectory;
use crate::ir::Program;
use crate::rts::{extend_program, RtsError};
use crate::tdsha::{
    compile_program, product, time_monitor, CompileError, KappaError, KappaSpec, PartitionVector,
    Tdsha,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Exact,
    Hybrid,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Rts(#[from] RtsError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Kappa(#[from] KappaError),
    #[error("partition vector has {got} components, the program has {expected}")]
    PartitionShape { expected: usize, got: usize },
}

/// A program compiled at one point of the partition lattice, ready to be
/// simulated any number of times.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub automaton: Tdsha,
    pub engine: Engine,
}

impl Simulator {
    /// Extends the program with state indicators, builds and compiles the
    /// transition systems under `pv` and picks the engine: exact when
    /// every edge is discrete, hybrid otherwise (with the clock automaton
    /// attached when some guard reads `Time`).
    pub fn new(p: &Program, pv: &PartitionVector) -> Result<Self, RunError> {
        let ext = extend_program(p)?;
        if pv.continuous.len() != ext.components.len() {
            return Err(RunError::PartitionShape {
                expected: ext.components.len(),
                got: pv.continuous.len(),
            });
        }
        let t = compile_program(&ext, pv)?;
        if pv.is_all_discrete() && t.continuous.is_empty() {
            return Ok(Simulator {
                automaton: t,
                engine: Engine::Exact,
            });
        }
        let automaton = if p.uses_time() {
            product(&t, &time_monitor())?
        } else {
            t
        };
        Ok(Simulator {
            automaton,
            engine: Engine::Hybrid,
        })
    }

    /// Like [`Simulator::new`] with the partition given as a specification
    /// such as `all-discrete` or `all-continuous,agent.0=d`.
    pub fn with_kappa(p: &Program, kappa: &KappaSpec) -> Result<Self, RunError> {
        let ext = extend_program(p)?;
        let pv = kappa.resolve(&ext.components)?;
        Simulator::new(p, &pv)
    }

    pub fn simulate(&self, c: &SimConfig) -> Trajectory {
        if let Err(e) = c.validate() {
            return failed(&self.automaton, e.to_string());
        }
        let p = Prepared::new(&self.automaton);
        match self.engine {
            Engine::Exact => run_exact(&p, c),
            Engine::Hybrid => run_hybrid(&p, c),
        }
    }
}

/// Compiles and simulates in one go.
pub fn run(p: &Program, pv: &PartitionVector, c: &SimConfig) -> Result<Trajectory, RunError> {
    Ok(Simulator::new(p, pv)?.simulate(c))
}

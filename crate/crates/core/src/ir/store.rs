//! Variable identifiers and the dense value store.

use std::fmt;

/// Index of a variable in a program, extended program or automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0)
    }
}

/// Role of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Shared stream variable of the program.
    Stream,
    /// 0/1 indicator of a sequential component's current state.
    StateIndicator,
    /// The reserved model clock `Time`.
    Time,
}

/// Reserved name of the clock variable.
pub const TIME: &str = "Time";

/// Declaration of a variable with its initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    /// Integer-valued under the exact engine.
    pub integer: bool,
    pub init: f64,
}

impl VarDecl {
    pub fn stream(name: impl Into<String>, integer: bool, init: f64) -> Self {
        VarDecl {
            name: name.into(),
            kind: VarKind::Stream,
            integer,
            init,
        }
    }

    pub fn time() -> Self {
        VarDecl {
            name: TIME.to_string(),
            kind: VarKind::Time,
            integer: false,
            init: 0.0,
        }
    }
}

/// Values of all variables plus the current model time.
#[derive(Clone, Debug, PartialEq)]
pub struct Store {
    pub values: Vec<f64>,
    pub time: f64,
}

impl Store {
    pub fn new(values: Vec<f64>) -> Self {
        Store { values, time: 0.0 }
    }

    pub fn from_decls(decls: &[VarDecl]) -> Self {
        Store::new(decls.iter().map(|d| d.init).collect())
    }

    #[inline]
    pub fn get(&self, id: VarId) -> f64 {
        self.values[id.0]
    }

    #[inline]
    pub fn set(&mut self, id: VarId, v: f64) {
        self.values[id.0] = v;
    }
}

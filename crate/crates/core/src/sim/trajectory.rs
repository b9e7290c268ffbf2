use std::sync::Arc;

use crate::ir::VarKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Stochastic,
    Instantaneous,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Stochastic => "stochastic",
            EventKind::Instantaneous => "instantaneous",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// Index into the automaton's stochastic or instantaneous transitions.
    pub transition: usize,
    /// Store just before an instantaneous transition fired.
    pub pre: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Completed,
    /// No transition can ever fire again.
    Absorbed,
    Error(String),
}

/// Recorded run: samples (row-major, one row per time), event log and
/// bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub names: Arc<[String]>,
    pub kinds: Arc<[VarKind]>,
    pub times: Vec<f64>,
    pub data: Vec<f64>,
    pub events: Vec<Event>,
    pub stochastic_labels: Arc<[String]>,
    pub instantaneous_labels: Arc<[String]>,
    /// Negative stochastic rates seen (and treated as zero).
    pub clamps: u64,
    pub status: Status,
    /// First time each variable was observed at or below zero after a jump.
    pub first_zero: Vec<Option<f64>>,
    pub stochastic_jumps: u64,
    pub instantaneous_jumps: u64,
    /// Time at which the run stopped.
    pub final_time: f64,
    pub final_values: Vec<f64>,
}

impl Trajectory {
    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_vars();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Samples of one variable.
    pub fn series(&self, var: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.row(i)[var]).collect()
    }

    /// Value at `t` (right-continuous, last sample at or before `t`).
    pub fn value_at(&self, var: usize, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s <= t);
        (i > 0).then(|| self.row(i - 1)[var])
    }

    pub fn event_label(&self, e: &Event) -> &str {
        match e.kind {
            EventKind::Stochastic => &self.stochastic_labels[e.transition],
            EventKind::Instantaneous => &self.instantaneous_labels[e.transition],
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self.status, Status::Error(_))
    }

    /// Whether variable `var` reached zero before `t_end`.
    pub fn went_extinct(&self, var: usize) -> bool {
        self.first_zero[var].is_some()
    }
}

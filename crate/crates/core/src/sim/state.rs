use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};

use super::config::{EventLogging, Recording, SimConfig};
use super::prepared::Prepared;
use super::queue::PendingEventQueue;
use super::trajectory::{Event, EventKind, Status, Trajectory};
use crate::ir::apply_reset_in_place;

/// Candidate instantaneous transitions to test during quiescence.
pub(crate) enum Candidates<'c> {
    All,
    Some(&'c [usize]),
}

/// Error that stops a run; becomes `Status::Error`.
#[derive(Debug)]
pub(crate) struct Abort(pub String);

/// Mutable state of one run, shared by both engines.
pub(crate) struct RunState<'p, 'a> {
    pub p: &'p Prepared<'a>,
    pub cfg: &'p SimConfig,
    pub rng: ChaCha8Rng,
    pub t: f64,
    pub values: Vec<f64>,
    pub mode: usize,
    /// Current (clamped) stochastic rates, indexed by transition id; only
    /// entries of the current mode are meaningful.
    pub rates: Vec<f64>,
    pub queue: PendingEventQueue,
    scratch: Vec<f64>,
    grid: Vec<f64>,
    next_grid: usize,
    times: Vec<f64>,
    data: Vec<f64>,
    events: Vec<Event>,
    pub clamps: u64,
    first_zero: Vec<Option<f64>>,
    pub stochastic_jumps: u64,
    pub instantaneous_jumps: u64,
}

impl<'p, 'a> RunState<'p, 'a> {
    pub fn new(p: &'p Prepared<'a>, cfg: &'p SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.replicate);
        let t = p.t;
        let values = t.initial_values();
        let first_zero = values.iter().map(|&v| (v <= 0.0).then_some(0.0)).collect();
        let mut s = RunState {
            p,
            cfg,
            rng,
            t: 0.0,
            values,
            mode: t.init_mode,
            rates: vec![0.0; t.stochastic.len()],
            queue: PendingEventQueue::new(t.instantaneous.len()),
            scratch: Vec::new(),
            grid: cfg.grid_times().unwrap_or_default(),
            next_grid: 0,
            times: Vec::new(),
            data: Vec::new(),
            events: Vec::new(),
            clamps: 0,
            first_zero,
            stochastic_jumps: 0,
            instantaneous_jumps: 0,
        };
        s.pin_clock();
        // the first sample is the initial store, whatever fires at time 0
        s.push_sample(0.0);
        if !s.grid.is_empty() {
            s.next_grid = 1;
        }
        s
    }

    #[inline]
    pub fn pin_clock(&mut self) {
        if let Some(tv) = self.p.time {
            self.values[tv] = self.t;
        }
    }

    fn push_sample(&mut self, at: f64) {
        self.times.push(at);
        let start = self.data.len();
        self.data.extend_from_slice(&self.values);
        if let Some(tv) = self.p.time {
            self.data[start + tv] = at;
        }
    }

    pub fn every_jump(&self) -> bool {
        self.cfg.record == Recording::EveryJump
    }

    /// Records a sample at the current time in every-jump mode.
    #[inline]
    pub fn record_jump(&mut self) {
        if self.every_jump() {
            self.push_sample(self.t);
        }
    }

    /// Emits grid samples strictly before `t` with the current store.
    #[inline]
    pub fn emit_grid_before(&mut self, t: f64) {
        while self.next_grid < self.grid.len() && self.grid[self.next_grid] < t {
            let g = self.grid[self.next_grid];
            self.push_sample(g);
            self.next_grid += 1;
        }
    }

    /// Emits grid samples at or before `t` with the current store.
    pub fn emit_grid_upto(&mut self, t: f64) {
        while self.next_grid < self.grid.len() && self.grid[self.next_grid] <= t {
            let g = self.grid[self.next_grid];
            self.push_sample(g);
            self.next_grid += 1;
        }
    }

    pub fn next_grid_time(&self) -> Option<f64> {
        self.grid.get(self.next_grid).copied()
    }

    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    /// Evaluates the clamped rate of stochastic transition `k`.
    #[inline]
    pub fn eval_rate(&mut self, k: usize) -> Result<f64, Abort> {
        let s = &self.p.t.stochastic[k];
        if !s.guard.eval_unchecked(&self.values) {
            return Ok(0.0);
        }
        let r = s.rate.eval_unchecked(&self.values);
        if r >= 0.0 && r.is_finite() {
            return Ok(r);
        }
        if r.is_nan() || r.is_infinite() {
            return Err(Abort(format!(
                "rate of `{}` is not finite ({r}) at time {}",
                s.label, self.t
            )));
        }
        self.clamps += 1;
        if self.clamps <= self.cfg.max_clamp_warnings {
            log::warn!(
                "negative rate {r} of `{}` at time {} treated as zero",
                s.label,
                self.t
            );
        }
        Ok(0.0)
    }

    pub fn recompute_rates(&mut self) -> Result<(), Abort> {
        let p = self.p;
        for &k in &p.index[self.mode].stochastic {
            self.rates[k] = self.eval_rate(k)?;
        }
        Ok(())
    }

    #[inline]
    pub fn total_rate(&self) -> f64 {
        self.p.index[self.mode]
            .stochastic
            .iter()
            .map(|&k| self.rates[k])
            .sum()
    }

    /// Picks a stochastic transition with probability proportional to its
    /// rate using one uniform draw.
    #[inline]
    pub fn select(&mut self, total: f64) -> Option<usize> {
        let u: f64 = self.rng.random();
        let target = u * total;
        let mut acc = 0.0;
        let mut last = None;
        for &k in &self.p.index[self.mode].stochastic {
            let r = self.rates[k];
            if r > 0.0 {
                acc += r;
                last = Some(k);
                if target < acc {
                    return last;
                }
            }
        }
        last
    }

    #[inline]
    fn note_zero(&mut self, var: usize) {
        if self.values[var] <= 0.0 && self.first_zero[var].is_none() {
            self.first_zero[var] = Some(self.t);
        }
    }

    fn check_integers(&self, vars: &[usize], hybrid: bool) -> Result<(), Abort> {
        for &v in vars {
            if hybrid && self.p.flowing[v] {
                continue;
            }
            let x = self.values[v];
            if x.fract() != 0.0 {
                return Err(Abort(format!(
                    "integer variable `{}` took value {x} at time {}",
                    self.p.t.variables[v].name, self.t
                )));
            }
        }
        Ok(())
    }

    /// Applies stochastic transition `k` at the current time. Returns
    /// whether the mode changed.
    pub fn apply_stochastic(&mut self, k: usize, hybrid: bool) -> Result<bool, Abort> {
        let p = self.p;
        let s = &p.t.stochastic[k];
        apply_reset_in_place(&s.reset, &mut self.values, &mut self.scratch, &mut self.rng);
        self.pin_clock();
        for a in &s.reset {
            self.note_zero(a.target.index());
        }
        if !p.st_int_checks[k].is_empty() {
            self.check_integers(&p.st_int_checks[k], hybrid)?;
        }
        self.stochastic_jumps += 1;
        if self.cfg.log == EventLogging::All {
            self.events.push(Event {
                time: self.t,
                kind: EventKind::Stochastic,
                transition: k,
                pre: None,
            });
        }
        let changed = s.from != s.to;
        self.mode = s.to;
        self.record_jump();
        Ok(changed)
    }

    /// Next activation time of instantaneous transition `i`, if it lies in
    /// the future.
    fn clock_key(&self, i: usize) -> Option<f64> {
        let bounds = &self.p.inst_clock_bounds[i];
        if bounds.is_empty() {
            return None;
        }
        let key = bounds
            .iter()
            .map(|e| e.eval_unchecked(&self.values))
            .fold(f64::NEG_INFINITY, f64::max);
        (key > self.t && key.is_finite()).then_some(key)
    }

    pub fn reschedule(&mut self, i: usize) {
        match self.clock_key(i) {
            Some(k) => self.queue.schedule(i, k),
            None => self.queue.cancel(i),
        }
    }

    pub fn rebuild_queue(&mut self) {
        self.queue.clear();
        let p = self.p;
        for &i in &p.index[self.mode].instantaneous {
            if let Some(k) = self.clock_key(i) {
                self.queue.schedule(i, k);
            }
        }
    }

    /// Fires enabled instantaneous transitions until none is enabled.
    /// Returns the number fired. After any firing, stochastic rates and the
    /// event queue are rebuilt.
    pub fn quiescence(&mut self, first: Candidates<'_>, hybrid: bool) -> Result<u64, Abort> {
        let p = self.p;
        let mut cands = first;
        let mut fired = 0u64;
        let mut enabled = Vec::new();
        loop {
            enabled.clear();
            let list: &[usize] = match &cands {
                Candidates::All => &p.index[self.mode].instantaneous,
                Candidates::Some(v) => v,
            };
            for &i in list {
                let tr = &p.t.instantaneous[i];
                if tr.from == self.mode && tr.guard.eval_unchecked(&self.values) {
                    enabled.push(i);
                }
            }
            if enabled.is_empty() {
                break;
            }
            let i = if enabled.len() == 1 {
                enabled[0]
            } else {
                self.choose_weighted(&enabled)
            };
            let tr = &p.t.instantaneous[i];
            let pre = match self.cfg.log {
                EventLogging::None => None,
                _ => Some(self.values.clone()),
            };
            apply_reset_in_place(
                &tr.reset,
                &mut self.values,
                &mut self.scratch,
                &mut self.rng,
            );
            self.pin_clock();
            for a in &tr.reset {
                self.note_zero(a.target.index());
            }
            self.check_integers(&p.inst_int_checks[i], hybrid)?;
            self.mode = tr.to;
            self.instantaneous_jumps += 1;
            if let Some(pre) = pre {
                self.events.push(Event {
                    time: self.t,
                    kind: EventKind::Instantaneous,
                    transition: i,
                    pre: Some(pre),
                });
            }
            self.record_jump();
            fired += 1;
            if fired > self.cfg.max_instantaneous_chain {
                return Err(Abort(format!("instantaneous cycle at time {}", self.t)));
            }
            cands = Candidates::All;
        }
        if fired > 0 {
            self.recompute_rates()?;
            self.rebuild_queue();
        }
        Ok(fired)
    }

    fn choose_weighted(&mut self, enabled: &[usize]) -> usize {
        let w: Vec<f64> = enabled
            .iter()
            .map(|&i| {
                let x = self.p.t.instantaneous[i]
                    .weight
                    .eval_unchecked(&self.values);
                if x > 0.0 && x.is_finite() {
                    x
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        let u: f64 = self.rng.random();
        if total <= 0.0 {
            let k = ((u * enabled.len() as f64) as usize).min(enabled.len() - 1);
            return enabled[k];
        }
        let target = u * total;
        let mut acc = 0.0;
        for (k, &x) in w.iter().enumerate() {
            acc += x;
            if target < acc {
                return enabled[k];
            }
        }
        *enabled
            .iter()
            .zip(&w)
            .rev()
            .find(|(_, &x)| x > 0.0)
            .map(|(i, _)| i)
            .unwrap_or(&enabled[0])
    }

    pub fn finish(mut self, status: Status) -> Trajectory {
        let t_end = self.cfg.t_end;
        match status {
            Status::Completed => {
                self.t = t_end;
                self.pin_clock();
                if self.every_jump() {
                    if self.times.last() != Some(&t_end) {
                        self.push_sample(t_end);
                    }
                } else {
                    self.emit_grid_upto(t_end);
                }
            }
            Status::Absorbed => {
                // nothing moves any more: the store is final
                if !self.every_jump() {
                    while self.next_grid < self.grid.len() {
                        let g = self.grid[self.next_grid];
                        self.push_sample(g);
                        self.next_grid += 1;
                    }
                }
            }
            Status::Error(_) => {}
        }
        let t = self.p.t;
        Trajectory {
            names: t.variables.iter().map(|v| v.name.clone()).collect(),
            kinds: t.variables.iter().map(|v| v.kind).collect(),
            times: self.times,
            data: self.data,
            events: self.events,
            stochastic_labels: t.stochastic.iter().map(|s| s.label.clone()).collect(),
            instantaneous_labels: t.instantaneous.iter().map(|s| s.label.clone()).collect(),
            clamps: self.clamps,
            status,
            first_zero: self.first_zero,
            stochastic_jumps: self.stochastic_jumps,
            instantaneous_jumps: self.instantaneous_jumps,
            final_time: self.t,
            final_values: self.values,
        }
    }
}

/// Builds an empty errored trajectory (used for invalid configurations).
pub(crate) fn failed(t: &crate::tdsha::Tdsha, msg: String) -> Trajectory {
    Trajectory {
        names: t.variables.iter().map(|v| v.name.clone()).collect(),
        kinds: t.variables.iter().map(|v| v.kind).collect(),
        times: Vec::new(),
        data: Vec::new(),
        events: Vec::new(),
        stochastic_labels: t.stochastic.iter().map(|s| s.label.clone()).collect(),
        instantaneous_labels: t.instantaneous.iter().map(|s| s.label.clone()).collect(),
        clamps: 0,
        status: Status::Error(msg),
        first_zero: vec![None; t.variables.len()],
        stochastic_jumps: 0,
        instantaneous_jumps: 0,
        final_time: 0.0,
        final_values: t.initial_values(),
    }
}

use super::config::SimConfig;
use super::dopri::{hermite, next_step, Dopri};
use super::prepared::Prepared;
use super::state::{failed, Abort, Candidates, RunState};
use super::trajectory::{Status, Trajectory};
use crate::tdsha::Tdsha;

/// Piecewise-deterministic simulation: flows are integrated with an
/// adaptive Dormand–Prince scheme, stochastic jumps fire when the
/// integrated hazard reaches an exponential threshold, instantaneous
/// transitions fire when their guard becomes true (located by bisection),
/// and clock events are exact stopping points.
pub fn simulate_hybrid(t: &Tdsha, c: &SimConfig) -> Trajectory {
    if let Err(e) = c.validate() {
        return failed(t, e.to_string());
    }
    let p = Prepared::new(t);
    run_hybrid(&p, c)
}

/// Deterministic integration of an automaton; identical to the hybrid
/// engine, which draws no random numbers when nothing stochastic can fire.
pub fn simulate_ode(t: &Tdsha, c: &SimConfig) -> Trajectory {
    simulate_hybrid(t, c)
}

pub(crate) fn run_hybrid(p: &Prepared<'_>, c: &SimConfig) -> Trajectory {
    let mut s = RunState::new(p, c);
    let n = p.t.variables.len();
    let mut h = Hybrid {
        n,
        dp: Dopri::new(n + 1),
        y: vec![0.0; n + 1],
        f0: vec![0.0; n + 1],
        y1: vec![0.0; n + 1],
        f1: vec![0.0; n + 1],
        tmp: vec![0.0; n + 1],
        sig0: Vec::new(),
        sig1: Vec::new(),
        active: Vec::new(),
        active_valid: false,
        h: 0.0,
        hazard: 0.0,
        threshold: 0.0,
        day: 0,
        switches: 0,
    };
    let status = match h.run(&mut s) {
        Ok(st) => st,
        Err(Abort(msg)) => Status::Error(msg),
    };
    s.finish(status)
}

enum Outcome {
    Reached,
    GuardSwitch,
    HazardHit,
}

struct Hybrid {
    n: usize,
    dp: Dopri,
    y: Vec<f64>,
    f0: Vec<f64>,
    y1: Vec<f64>,
    f1: Vec<f64>,
    tmp: Vec<f64>,
    sig0: Vec<bool>,
    sig1: Vec<bool>,
    /// Which flows of the current mode are switched on. Guards are frozen
    /// during a step so the vector field stays smooth; the set changes only
    /// at located guard crossings and after discrete jumps.
    active: Vec<bool>,
    active_valid: bool,
    /// Step size carried across segments.
    h: f64,
    /// Accumulated hazard since the last stochastic jump.
    hazard: f64,
    /// Exponential threshold the hazard must reach.
    threshold: f64,
    day: i64,
    switches: u64,
}

/// Right-hand side in mode `mode` with the flows flagged in `active`;
/// component `n` is the total stochastic rate when `with_hazard` is set.
fn rhs(
    p: &Prepared<'_>,
    mode: usize,
    active: &[bool],
    with_hazard: bool,
    y: &[f64],
    dy: &mut [f64],
) {
    dy.iter_mut().for_each(|d| *d = 0.0);
    for (c, &on) in p.mode_flows[mode].iter().zip(active) {
        if !on {
            continue;
        }
        let f = c.rate.eval_unchecked(y);
        for &(v, k) in &c.stoich {
            dy[v.index()] += k * f;
        }
    }
    if let Some(tv) = p.time {
        dy[tv] = 1.0;
    }
    if with_hazard {
        let mut total = 0.0;
        for &k in &p.index[mode].stochastic {
            let s = &p.t.stochastic[k];
            if s.guard.eval_unchecked(y) {
                let r = s.rate.eval_unchecked(y);
                // keep NaN so the step is rejected
                total += if r < 0.0 { 0.0 } else { r };
            }
        }
        let n = p.t.variables.len();
        dy[n] = total;
    }
}

/// Guards whose change interrupts integration: flow guards and the
/// instantaneous guards that can become true between clock events.
fn signature(p: &Prepared<'_>, mode: usize, y: &[f64], out: &mut Vec<bool>) {
    out.clear();
    for c in &p.mode_flows[mode] {
        out.push(c.guard.eval_unchecked(y));
    }
    for &i in &p.index[mode].instantaneous {
        if !p.inst_point_only[i] {
            out.push(p.t.instantaneous[i].guard.eval_unchecked(y));
        }
    }
}

impl Hybrid {
    fn run(&mut self, s: &mut RunState<'_, '_>) -> Result<Status, Abort> {
        let p = s.p;
        let t_end = s.cfg.t_end;
        s.recompute_rates()?;
        s.rebuild_queue();
        let fired = s.quiescence(Candidates::All, true)?;
        self.count_switches(s, fired)?;
        self.threshold = s.exp1();
        self.active_valid = false;
        loop {
            if s.t >= t_end {
                return Ok(Status::Completed);
            }
            let mut stop = t_end;
            if let Some(g) = s.next_grid_time() {
                stop = stop.min(g);
            }
            let queued = s.queue.peek().map(|(k, _)| k);
            if let Some(k) = queued {
                stop = stop.min(k);
            }
            let flows = !p.mode_flows[s.mode].is_empty();

            if p.mode_const_hazard[s.mode] {
                s.recompute_rates()?;
                let total = s.total_rate();
                let t_jump = if total > 0.0 {
                    s.t + (self.threshold - self.hazard).max(0.0) / total
                } else {
                    f64::INFINITY
                };
                if !flows && t_jump.is_infinite() && queued.is_none() {
                    return Ok(Status::Absorbed);
                }
                let target = stop.min(t_jump);
                let t0 = s.t;
                let outcome = if flows {
                    self.integrate(s, target, false)?
                } else {
                    s.t = target;
                    s.pin_clock();
                    Outcome::Reached
                };
                self.hazard += total * (s.t - t0);
                match outcome {
                    Outcome::Reached if s.t == t_jump && t_jump < stop => self.fire(s)?,
                    Outcome::Reached => self.arrive(s)?,
                    Outcome::GuardSwitch => self.switched(s)?,
                    Outcome::HazardHit => unreachable!("hazard is not integrated here"),
                }
            } else {
                match self.integrate(s, stop, true)? {
                    Outcome::Reached => self.arrive(s)?,
                    Outcome::GuardSwitch => self.switched(s)?,
                    Outcome::HazardHit => self.fire(s)?,
                }
            }
        }
    }

    fn count_switches(&mut self, s: &RunState<'_, '_>, k: u64) -> Result<(), Abort> {
        if k == 0 {
            return Ok(());
        }
        let day = s.t.floor() as i64;
        if day != self.day {
            self.day = day;
            self.switches = 0;
        }
        self.switches += k;
        if self.switches as f64 > s.cfg.max_jump_rate {
            return Err(Abort(format!(
                "guard chattering: more than {} switches in day {day}",
                s.cfg.max_jump_rate
            )));
        }
        Ok(())
    }

    /// Handles a stopping point: due clock events, then grid samples.
    fn arrive(&mut self, s: &mut RunState<'_, '_>) -> Result<(), Abort> {
        let due = s.queue.pop_due(s.t);
        if !due.is_empty() {
            let fired = s.quiescence(Candidates::Some(&due), true)?;
            self.count_switches(s, fired)?;
            if fired > 0 {
                self.active_valid = false;
            }
        }
        s.emit_grid_upto(s.t);
        Ok(())
    }

    fn switched(&mut self, s: &mut RunState<'_, '_>) -> Result<(), Abort> {
        let fired = s.quiescence(Candidates::All, true)?;
        self.count_switches(s, fired + 1)?;
        if fired > 0 {
            self.active_valid = false;
        }
        s.emit_grid_upto(s.t);
        Ok(())
    }

    fn fire(&mut self, s: &mut RunState<'_, '_>) -> Result<(), Abort> {
        s.recompute_rates()?;
        let total = s.total_rate();
        if total > 0.0 {
            if let Some(k) = s.select(total) {
                s.apply_stochastic(k, true)?;
            }
        }
        self.hazard = 0.0;
        self.threshold = s.exp1();
        self.active_valid = false;
        s.recompute_rates()?;
        s.rebuild_queue();
        let fired = s.quiescence(Candidates::All, true)?;
        self.count_switches(s, fired)?;
        s.emit_grid_upto(s.t);
        Ok(())
    }

    fn min_step(t: f64) -> f64 {
        t.abs().max(1.0) * 1e-13
    }

    fn initial_step(&self, s: &RunState<'_, '_>, remaining: f64) -> f64 {
        if self.h > 0.0 {
            return self.h;
        }
        let (rtol, atol) = (s.cfg.rtol, s.cfg.atol);
        let (mut d0, mut d1) = (0.0f64, 0.0f64);
        for i in 0..self.n {
            let sc = atol + rtol * self.y[i].abs();
            d0 = d0.max((self.y[i] / sc).abs());
            d1 = d1.max((self.f0[i] / sc).abs());
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(remaining)
    }

    /// Integrates from the current time towards `stop`, interrupting at
    /// the first guard change or hazard crossing.
    fn integrate(
        &mut self,
        s: &mut RunState<'_, '_>,
        stop: f64,
        with_hazard: bool,
    ) -> Result<Outcome, Abort> {
        let p = s.p;
        let n = self.n;
        let mode = s.mode;
        let (rtol, atol, tol) = (s.cfg.rtol, s.cfg.atol, s.cfg.event_tol);
        let time = p.time;
        let n_flows = p.mode_flows[mode].len();

        self.y[..n].copy_from_slice(&s.values);
        self.y[n] = if with_hazard { self.hazard } else { 0.0 };
        signature(p, mode, &self.y, &mut self.sig0);
        if !self.active_valid || self.active.len() != n_flows {
            self.active.clear();
            self.active.extend_from_slice(&self.sig0[..n_flows]);
            self.active_valid = true;
        }
        let active = std::mem::take(&mut self.active);
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| rhs(p, mode, &active, with_hazard, y, dy);
        f(s.t, &self.y, &mut self.f0);
        let mut t = s.t;

        let mut new_active = None;
        let outcome = loop {
            let remaining = stop - t;
            if remaining <= 0.0 {
                break Outcome::Reached;
            }
            let mut h = self.initial_step(s, remaining);
            if let Some(m) = s.cfg.max_step {
                h = h.min(m);
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let err = self.dp.step(
                &mut f,
                t,
                &self.y,
                &self.f0,
                h,
                &mut self.y1,
                &mut self.f1,
                rtol,
                atol,
            );
            if !(err <= 1.0) {
                let shrink = if err.is_finite() {
                    next_step(h, err).min(0.9 * h)
                } else {
                    0.1 * h
                };
                if shrink < Self::min_step(t) {
                    s.t = t;
                    self.active = active;
                    return Err(Abort(if err.is_finite() {
                        format!("step size underflow at time {t}")
                    } else {
                        format!("state became non-finite at time {t}")
                    }));
                }
                self.h = shrink;
                continue;
            }
            let t1 = if last { stop } else { t + h };
            if let Some(tv) = time {
                self.y1[tv] = t1;
            }
            let hazard_hit = with_hazard && self.y1[n] >= self.threshold;
            signature(p, mode, &self.y1, &mut self.sig1);
            let guard_hit = self.sig1 != self.sig0;
            if !last || self.h == 0.0 {
                self.h = next_step(h, err);
            }

            if !hazard_hit && !guard_hit {
                t = t1;
                std::mem::swap(&mut self.y, &mut self.y1);
                std::mem::swap(&mut self.f0, &mut self.f1);
                if s.every_jump() && t < stop {
                    s.values.copy_from_slice(&self.y[..n]);
                    s.t = t;
                    s.record_jump();
                }
                continue;
            }

            // earliest interruption inside (t, t1]
            let mut theta = 1.0;
            if hazard_hit {
                let thr = self.threshold;
                theta = self.locate(h, tol, |y| y[n] >= thr);
            }
            let mut guard_first = false;
            if guard_hit {
                let sig0 = std::mem::take(&mut self.sig0);
                let mut buf = Vec::with_capacity(sig0.len());
                let tg = self.locate(h, tol, |y| {
                    signature(p, mode, y, &mut buf);
                    buf != sig0
                });
                self.sig0 = sig0;
                if tg < theta || !hazard_hit {
                    theta = tg;
                    guard_first = true;
                    // flows take the side of the crossing
                    hermite(tg, h, &self.y, &self.f0, &self.y1, &self.f1, &mut self.tmp);
                    signature(p, mode, &self.tmp, &mut self.sig1);
                }
            }
            let he = theta * h;
            let te = if theta >= 1.0 { t1 } else { t + he };
            if theta < 1.0 {
                self.dp.step(
                    &mut f,
                    t,
                    &self.y,
                    &self.f0,
                    he,
                    &mut self.y1,
                    &mut self.f1,
                    rtol,
                    atol,
                );
            }
            if let Some(tv) = time {
                self.y1[tv] = te;
            }
            t = te;
            std::mem::swap(&mut self.y, &mut self.y1);
            std::mem::swap(&mut self.f0, &mut self.f1);
            break if guard_first {
                let flipped = (0..n_flows).map(|i| {
                    if self.sig1[i] != self.sig0[i] {
                        self.sig1[i]
                    } else {
                        active[i]
                    }
                });
                new_active = Some(flipped.collect());
                Outcome::GuardSwitch
            } else {
                Outcome::HazardHit
            };
        };

        self.active = new_active.unwrap_or(active);
        s.values.copy_from_slice(&self.y[..n]);
        s.t = t;
        s.pin_clock();
        if with_hazard {
            self.hazard = self.y[n];
        }
        Ok(outcome)
    }

    /// Smallest fraction of the step `[t, t + h]` at which `hit` holds on the
    /// interpolant, to within `tol` in time. `hit` is assumed false at 0 and
    /// true at 1.
    fn locate(&mut self, h: f64, tol: f64, mut hit: impl FnMut(&[f64]) -> bool) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while (hi - lo) * h > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            hermite(mid, h, &self.y, &self.f0, &self.y1, &self.f1, &mut self.tmp);
            if hit(&self.tmp) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

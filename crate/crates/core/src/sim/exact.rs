use super::config::SimConfig;
use super::prepared::Prepared;
use super::state::{failed, Abort, Candidates, RunState};
use super::trajectory::{Status, Trajectory};
use crate::tdsha::Tdsha;

/// Exact event-driven simulation of an automaton without flows (other
/// than the clock's, which is replaced by the engine clock).
///
/// Each round fires enabled instantaneous transitions to quiescence, then
/// races an exponential clock with total rate Λ against the earliest
/// scheduled clock event. The exponential draw is kept as a residual
/// hazard across clock events, so waiting times remain exact when Λ
/// changes at an instantaneous firing.
pub fn simulate_exact(t: &Tdsha, c: &SimConfig) -> Trajectory {
    if let Err(e) = c.validate() {
        return failed(t, e.to_string());
    }
    let p = Prepared::new(t);
    if let Some(f) = p.mode_flows.iter().flatten().next() {
        return failed(
            t,
            format!(
                "exact simulation needs a flow-free automaton; `{}` flows",
                f.label
            ),
        );
    }
    run_exact(&p, c)
}

pub(crate) fn run_exact(p: &Prepared<'_>, c: &SimConfig) -> Trajectory {
    let mut s = RunState::new(p, c);
    let status = match exact_loop(&mut s) {
        Ok(st) => st,
        Err(Abort(msg)) => Status::Error(msg),
    };
    s.finish(status)
}

fn exact_loop(s: &mut RunState<'_, '_>) -> Result<Status, Abort> {
    let p = s.p;
    let t_end = s.cfg.t_end;
    s.recompute_rates()?;
    s.rebuild_queue();
    s.quiescence(Candidates::All, false)?;
    let mut hazard = s.exp1();
    loop {
        let total = s.total_rate();
        let t_jump = if total > 0.0 {
            s.t + hazard / total
        } else {
            f64::INFINITY
        };
        let t_clock = s.queue.peek().map_or(f64::INFINITY, |(k, _)| k);
        if t_jump.is_infinite() && t_clock.is_infinite() {
            return Ok(Status::Absorbed);
        }
        if t_jump.min(t_clock) > t_end {
            return Ok(Status::Completed);
        }
        if t_clock <= t_jump {
            s.emit_grid_before(t_clock);
            hazard = (hazard - total * (t_clock - s.t)).max(0.0);
            s.t = t_clock;
            s.pin_clock();
            let due = s.queue.pop_due(t_clock);
            s.quiescence(Candidates::Some(&due), false)?;
            continue;
        }

        s.emit_grid_before(t_jump);
        s.t = t_jump;
        let Some(k) = s.select(total) else {
            return Err(Abort(
                "no transition selected with positive total rate".into(),
            ));
        };
        let mode_changed = s.apply_stochastic(k, false)?;
        if mode_changed {
            s.recompute_rates()?;
            s.rebuild_queue();
            s.quiescence(Candidates::All, false)?;
        } else {
            for &j in &p.st_rate_deps[k] {
                s.rates[j] = s.eval_rate(j)?;
            }
            for &i in &p.st_queue_deps[k] {
                s.reschedule(i);
            }
            if !p.st_inst_deps[k].is_empty() {
                s.quiescence(Candidates::Some(&p.st_inst_deps[k]), false)?;
            }
        }
        hazard = s.exp1();
    }
}

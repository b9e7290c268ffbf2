//! Simulation engines over compiled automata: an exact event-driven engine
//! for flow-free automata and a piecewise-deterministic engine for the
//! rest, sharing recording, event queue and random stream conventions.
//!
//! Every run draws from its own ChaCha8 stream selected by
//! `(seed, replicate)`. Per stochastic jump the draws are: exponential
//! threshold, selection uniform, then reset draws in atom order. A
//! selection uniform among simultaneously enabled instantaneous
//! transitions is drawn only when more than one is enabled.

mod config;
mod csv;
mod dopri;
mod exact;
mod hybrid;
mod prepared;
mod queue;
mod run;
mod state;
mod trajectory;

pub use config::{ConfigError, EventLogging, Recording, SimConfig};
pub use csv::{csv_field, stream_columns, write_events_csv, write_trajectory_csv};
pub use exact::simulate_exact;
pub use hybrid::{simulate_hybrid, simulate_ode};
pub use queue::PendingEventQueue;
pub use run::{run, Engine, RunError, Simulator};
pub use trajectory::{Event, EventKind, Status, Trajectory};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::tdsha::KappaSpec;

    fn sim(src: &str, kappa: &str) -> Simulator {
        let p = parse_program(src).unwrap();
        Simulator::with_kappa(&p, &kappa.parse::<KappaSpec>().unwrap()).unwrap()
    }

    const DEATH: &str = "
        vars { int Z = 1000; }
        die :- [Z > 0 -> Z' = Z - 1]{Z / 62.5}.die;
        network die;
    ";

    #[test]
    fn absorbed_at_start() {
        let s = sim(
            "vars { int X = 0; } d :- [X > 0 -> X' = X - 1]{X}.d; network d;",
            "all-discrete",
        );
        assert_eq!(s.engine, Engine::Exact);
        let t = s.simulate(&SimConfig::new(10.0, 1));
        assert_eq!(t.status, Status::Absorbed);
        assert_eq!(t.len(), 1);
        assert_eq!(t.row(0), &[0.0, 1.0]);
    }

    #[test]
    fn absorbed_run_fills_grid() {
        let s = sim(
            "vars { int X = 3; } d :- [X > 0 -> X' = X - 1]{X}.d; network d;",
            "all-discrete",
        );
        let t = s.simulate(&SimConfig::new(100.0, 4).with_grid(10.0));
        assert_eq!(t.status, Status::Absorbed);
        assert_eq!(t.len(), 11);
        assert_eq!(t.row(10)[0], 0.0);
        assert!(t.first_zero[0].unwrap() < 100.0);
    }

    #[test]
    fn pure_death_mean() {
        let s = sim(DEATH, "all-discrete");
        let n = 400;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for r in 0..n {
            let c = SimConfig::new(62.5, 11).with_grid(62.5).with_replicate(r);
            let t = s.simulate(&c);
            assert_eq!(t.status, Status::Completed);
            let z = t.row(1)[0];
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        let expected = 1000.0 / std::f64::consts::E;
        assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn identical_seeds_identical_runs() {
        let s = sim(DEATH, "all-discrete");
        let c = SimConfig::new(30.0, 5).with_log(EventLogging::All);
        assert_eq!(s.simulate(&c), s.simulate(&c));
        assert_ne!(s.simulate(&c), s.simulate(&c.clone().with_replicate(1)));
    }

    #[test]
    fn every_jump_records_each_event() {
        let s = sim(DEATH, "all-discrete");
        let t = s.simulate(&SimConfig::new(5.0, 2).with_log(EventLogging::All));
        assert_eq!(t.len() as u64, t.stochastic_jumps + 2);
        assert_eq!(*t.times.last().unwrap(), 5.0);
        assert!(t.times.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(t.events.len() as u64, t.stochastic_jumps);
        assert_eq!(t.final_values[0], t.row(t.len() - 1)[0]);
    }

    const DELAY: &str = "
        vars { int A = 0; int B = 0; T = 0; }
        start :- [A = 0 -> A' = A + 1]{0.5}.0;
        arm :- [A > 0 -> T' = Time + 5]{inf}.wait;
        wait :- [Time = T -> B' = B + 1]{inf}.0;
        network start || arm;
    ";

    fn check_delay(t: &Trajectory) {
        assert!(t.is_ok(), "{:?}", t.status);
        let inst: Vec<&Event> = t
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Instantaneous)
            .collect();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst[1].time, inst[0].time + 5.0);
        assert_eq!(t.event_label(inst[1]), "wait.0");
        let b = t.var_index("B").unwrap();
        assert_eq!(t.final_values[b], 1.0);
    }

    #[test]
    fn delayed_event_fires_after_delay() {
        let s = sim(DELAY, "all-discrete");
        assert_eq!(s.engine, Engine::Exact);
        for r in 0..20 {
            check_delay(&s.simulate(&SimConfig::new(100.0, 3).with_replicate(r)));
        }
        let h = sim(DELAY, "all-continuous");
        assert_eq!(h.engine, Engine::Hybrid);
        let t = h.simulate(&SimConfig::new(100.0, 3));
        // A flows continuously from 0 so the trigger fires at once
        check_delay(&t);
        assert!(t.events[0].time < 1e-6);
    }

    #[test]
    fn periodic_clock_events() {
        let src = "
            vars { int C = 0; W = 28; }
            tick :- [Time = W -> W' = W + 28, C' = C + 1]{inf}.tick;
            noise :- [true -> ]{3}.noise;
            network tick || noise;
        ";
        for kappa in ["all-discrete", "all-continuous"] {
            let t = sim(src, kappa).simulate(&SimConfig::new(200.0, 9).with_grid(1.0));
            assert!(t.is_ok());
            assert_eq!(t.events.len(), 7);
            for (k, e) in t.events.iter().enumerate() {
                assert_eq!(e.time, 28.0 * (k + 1) as f64);
            }
            let c = t.var_index("C").unwrap();
            assert_eq!(t.value_at(c, 27.9), Some(0.0));
            assert_eq!(t.value_at(c, 28.0), Some(1.0));
        }
    }

    #[test]
    fn instantaneous_cycle_is_an_error() {
        let s = sim(
            "vars { X = 0; } a :- [true -> X' = X + 1]{inf}.a; network a;",
            "all-discrete",
        );
        let mut c = SimConfig::new(1.0, 0);
        c.max_instantaneous_chain = 1000;
        c.log = EventLogging::None;
        c.record = Recording::Grid(1.0);
        match s.simulate(&c).status {
            Status::Error(m) => assert!(m.contains("instantaneous cycle"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indicators_are_exclusive() {
        let src = "
            vars { int X = 5; }
            a :- [X > 0 -> X' = X - 1]{1}.b + [true -> X' = X + 1]{1}.a;
            b :- [true -> ]{2}.a + [true -> ]{0.5}.c;
            c :- [true -> ]{1}.a;
            network a;
        ";
        let s = sim(src, "all-discrete");
        let t = s.simulate(&SimConfig::new(20.0, 8));
        let ind: Vec<usize> = (0..t.n_vars())
            .filter(|&i| t.names[i].starts_with("P["))
            .collect();
        assert_eq!(ind.len(), 3);
        for i in 0..t.len() {
            let row = t.row(i);
            let sum: f64 = ind.iter().map(|&k| row[k]).sum();
            assert_eq!(sum, 1.0);
            assert!(ind.iter().all(|&k| row[k] == 0.0 || row[k] == 1.0));
        }
    }

    #[test]
    fn linear_flow_matches_closed_form() {
        let src = "
            vars { X = 1; }
            decay :- [true -> X' = X - 1]{0.3 * X}.decay;
            network decay;
        ";
        let s = sim(src, "all-continuous");
        let t = s.simulate(&SimConfig::new(10.0, 0).with_grid(1.0));
        assert!(t.is_ok());
        for i in 0..t.len() {
            let exact = (-0.3 * t.times[i]).exp();
            assert!(
                (t.row(i)[0] - exact).abs() < 1e-6,
                "{} {}",
                t.times[i],
                t.row(i)[0]
            );
        }
    }

    #[test]
    fn flow_guard_switch_is_located() {
        // X falls linearly and stops at 0
        let src = "
            vars { X = 1; }
            drain :- [X > 0 -> X' = X - 1]{0.5}.drain;
            network drain;
        ";
        let s = sim(src, "all-continuous");
        let t = s.simulate(&SimConfig::new(5.0, 0).with_grid(0.5));
        assert!(t.is_ok());
        assert!((t.row(2)[0] - 0.5).abs() < 1e-12);
        let x = t.row(t.len() - 1)[0];
        assert!(x.abs() < 1e-8, "{x}");
    }

    #[test]
    fn state_guard_triggers_instantaneous() {
        let src = "
            vars { X = 0; int F = 0; }
            rise :- [true -> X' = X + 1]{1}.rise;
            trip :- [X >= 2.5 -> F' = 1]{inf}.0;
            network rise || trip;
        ";
        let s = sim(src, "all-continuous");
        let t = s.simulate(&SimConfig::new(5.0, 0));
        assert!(t.is_ok());
        assert_eq!(t.events.len(), 1);
        assert!((t.events[0].time - 2.5).abs() < 1e-8);
    }

    #[test]
    fn hybrid_jump_with_growing_hazard() {
        // C = t; first jump has hazard 1 + 2t
        let src = "
            vars { C = 0; int F = 0; }
            clock :- [true -> C' = C + 1]{1}.clock;
            fire :- [F = 0 -> F' = F + 1]{1 + 2 * C}.0;
            network clock || fire;
        ";
        let s = sim(src, "all-continuous,fire.0=d");
        assert_eq!(s.engine, Engine::Hybrid);
        let n = 400;
        let mut mean = 0.0;
        for r in 0..n {
            let t = s.simulate(
                &SimConfig::new(10.0, 21)
                    .with_replicate(r)
                    .with_log(EventLogging::All),
            );
            assert_eq!(t.events.len(), 1);
            mean += t.events[0].time / n as f64;
        }
        // E[T] = integral of exp(-t - t^2)
        let mut expected = 0.0;
        let dt = 1e-4;
        for i in 0..100_000 {
            let t = (i as f64 + 0.5) * dt;
            expected += (-t - t * t).exp() * dt;
        }
        assert!((mean - expected).abs() < 0.04, "{mean} vs {expected}");
    }
}

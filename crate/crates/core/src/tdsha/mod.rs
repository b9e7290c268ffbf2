//! Transition-driven stochastic hybrid automata: data model, compilation
//! from transition systems under a partition vector, asynchronous product,
//! clock automaton and drift fields.

mod compile;
mod kappa;
mod model;
mod product;

pub use compile::{compile_component, CompileError};
pub use kappa::{forced_discrete, KappaError, KappaSpec, PartitionVector};
pub use model::{
    drift_field, ContinuousTransition, DriftField, InstantaneousTransition, Mode, ModeIndex,
    StochasticTransition, Tdsha,
};
pub use product::{compile_program, product, time_monitor};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::ir::Expr;
    use crate::rts::extend_program;

    const CHAIN: &str = "
        vars { int X = 10; W = 28; }
        a :- [X > 0 -> X' = X - 1]{2}.b + [true -> X' = X + 1]{1}.a;
        b :- [true -> ]{3}.a + [X > 3 -> ]{1}.c;
        c :- [true -> W' = W + 1]{inf}.a;
        check :- [Time = W -> W' = W + 28]{inf}.check;
        network a || check;
    ";

    fn ext() -> crate::rts::Extended {
        extend_program(&parse_program(CHAIN).unwrap()).unwrap()
    }

    #[test]
    fn all_discrete_modes_are_states() {
        let x = ext();
        let pv = PartitionVector::all_discrete(&x.components);
        let t = compile_component(&x, 0, &pv.continuous[0]).unwrap();
        assert_eq!(t.modes.len(), 3);
        assert_eq!(t.stochastic.len(), 4);
        assert_eq!(t.instantaneous.len(), 1);
        assert!(t.continuous.is_empty());
        // a -> b leaves a (singleton class): indicator moves
        let r = &t.stochastic[0].reset;
        assert_eq!(r.len(), 3);
        // self loop in a singleton mode leaves indicators alone
        assert_eq!(t.stochastic[1].reset.len(), 1);
    }

    #[test]
    fn continuous_edges_merge_states() {
        let x = ext();
        let pv = KappaSpec::parse("all-continuous,b.1=d")
            .unwrap()
            .resolve(&x.components)
            .unwrap();
        let t = compile_component(&x, 0, &pv.continuous[0]).unwrap();
        // a, b merge; c is reached by a discrete edge and left instantaneously
        assert_eq!(t.modes.len(), 2);
        assert_eq!(t.modes[0].name(), "a");
        assert_eq!(t.continuous.len(), 3);
        assert_eq!(t.stochastic.len(), 1);
        assert_eq!(t.instantaneous.len(), 1);
        assert_eq!((t.instantaneous[0].from, t.instantaneous[0].to), (1, 0));
        // the a -> b flow is weighted by P[a:a]
        let pa = x.indicators[0][0];
        let f = &t.continuous[0];
        assert_eq!(f.rate, Expr::mul(Expr::Const(2.0), Expr::Var(pa)));
        assert!(f.stoich.contains(&(pa, -1.0)));
    }

    #[test]
    fn forced_discrete_edges_rejected() {
        let x = ext();
        let err = KappaSpec::parse("c.0=c")
            .unwrap()
            .resolve(&x.components)
            .unwrap_err();
        assert_eq!(err, KappaError::ForcedDiscrete("c.0".into()));
        let mut pv = PartitionVector::all_discrete(&x.components);
        pv.continuous[0][4] = true;
        assert!(matches!(
            compile_component(&x, 0, &pv.continuous[0]),
            Err(CompileError::ForcedDiscrete(_))
        ));
    }

    #[test]
    fn product_counts_and_init() {
        let x = ext();
        let pv = PartitionVector::all_discrete(&x.components);
        let t = compile_program(&x, &pv).unwrap();
        assert_eq!(t.modes.len(), 3);
        assert_eq!(t.modes[1].parts, vec!["b", "check"]);
        let with_clock = product(&t, &time_monitor()).unwrap();
        assert_eq!(with_clock.modes.len(), 3);
        assert_eq!(with_clock.variables.len(), t.variables.len());
        let d = drift_field(&with_clock, 0).eval(&with_clock.initial_values());
        let time = with_clock.var_id("Time").unwrap();
        assert_eq!(d[time.index()], 1.0);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn clock_product_with_itself_rejected() {
        assert_eq!(
            product(&time_monitor(), &time_monitor()),
            Err(CompileError::DuplicateClock("Time".into()))
        );
    }

    #[test]
    fn monitor_drift_is_one() {
        let m = time_monitor();
        assert_eq!(drift_field(&m, 0).eval(&[0.0]), vec![1.0]);
    }
}

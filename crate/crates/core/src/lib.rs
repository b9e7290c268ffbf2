//! Stochastic concurrent constraint programs: model language, translation
//! to hybrid automata and simulation engines.

pub mod dsl;
pub mod ensemble;
pub mod ir;
pub mod prostate;
pub mod rts;
pub mod sim;
pub mod tdsha;

//! Engineered dissipative reservoirs for GHZ stabilization: Lindblad
//! assembly, steady states, classical Markov reductions and rate tuning.

pub mod catalog;
pub mod error;
pub mod exec;
pub mod markov;
pub mod solver;
pub mod tensor;
pub mod tuner;

pub use error::{Error, Result};
pub use exec::Execution;

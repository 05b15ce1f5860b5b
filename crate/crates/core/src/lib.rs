//! Exact strong-to-weak symmetry breaking diagnostics on few-qubit density
//! matrices, plus a Monte Carlo simulator for the random-bond Ising model on
//! the Nishimori line.
//!
//! Qubit `k` is bit `k` of a basis index (site 0 is least significant).

pub mod error;
pub mod channels;
pub mod correlators;
pub mod diagnostics;
pub mod exec;
pub mod lattice;
pub mod models;
pub mod operator;
pub mod rbim;
pub mod rng;
pub mod states;

pub use error::{Error, Result};

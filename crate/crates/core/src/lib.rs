//! Steady-state entanglement of two dissipative qubits driven by a
//! pair-creation coupling: models, solvers, closed forms and circuit mappings.

pub mod analytic;
pub mod blochvec;
pub mod circuits;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod measures;
pub mod model;
pub mod quantum;

pub use error::{Error, Result};
pub use model::{ModelSpec, PhaseSpec};
pub use quantum::{DensityMatrix, C64};

//! Discrete Dirichlet problems, Green functions and harmonic continuation
//! into a layer.

mod continuation;
mod green;
mod solver;

pub use continuation::{harmonic_layer_continuation, LayerContinuation};
pub use green::{asymptotic_slope, green_function, green_min_constant, GreenField, GreenMeta};
pub use solver::{solve_dirichlet, SolveStats, SolverParams};

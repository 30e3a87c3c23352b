//! Grid-based potential theory: subharmonic fields on masked lattices,
//! discrete Green functions, certified gluing constructions and capacity
//! estimates.
//!
//! Every gluing construction returns its glued field together with a list of
//! [`VerificationReport`]s: hypotheses checked on the grid, intermediate
//! stages, and the conclusions certified on the output.

pub mod capacity;
pub mod error;
pub mod field;
pub mod geometry;
pub mod gluing;
pub mod harmonic;
pub mod kernels;

pub use error::{Error, Result};
pub use field::{CheckKind, ScalarField, Tolerance, VerificationReport};
pub use geometry::{GridDomain, Lattice, NodeSet, Point};
pub use gluing::{GlueConstants, GlueResult, ToleranceOverride};
pub use harmonic::SolverParams;
pub use kernels::ExtReal;

//! Batch front end for the `subglue` toolkit: scene files, command dispatch,
//! JSON run reports and PGM renders.

pub mod config;
pub mod expr;
pub mod render;
pub mod run;

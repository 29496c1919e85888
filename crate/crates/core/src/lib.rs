//! Complexity-based wavefunction branch decompositions on small qubit chains.
//!
//! * [`lattice`]: states, gates, circuits, observables, decompositions.
//! * [`complexity`]: exact and heuristic gate-count complexity.
//! * [`tm`]: the distinguish/interfere branch criterion.
//! * [`weingarten`]: the complexity-plus-entropy functional and its minimization.
//! * [`dynamics`]: Trotterized evolution, branch trees, and complexity growth.
//! * [`sampling`]: Born-rule branch sampling and effective-collapse reports.

pub mod complexity;
pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod family;
pub mod lattice;
pub mod sampling;
pub mod tm;
pub mod weingarten;

pub use error::{Error, Result};

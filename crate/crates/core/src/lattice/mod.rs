//! Pure states, gates, circuits, observables, and orthogonal decompositions
//! on a 1D open qubit chain.

pub mod circuit;
pub mod decomposition;
pub mod gates;
pub mod io;
pub mod observable;
pub mod state;

pub use circuit::{all_moves, apply_circuit, Circuit, GateOp, Move};
pub use decomposition::{
    make_decomposition, make_decomposition_with_floor, BranchExpectation, Decomposition, ProjectorSpec,
    DEFAULT_NORM_FLOOR,
};
pub use gates::{Arity, GateDef, GateSet};
pub use observable::{expectation, Observable, Pauli, PauliString};
pub use state::{inner_product, LatticeSpec, StateVector, C64, DEFAULT_MAX_SITES};

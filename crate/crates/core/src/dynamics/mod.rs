//! Time evolution, branch trees, and complexity growth.

pub mod hamiltonian;
pub mod probe;
pub mod tree;

pub use hamiltonian::{trotter_evolve, Apparatus, Direction, HamiltonianSpec, Propagator};
pub use probe::{complexity_growth_probe, random_walk, GateRule, GrowthPoint, GrowthSeries, ProbeEvolution};
pub use tree::{
    track_branches, verify_tree, BranchTree, Schedule, Segment, Splitter, TreeVerification, ViolationKind,
    DEFAULT_THETA,
};

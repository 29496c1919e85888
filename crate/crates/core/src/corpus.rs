//! Named test states and reproducible random ones.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{all_moves, apply_circuit, io::read_state, Circuit, GateSet, LatticeSpec, StateVector, C64};

pub const NAMED_STATES: &[&str] = &["zero", "ones", "plus", "ghz", "ghz_pairs", "apparatus"];

/// How a scenario's initial state is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum StateSpec {
    Named {
        name: String,
    },
    /// `depth` uniformly random gates applied to `|0...0>`.
    RandomCircuit {
        depth: usize,
        seed: u64,
    },
    /// Haar-random state.
    Haar {
        seed: u64,
    },
    /// An explicit circuit applied to `|0...0>`.
    Circuit {
        circuit: Circuit,
    },
    /// A JSON state file.
    File {
        path: PathBuf,
    },
}

impl StateSpec {
    pub fn named(name: &str) -> Self {
        StateSpec::Named { name: name.into() }
    }

    pub fn build(&self, lattice: LatticeSpec, gate_set: &GateSet) -> Result<StateVector> {
        match self {
            StateSpec::Named { name } => named_state(name, lattice),
            StateSpec::RandomCircuit { depth, seed } => {
                let c = random_circuit(lattice, gate_set, *depth, *seed);
                apply_circuit(&StateVector::zero(lattice), &c, gate_set)?.normalized()
            }
            StateSpec::Haar { seed } => Ok(haar_state(lattice, *seed)),
            StateSpec::Circuit { circuit } => {
                apply_circuit(&StateVector::zero(lattice), circuit, gate_set)?.normalized()
            }
            StateSpec::File { path } => {
                let (s, _) = read_state(path)?;
                if s.n_sites() != lattice.n_sites() {
                    return Err(Error::DimensionMismatch {
                        expected: lattice.dim(),
                        found: s.dim(),
                    });
                }
                s.require_normalized()?;
                Ok(s)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::Named { name } => name.clone(),
            StateSpec::RandomCircuit { depth, seed } => format!("random_circuit(depth={depth}, seed={seed})"),
            StateSpec::Haar { seed } => format!("haar(seed={seed})"),
            StateSpec::Circuit { circuit } => format!("circuit[{circuit}]"),
            StateSpec::File { path } => path.display().to_string(),
        }
    }
}

/// `ghz_pairs` is GHZ_2 on each adjacent pair (even `n`); `apparatus` is
/// `|+>` on site 0 with the rest in `|0>`.
pub fn named_state(name: &str, lattice: LatticeSpec) -> Result<StateVector> {
    let n = lattice.n_sites();
    match name {
        "zero" => Ok(StateVector::zero(lattice)),
        "ones" => Ok(StateVector::all_ones(lattice)),
        "plus" => Ok(StateVector::plus_product(lattice)),
        "ghz" => Ok(StateVector::ghz(lattice)),
        "ghz_pairs" => {
            if !n.is_multiple_of(2) {
                return Err(Error::Invalid(format!("ghz_pairs needs an even site count, got {n}")));
            }
            let pair = StateVector::ghz(LatticeSpec::new(2)?);
            let mut s = pair.clone();
            for _ in 1..n / 2 {
                s = s.tensor(&pair)?;
            }
            Ok(s)
        }
        "apparatus" => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut sites = vec![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]; n];
            sites[0] = [C64::new(h, 0.0), C64::new(h, 0.0)];
            StateVector::product(&sites)
        }
        other => Err(Error::Invalid(format!(
            "unknown named state `{other}` (known: {})",
            NAMED_STATES.join(", ")
        ))),
    }
}

/// `depth` gates drawn uniformly from all placements of the gate set.
pub fn random_circuit(lattice: LatticeSpec, gate_set: &GateSet, depth: usize, seed: u64) -> Circuit {
    let moves = all_moves(gate_set, &lattice);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Circuit::new(
        (0..depth)
            .map(|_| moves[rng.gen_range(0..moves.len())].to_op(gate_set))
            .collect(),
    )
}

/// Normalized complex Gaussian vector.
pub fn haar_state(lattice: LatticeSpec, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<C64> = (0..lattice.dim())
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_amplitudes(lattice, amps)
        .and_then(|s| s.normalized())
        .expect("a Gaussian vector is nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states_are_normalized() {
        let l = LatticeSpec::new(4).unwrap();
        for name in NAMED_STATES {
            assert!(named_state(name, l).unwrap().is_normalized(), "{name}");
        }
        assert!(named_state("ghz_pairs", LatticeSpec::new(3).unwrap()).is_err());
        assert!(named_state("nope", l).is_err());
    }

    #[test]
    fn ghz_pairs_layout() {
        let s = named_state("ghz_pairs", LatticeSpec::new(4).unwrap()).unwrap();
        for x in [0b0000, 0b0011, 0b1100, 0b1111] {
            assert!((s.amplitudes()[x].norm_sqr() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn random_states_are_reproducible() {
        let l = LatticeSpec::new(3).unwrap();
        let set = GateSet::default();
        let a = StateSpec::RandomCircuit { depth: 20, seed: 4 }.build(l, &set).unwrap();
        let b = StateSpec::RandomCircuit { depth: 20, seed: 4 }.build(l, &set).unwrap();
        assert_eq!(a, b);
        assert_eq!(haar_state(l, 1), haar_state(l, 1));
        assert_ne!(haar_state(l, 1), haar_state(l, 2));
    }
}

//! Complexity of `psi(t)` relative to `psi(0)` along an evolution.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{Direction, HamiltonianSpec, Propagator};
use crate::complexity::bfs::frame_key;
use crate::complexity::{ComplexityOracle, ComplexityResult, SearchMode};
use crate::error::{Error, Result};
use crate::lattice::{all_moves, Circuit, GateSet, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateRule {
    /// Every step draws uniformly from all placed gates.
    Uniform,
    /// Draws uniformly among gates leading to a state not yet visited on
    /// this walk, which excludes gates acting trivially or undoing a step.
    #[default]
    NonBacktracking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ProbeEvolution {
    Hamiltonian {
        hamiltonian: HamiltonianSpec,
    },
    /// One random gate from the oracle's gate set per step.
    RandomCircuit {
        seed: u64,
        #[serde(default)]
        rule: GateRule,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub step: usize,
    pub time: f64,
    pub result: ComplexityResult,
    /// Certified lower bound: the exact value or the exhausted cutoff.
    pub lower_bound: u32,
    /// Best witnessed upper bound, if any.
    pub upper_bound: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub points: Vec<GrowthPoint>,
    pub lower_bounds_nondecreasing: bool,
    /// The applied gates, for random-circuit runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub circuit: Option<Circuit>,
}

/// Draws a random circuit of `steps` gates starting from `psi0`.
pub fn random_walk(psi0: &StateVector, gate_set: &GateSet, steps: usize, seed: u64, rule: GateRule) -> Circuit {
    let lattice = psi0.lattice();
    let moves = all_moves(gate_set, &lattice);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = psi0.amplitudes().to_vec();
    let mut seen: HashSet<u64> = HashSet::from([frame_key(&amps)]);
    let mut circuit = Circuit::empty();
    for _ in 0..steps {
        let pick = match rule {
            GateRule::Uniform => rng.gen_range(0..moves.len()),
            GateRule::NonBacktracking => {
                let fresh: Vec<usize> = (0..moves.len())
                    .filter(|&k| {
                        let mut img = amps.clone();
                        moves[k].apply(gate_set, &mut img);
                        !seen.contains(&frame_key(&img))
                    })
                    .collect();
                if fresh.is_empty() {
                    rng.gen_range(0..moves.len())
                } else {
                    fresh[rng.gen_range(0..fresh.len())]
                }
            }
        };
        moves[pick].apply(gate_set, &mut amps);
        seen.insert(frame_key(&amps));
        circuit.push(moves[pick].to_op(gate_set));
    }
    circuit
}

/// Complexity at steps `0, stride, 2 stride, ..., <= horizon`.
///
/// Exact mode reports exact values or exhausted cutoffs; random-circuit runs
/// add the applied prefix as a witness, so their exact search only needs to
/// rule out cheaper circuits. Heuristic mode adds a beam-search upper bound.
#[allow(clippy::too_many_arguments)]
pub fn complexity_growth_probe(
    oracle: &ComplexityOracle,
    psi0: &StateVector,
    evolution: &ProbeEvolution,
    horizon: usize,
    stride: usize,
    mode: SearchMode,
    budget: u32,
    delta: f64,
) -> Result<GrowthSeries> {
    if stride == 0 {
        return Err(Error::Invalid("stride must be positive".into()));
    }
    psi0.require_normalized()?;
    let lattice = psi0.lattice();
    let sample_steps: Vec<usize> = (0..=horizon).step_by(stride).collect();
    let (states, times, circuit): (Vec<StateVector>, Vec<f64>, Option<Circuit>) = match evolution {
        ProbeEvolution::Hamiltonian { hamiltonian } => {
            let prop = Propagator::new(hamiltonian, &lattice)?;
            let mut amps = psi0.amplitudes().to_vec();
            let mut at = 0;
            let mut states = Vec::new();
            for &s in &sample_steps {
                prop.evolve(&mut amps, s - at, Direction::Forward);
                at = s;
                states.push(StateVector::from_amplitudes(lattice, amps.clone())?.normalized()?);
            }
            let times = sample_steps.iter().map(|&s| s as f64 * hamiltonian.dt).collect();
            (states, times, None)
        }
        ProbeEvolution::RandomCircuit { seed, rule } => {
            let c = random_walk(psi0, &oracle.gate_set, horizon, *seed, *rule);
            let states = sample_steps
                .iter()
                .map(|&s| {
                    let prefix = Circuit::new(c.ops[..s].to_vec());
                    crate::lattice::apply_circuit(psi0, &prefix, &oracle.gate_set)?.normalized()
                })
                .collect::<Result<Vec<_>>>()?;
            let times = sample_steps.iter().map(|&s| s as f64).collect();
            (states, times, Some(c))
        }
    };

    let points = sample_steps
        .par_iter()
        .zip(states.par_iter())
        .zip(times.par_iter())
        .map(|((&step, psi), &time)| {
            let prefix_cost = match &circuit {
                Some(c) => Some(Circuit::new(c.ops[..step].to_vec()).cost(&oracle.gate_set)?),
                None => None,
            };
            // A witness of cost `prefix_cost` exists, so searching beyond it is wasted.
            let exact_budget = prefix_cost.map_or(budget, |p| budget.min(p));
            let result = oracle.state_complexity(psi0, psi, delta, SearchMode::ExactBfs, exact_budget)?;
            let lower_bound = result.value;
            let mut upper_bound = result.bounds_above().then_some(result.value);
            if let Some(p) = prefix_cost {
                upper_bound = Some(upper_bound.map_or(p, |u| u.min(p)));
            }
            if mode == SearchMode::HeuristicLayers && !result.is_exact() {
                let h = oracle.state_complexity(psi0, psi, delta, SearchMode::HeuristicLayers, budget.max(40))?;
                if h.bounds_above() {
                    upper_bound = Some(upper_bound.map_or(h.value, |u| u.min(h.value)));
                }
            }
            let result = match (result.is_exact(), upper_bound) {
                // The exhausted search ruled out everything below the prefix.
                (false, Some(u)) if u == lower_bound => ComplexityResult {
                    value: u,
                    status: crate::complexity::Status::Exact,
                    witness: circuit.as_ref().map(|c| Circuit::new(c.ops[..step].to_vec())),
                    ..result
                },
                _ => result,
            };
            Ok(GrowthPoint {
                step,
                time,
                lower_bound,
                upper_bound,
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lower_bounds_nondecreasing = points.windows(2).all(|w| w[1].lower_bound >= w[0].lower_bound);
    Ok(GrowthSeries {
        points,
        lower_bounds_nondecreasing,
        circuit,
    })
}

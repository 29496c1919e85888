use serde::{Deserialize, Serialize};

use super::gates::{Arity, GateSet};
use super::state::{LatticeSpec, StateVector, C64};
use crate::error::{Error, Result};

/// One gate application: `{"gate": "CNOT", "sites": [0, 1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GateOp {
    pub gate: String,
    pub sites: Vec<usize>,
}

impl GateOp {
    pub fn one(gate: &str, site: usize) -> Self {
        Self {
            gate: gate.into(),
            sites: vec![site],
        }
    }

    pub fn two(gate: &str, a: usize, b: usize) -> Self {
        Self {
            gate: gate.into(),
            sites: vec![a, b],
        }
    }
}

impl std::fmt::Display for GateOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sites: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        write!(f, "{}@{}", self.gate, sites.join(","))
    }
}

/// An ordered gate sequence; serializes as a bare JSON list of [`GateOp`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Circuit {
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(ops: Vec<GateOp>) -> Self {
        Self { ops }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    pub fn then(&self, other: &Circuit) -> Circuit {
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        Circuit { ops }
    }

    pub fn cost(&self, gate_set: &GateSet) -> Result<u32> {
        self.ops.iter().try_fold(0u32, |acc, op| {
            let g = gate_set
                .get(&op.gate)
                .ok_or_else(|| Error::UnknownGate(op.gate.clone()))?;
            Ok(acc + g.cost)
        })
    }

    /// Reversed sequence of inverse gates.
    pub fn inverse(&self, gate_set: &GateSet) -> Result<Circuit> {
        let ops = self
            .ops
            .iter()
            .rev()
            .map(|op| {
                let g = gate_set
                    .get(&op.gate)
                    .ok_or_else(|| Error::UnknownGate(op.gate.clone()))?;
                Ok(GateOp {
                    gate: g.inverse.clone(),
                    sites: op.sites.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { ops })
    }

    pub fn compile(&self, gate_set: &GateSet, lattice: &LatticeSpec) -> Result<Vec<Move>> {
        self.ops.iter().map(|op| Move::resolve(op, gate_set, lattice)).collect()
    }

    pub fn validate(&self, gate_set: &GateSet, lattice: &LatticeSpec) -> Result<()> {
        self.compile(gate_set, lattice).map(|_| ())
    }
}

impl std::fmt::Display for Circuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.ops.iter().map(|o| o.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A gate bound to concrete sites, resolved against a gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub gate: usize,
    pub a: usize,
    /// Second site for two-site gates; equal to `a` for one-site gates.
    pub b: usize,
}

impl Move {
    pub fn resolve(op: &GateOp, gate_set: &GateSet, lattice: &LatticeSpec) -> Result<Self> {
        let gate = gate_set.index_of(&op.gate)?;
        let def = &gate_set.gates[gate];
        let expected = def.arity.sites();
        if op.sites.len() != expected {
            return Err(Error::GateArity {
                gate: op.gate.clone(),
                expected,
                found: op.sites.len(),
            });
        }
        for &s in &op.sites {
            lattice.check_site(s)?;
        }
        match def.arity {
            Arity::One => Ok(Move {
                gate,
                a: op.sites[0],
                b: op.sites[0],
            }),
            Arity::Two => {
                let (a, b) = (op.sites[0], op.sites[1]);
                if a.abs_diff(b) != 1 {
                    return Err(Error::NotAdjacent { a, b });
                }
                Ok(Move { gate, a, b })
            }
        }
    }

    pub fn to_op(&self, gate_set: &GateSet) -> GateOp {
        let def = &gate_set.gates[self.gate];
        match def.arity {
            Arity::One => GateOp::one(&def.name, self.a),
            Arity::Two => GateOp::two(&def.name, self.a, self.b),
        }
    }

    pub fn apply(&self, gate_set: &GateSet, amps: &mut [C64]) {
        let def = &gate_set.gates[self.gate];
        match def.arity {
            Arity::One => apply_one_site(amps, self.a, &def.matrix),
            Arity::Two => apply_two_site(amps, self.a, self.b, &def.matrix),
        }
    }
}

/// Every placement of every gate on the chain, in gate-set order.
pub fn all_moves(gate_set: &GateSet, lattice: &LatticeSpec) -> Vec<Move> {
    let mut moves = Vec::new();
    for (gate, def) in gate_set.gates.iter().enumerate() {
        match def.arity {
            Arity::One => {
                for a in 0..lattice.n_sites() {
                    moves.push(Move { gate, a, b: a });
                }
            }
            Arity::Two => {
                for (a, b) in lattice.ordered_adjacent_pairs() {
                    moves.push(Move { gate, a, b });
                }
            }
        }
    }
    moves
}

/// Applies a row-major 2x2 matrix to `site`.
pub fn apply_one_site(amps: &mut [C64], site: usize, m: &[C64]) {
    let bit = 1usize << site;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (x, y) = (amps[i], amps[j]);
            amps[i] = m[0] * x + m[1] * y;
            amps[j] = m[2] * x + m[3] * y;
        }
    }
}

/// Applies a row-major 4x4 matrix to the ordered pair `(a, b)`, `a` high.
pub fn apply_two_site(amps: &mut [C64], a: usize, b: usize, m: &[C64]) {
    let (ba, bb) = (1usize << a, 1usize << b);
    for i in 0..amps.len() {
        if i & ba == 0 && i & bb == 0 {
            let idx = [i, i | bb, i | ba, i | ba | bb];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for r in 0..4 {
                amps[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
            }
        }
    }
}

/// Returns `U|state>` for the circuit's unitary `U`; the input is untouched.
pub fn apply_circuit(state: &StateVector, circuit: &Circuit, gate_set: &GateSet) -> Result<StateVector> {
    let moves = circuit.compile(gate_set, &state.lattice())?;
    let mut amps = state.amplitudes().to_vec();
    for mv in &moves {
        mv.apply(gate_set, &mut amps);
    }
    StateVector::from_amplitudes(state.lattice(), amps)
}

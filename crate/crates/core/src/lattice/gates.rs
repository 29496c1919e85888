//! Elementary gate sets over nearest-neighbour qubit chains.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use super::state::C64;
use crate::error::{Error, Result};

const UNITARY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    One,
    Two,
}

impl Arity {
    pub fn sites(self) -> usize {
        match self {
            Arity::One => 1,
            Arity::Two => 2,
        }
    }

    pub fn dim(self) -> usize {
        1 << self.sites()
    }
}

/// A named elementary gate.
///
/// Two-site matrices act on the ordered pair `(a, b)` in the basis
/// `|q_a q_b>` with `q_a` as the high bit, so `CNOT` on `[a, b]` is controlled
/// by `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDef {
    pub name: String,
    pub arity: Arity,
    /// Row-major matrix entries as `[re, im]`.
    #[serde(with = "complex_pairs")]
    pub matrix: Vec<C64>,
    pub cost: u32,
    /// Name of the gate in the same set implementing the adjoint.
    pub inverse: String,
}

/// A declared set of elementary gates with per-gate costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSet {
    pub name: String,
    pub gates: Vec<GateDef>,
}

impl GateSet {
    pub fn new(name: impl Into<String>, gates: Vec<GateDef>) -> Result<Self> {
        let set = Self {
            name: name.into(),
            gates,
        };
        set.validate()?;
        Ok(set)
    }

    /// `{H, T, T†, S, S†, X, Z, CNOT}` with unit costs.
    pub fn clifford_t() -> Self {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let t = C64::from_polar(1.0, FRAC_PI_4);
        let i = C64::new(0.0, 1.0);
        let one = |name: &str, m: [C64; 4], inv: &str| GateDef {
            name: name.into(),
            arity: Arity::One,
            matrix: m.to_vec(),
            cost: 1,
            inverse: inv.into(),
        };
        let cnot = GateDef {
            name: "CNOT".into(),
            arity: Arity::Two,
            matrix: vec![o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z],
            cost: 1,
            inverse: "CNOT".into(),
        };
        Self::new(
            "clifford+t",
            vec![
                one("H", [h, h, h, -h], "H"),
                one("T", [o, z, z, t], "Tdg"),
                one("Tdg", [o, z, z, t.conj()], "T"),
                one("S", [o, z, z, i], "Sdg"),
                one("Sdg", [o, z, z, -i], "S"),
                one("X", [z, o, o, z], "X"),
                one("Z", [o, z, z, -o], "Z"),
                cnot,
            ],
        )
        .expect("built-in gate set is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.gates.is_empty() {
            return Err(Error::InvalidGateSet("no gates".into()));
        }
        for (k, g) in self.gates.iter().enumerate() {
            if self.gates[..k].iter().any(|o| o.name == g.name) {
                return Err(Error::InvalidGateSet(format!("duplicate gate `{}`", g.name)));
            }
            let d = g.arity.dim();
            if g.matrix.len() != d * d {
                return Err(Error::InvalidGateSet(format!(
                    "gate `{}` needs {} entries, has {}",
                    g.name,
                    d * d,
                    g.matrix.len()
                )));
            }
            if g.cost == 0 {
                return Err(Error::InvalidGateSet(format!("gate `{}` has zero cost", g.name)));
            }
            let dev = unitarity_deviation(&g.matrix, d);
            if dev > UNITARY_TOLERANCE {
                return Err(Error::InvalidGateSet(format!(
                    "gate `{}` is not unitary (deviation {dev:e})",
                    g.name
                )));
            }
        }
        for g in &self.gates {
            let inv = self.get(&g.inverse).ok_or_else(|| {
                Error::InvalidGateSet(format!("inverse `{}` of `{}` is not in the set", g.inverse, g.name))
            })?;
            if inv.arity != g.arity || inv.cost != g.cost {
                return Err(Error::InvalidGateSet(format!(
                    "inverse `{}` of `{}` differs in arity or cost",
                    inv.name, g.name
                )));
            }
            let d = g.arity.dim();
            let mut dev: f64 = 0.0;
            for r in 0..d {
                for c in 0..d {
                    dev = dev.max((inv.matrix[r * d + c] - g.matrix[c * d + r].conj()).norm());
                }
            }
            if dev > UNITARY_TOLERANCE {
                return Err(Error::InvalidGateSet(format!(
                    "`{}` is not the adjoint of `{}` (deviation {dev:e})",
                    inv.name, g.name
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&GateDef> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.gates
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::UnknownGate(name.to_string()))
    }

    /// True when every gate costs the same.
    pub fn has_uniform_cost(&self) -> bool {
        self.gates.windows(2).all(|w| w[0].cost == w[1].cost)
    }

    pub fn min_cost(&self) -> u32 {
        self.gates.iter().map(|g| g.cost).min().unwrap_or(1)
    }
}

impl Default for GateSet {
    fn default() -> Self {
        Self::clifford_t()
    }
}

fn unitarity_deviation(m: &[C64], d: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += m[k * d + r].conj() * m[k * d + c];
            }
            let expect = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((acc - expect).norm());
        }
    }
    dev
}

pub(crate) mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_is_inverse_closed_and_unitary() {
        let set = GateSet::clifford_t();
        assert!(set.validate().is_ok());
        assert_eq!(set.gates.len(), 8);
        assert!(set.has_uniform_cost());
    }

    #[test]
    fn missing_inverse_rejected() {
        let mut set = GateSet::clifford_t();
        set.gates.retain(|g| g.name != "Tdg");
        assert!(matches!(set.validate(), Err(Error::InvalidGateSet(_))));
    }

    #[test]
    fn non_unitary_rejected() {
        let mut set = GateSet::clifford_t();
        set.gates[0].matrix[0] = C64::new(2.0, 0.0);
        assert!(set.validate().is_err());
    }

    #[test]
    fn gate_set_round_trips_through_json() {
        let set = GateSet::clifford_t();
        let json = serde_json::to_string(&set).unwrap();
        let back: GateSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
    }
}

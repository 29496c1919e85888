//! Query predicates evaluated on the images of a probe frame.
//!
//! A circuit `U` is scored only through `U` applied to a fixed list of probe
//! states (the frame). The images are stored back to back in one flat vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::state::{inner_slices, StateVector, C64};

/// Slack on threshold comparisons, absorbing floating-point rounding.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// Anything the circuit searches can target.
pub trait SearchPredicate: Sync {
    /// Probe states whose images determine the predicate.
    fn frame(&self) -> Vec<&StateVector>;

    /// Continuous figure of merit on the frame images.
    fn score(&self, images: &[C64]) -> f64;

    /// The predicate holds when `score >= threshold`.
    fn threshold(&self) -> f64;

    fn satisfied(&self, images: &[C64]) -> bool {
        self.score(images) >= self.threshold() - THRESHOLD_SLACK
    }
}

/// The three query kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Predicate {
    /// `|<target|U|source>| >= 1 - delta`
    StateMap {
        #[serde(with = "state_json")]
        source: StateVector,
        #[serde(with = "state_json")]
        target: StateVector,
        delta: f64,
    },
    /// `|<a|U|a> - <b|U|b>| / 2 >= 1 - epsilon`
    TmDistinguish {
        #[serde(with = "state_json")]
        a: StateVector,
        #[serde(with = "state_json")]
        b: StateVector,
        epsilon: f64,
    },
    /// `(|<a|U|b>| + |<b|U|a>|) / 2 >= epsilon`
    TmInterfere {
        #[serde(with = "state_json")]
        a: StateVector,
        #[serde(with = "state_json")]
        b: StateVector,
        epsilon: f64,
    },
}

impl Predicate {
    pub fn state_map(source: StateVector, target: StateVector, delta: f64) -> Result<Self> {
        let p = Predicate::StateMap { source, target, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn distinguish(a: StateVector, b: StateVector, epsilon: f64) -> Result<Self> {
        let p = Predicate::TmDistinguish { a, b, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn interfere(a: StateVector, b: StateVector, epsilon: f64) -> Result<Self> {
        let p = Predicate::TmInterfere { a, b, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Predicate::StateMap { .. } => "state_map",
            Predicate::TmDistinguish { .. } => "tm_distinguish",
            Predicate::TmInterfere { .. } => "tm_interfere",
        }
    }

    pub fn states(&self) -> (&StateVector, &StateVector) {
        match self {
            Predicate::StateMap { source, target, .. } => (source, target),
            Predicate::TmDistinguish { a, b, .. } | Predicate::TmInterfere { a, b, .. } => (a, b),
        }
    }

    /// Tolerance parameters must lie in (0, 1); states normalized and
    /// on the same chain.
    pub fn validate(&self) -> Result<()> {
        let (x, y) = self.states();
        x.require_normalized()?;
        y.require_normalized()?;
        x.check_same_lattice(y)?;
        let (name, value) = match self {
            Predicate::StateMap { delta, .. } => ("delta", *delta),
            Predicate::TmDistinguish { epsilon, .. } | Predicate::TmInterfere { epsilon, .. } => ("epsilon", *epsilon),
        };
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::Parameter {
                name,
                value,
                range: "(0, 1)",
            });
        }
        Ok(())
    }
}

impl SearchPredicate for Predicate {
    fn frame(&self) -> Vec<&StateVector> {
        match self {
            Predicate::StateMap { source, .. } => vec![source],
            Predicate::TmDistinguish { a, b, .. } | Predicate::TmInterfere { a, b, .. } => vec![a, b],
        }
    }

    fn score(&self, images: &[C64]) -> f64 {
        match self {
            Predicate::StateMap { target, .. } => inner_slices(target.amplitudes(), images).norm(),
            Predicate::TmDistinguish { a, b, .. } => {
                let d = a.dim();
                let ua = &images[..d];
                let ub = &images[d..];
                (inner_slices(a.amplitudes(), ua) - inner_slices(b.amplitudes(), ub)).norm() / 2.0
            }
            Predicate::TmInterfere { a, b, .. } => {
                let d = a.dim();
                let ua = &images[..d];
                let ub = &images[d..];
                (inner_slices(a.amplitudes(), ub).norm() + inner_slices(b.amplitudes(), ua).norm()) / 2.0
            }
        }
    }

    fn threshold(&self) -> f64 {
        match self {
            Predicate::StateMap { delta, .. } => 1.0 - delta,
            Predicate::TmDistinguish { epsilon, .. } => 1.0 - epsilon,
            Predicate::TmInterfere { epsilon, .. } => *epsilon,
        }
    }
}

/// Flat concatenation of the frame states.
pub fn frame_vector(pred: &dyn SearchPredicate) -> Vec<C64> {
    pred.frame()
        .iter()
        .flat_map(|s| s.amplitudes().iter().copied())
        .collect()
}

pub(crate) mod state_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::lattice::io::StateFile;
    use crate::lattice::state::StateVector;

    pub fn serialize<S: Serializer>(s: &StateVector, ser: S) -> Result<S::Ok, S::Error> {
        StateFile::from_state(s, "").serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<StateVector, D::Error> {
        StateFile::deserialize(d)?.to_state().map_err(serde::de::Error::custom)
    }
}

pub(crate) mod opt_state_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::lattice::io::StateFile;
    use crate::lattice::state::StateVector;

    pub fn serialize<S: Serializer>(s: &Option<StateVector>, ser: S) -> Result<S::Ok, S::Error> {
        s.as_ref().map(|s| StateFile::from_state(s, "")).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<StateVector>, D::Error> {
        Option::<StateFile>::deserialize(d)?
            .map(|f| f.to_state().map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::state::LatticeSpec;

    fn lat(n: usize) -> LatticeSpec {
        LatticeSpec::new(n).unwrap()
    }

    #[test]
    fn parameter_range_checked() {
        let z = StateVector::zero(lat(1));
        let o = StateVector::all_ones(lat(1));
        assert!(Predicate::interfere(z.clone(), o.clone(), 1.5).is_err());
        assert!(Predicate::interfere(z.clone(), o.clone(), 0.0).is_err());
        assert!(Predicate::state_map(z.clone(), o.clone(), 0.01).is_ok());
        let unnormalized = z.scaled(C64::new(2.0, 0.0));
        assert!(matches!(
            Predicate::state_map(unnormalized, o, 0.01),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn identity_scores() {
        let z = StateVector::zero(lat(2));
        let o = StateVector::all_ones(lat(2));
        let d = Predicate::distinguish(z.clone(), o.clone(), 0.1).unwrap();
        let i = Predicate::interfere(z.clone(), o.clone(), 0.1).unwrap();
        let frame = frame_vector(&d);
        assert_eq!(d.score(&frame), 0.0);
        assert_eq!(i.score(&frame), 0.0);
        assert!(!d.satisfied(&frame));
    }

    #[test]
    fn predicate_json_round_trip() {
        let p = Predicate::state_map(StateVector::zero(lat(1)), StateVector::all_ones(lat(1)), 0.01).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"kind\":\"state_map\""));
        let back: Predicate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}

//! JSON file formats for states and circuits.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gates::complex_pairs;
use super::state::{LatticeSpec, StateVector, C64};
use crate::error::{Error, Result};

/// `{"n_sites": 2, "amplitudes": [[re, im], ...], "label": "..."}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_sites: usize,
    #[serde(with = "complex_pairs")]
    pub amplitudes: Vec<C64>,
    #[serde(default)]
    pub label: String,
}

impl StateFile {
    pub fn from_state(state: &StateVector, label: impl Into<String>) -> Self {
        Self {
            n_sites: state.n_sites(),
            amplitudes: state.amplitudes().to_vec(),
            label: label.into(),
        }
    }

    pub fn to_state(&self) -> Result<StateVector> {
        StateVector::from_amplitudes(LatticeSpec::new(self.n_sites)?, self.amplitudes.clone())
    }
}

pub fn read_state(path: &Path) -> Result<(StateVector, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    Ok((file.to_state()?, file.label))
}

pub fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::circuit::GateOp;

    #[test]
    fn state_file_shape() {
        let ghz = StateVector::ghz(LatticeSpec::new(1).unwrap());
        let json = serde_json::to_value(StateFile::from_state(&ghz, "g")).unwrap();
        assert_eq!(json["n_sites"], 1);
        assert_eq!(json["amplitudes"].as_array().unwrap().len(), 2);
        assert_eq!(json["label"], "g");
    }

    #[test]
    fn wrong_length_rejected() {
        let f = StateFile {
            n_sites: 2,
            amplitudes: vec![C64::new(1.0, 0.0)],
            label: String::new(),
        };
        assert!(f.to_state().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"n_sites": 1, "amplitudes": [[1,0],[0,0]], "extra": 1}"#;
        assert!(serde_json::from_str::<StateFile>(text).is_err());
    }

    #[test]
    fn circuit_file_reads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"[{"gate":"H","sites":[0]},{"gate":"CNOT","sites":[0,1]}]"#).unwrap();
        let c = read_circuit(&p).unwrap();
        assert_eq!(c.ops, vec![GateOp::one("H", 0), GateOp::two("CNOT", 0, 1)]);
    }
}

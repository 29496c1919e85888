//! Orthogonal decompositions `psi = sum_i psi_i` with unnormalized components.

use serde::{Deserialize, Serialize};

use super::gates::complex_pairs;
use super::observable::{Observable, PauliString};
use super::state::{inner_slices, StateVector, C64};
use crate::error::{Error, Result};

/// Components with norm below this are dropped.
pub const DEFAULT_NORM_FLOOR: f64 = 1e-8;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// A projector, described by its action rather than its matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProjectorSpec {
    Identity,
    /// Computational-basis values on a subset of sites.
    SiteValues {
        sites: Vec<usize>,
        values: Vec<u8>,
    },
    /// Span of the listed computational basis states.
    BasisStates {
        indices: Vec<usize>,
    },
    /// `(1 + sign * P) / 2`
    PauliEigenspace {
        pauli: PauliString,
        sign: i8,
    },
    Dense {
        dim: usize,
        #[serde(with = "complex_pairs")]
        matrix: Vec<C64>,
    },
}

impl ProjectorSpec {
    pub fn apply(&self, amps: &[C64]) -> Result<Vec<C64>> {
        let dim = amps.len();
        Ok(match self {
            ProjectorSpec::Identity => amps.to_vec(),
            ProjectorSpec::SiteValues { sites, values } => {
                if sites.len() != values.len() {
                    return Err(Error::Invalid("site/value length mismatch".into()));
                }
                for &s in sites {
                    if (1usize << s) >= dim {
                        return Err(Error::SiteOutOfRange {
                            site: s,
                            n_sites: dim.trailing_zeros() as usize,
                        });
                    }
                }
                amps.iter()
                    .enumerate()
                    .map(|(x, a)| {
                        let keep = sites.iter().zip(values).all(|(&s, &v)| ((x >> s) & 1) as u8 == v);
                        if keep {
                            *a
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            }
            ProjectorSpec::BasisStates { indices } => {
                let mut out = vec![C64::new(0.0, 0.0); dim];
                for &i in indices {
                    if i >= dim {
                        return Err(Error::Invalid(format!("basis index {i} out of range")));
                    }
                    out[i] = amps[i];
                }
                out
            }
            ProjectorSpec::PauliEigenspace { pauli, sign } => {
                if *sign != 1 && *sign != -1 {
                    return Err(Error::Invalid("Pauli eigenspace sign must be ±1".into()));
                }
                let pa = Observable::Pauli(pauli.clone()).apply(amps)?;
                let s = f64::from(*sign);
                amps.iter().zip(pa).map(|(a, p)| (a + p * s) * 0.5).collect()
            }
            ProjectorSpec::Dense { dim: d, matrix } => {
                if *d != dim || matrix.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: *d,
                    });
                }
                (0..dim)
                    .map(|r| (0..dim).map(|c| matrix[r * dim + c] * amps[c]).sum())
                    .collect()
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            ProjectorSpec::Identity => "1".into(),
            ProjectorSpec::SiteValues { sites, values } => sites
                .iter()
                .zip(values)
                .map(|(s, v)| format!("q{s}={v}"))
                .collect::<Vec<_>>()
                .join(","),
            ProjectorSpec::BasisStates { indices } => format!("span{indices:?}"),
            ProjectorSpec::PauliEigenspace { pauli, sign } => {
                format!("{}{}", if *sign > 0 { "+" } else { "-" }, pauli)
            }
            ProjectorSpec::Dense { dim, .. } => format!("dense[{dim}]"),
        }
    }
}

/// `parent = sum_i components[i]`, components pairwise orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    parent: StateVector,
    components: Vec<StateVector>,
    labels: Vec<String>,
    dropped_norm: f64,
}

impl Decomposition {
    /// Validates reconstruction and orthogonality, then drops components
    /// below `floor`. The reconstruction check runs before dropping.
    pub fn from_components(
        parent: StateVector,
        components: Vec<StateVector>,
        labels: Vec<String>,
        floor: f64,
    ) -> Result<Self> {
        if labels.len() != components.len() {
            return Err(Error::Invalid("one label per component required".into()));
        }
        let mut sum = vec![C64::new(0.0, 0.0); parent.dim()];
        for c in &components {
            parent.check_same_lattice(c)?;
            for (s, a) in sum.iter_mut().zip(c.amplitudes()) {
                *s += a;
            }
        }
        let residual = parent
            .amplitudes()
            .iter()
            .zip(&sum)
            .map(|(p, s)| (p - s).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > RECONSTRUCTION_TOLERANCE {
            return Err(Error::ReconstructionResidual { residual });
        }
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                let overlap = inner_slices(components[i].amplitudes(), components[j].amplitudes()).norm();
                if overlap > ORTHOGONALITY_TOLERANCE {
                    return Err(Error::ComponentsNotOrthogonal { i, j, overlap });
                }
            }
        }
        let mut kept = Vec::new();
        let mut kept_labels = Vec::new();
        let mut dropped_norm = 0.0;
        for (c, l) in components.into_iter().zip(labels) {
            let n = c.norm();
            if n >= floor {
                kept.push(c);
                kept_labels.push(l);
            } else {
                dropped_norm += n;
            }
        }
        if kept.is_empty() {
            return Err(Error::TooFewComponents { needed: 1, found: 0 });
        }
        Ok(Self {
            parent,
            components: kept,
            labels: kept_labels,
            dropped_norm,
        })
    }

    pub fn trivial(parent: StateVector) -> Self {
        Self {
            components: vec![parent.clone()],
            labels: vec!["1".into()],
            parent,
            dropped_norm: 0.0,
        }
    }

    pub fn parent(&self) -> &StateVector {
        &self.parent
    }

    pub fn components(&self) -> &[StateVector] {
        &self.components
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.components.len() == 1
    }

    pub fn relabel(mut self, f: impl Fn(&str) -> String) -> Self {
        self.labels = self.labels.iter().map(|l| f(l)).collect();
        self
    }

    /// Sum of norms of components removed by the floor.
    pub fn dropped_norm(&self) -> f64 {
        self.dropped_norm
    }

    /// `|psi_i|^2`
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn normalized_component(&self, i: usize) -> StateVector {
        self.components[i]
            .normalized()
            .expect("components above the floor have nonzero norm")
    }

    pub fn normalized_components(&self) -> Vec<StateVector> {
        (0..self.len()).map(|i| self.normalized_component(i)).collect()
    }

    /// Full, per-branch, and off-diagonal expectation bookkeeping.
    pub fn expectation(&self, obs: &Observable) -> Result<BranchExpectation> {
        obs.check_hermitian()?;
        let weights = self.weights();
        let applied: Vec<Vec<C64>> = self
            .components
            .iter()
            .map(|c| obs.apply(c.amplitudes()))
            .collect::<Result<_>>()?;
        let mut per_branch = Vec::with_capacity(self.len());
        let mut branch_mean = 0.0;
        let mut off_diagonal = 0.0;
        for (i, ci) in self.components.iter().enumerate() {
            for (j, oj) in applied.iter().enumerate() {
                let m = inner_slices(ci.amplitudes(), oj);
                if i == j {
                    branch_mean += m.re;
                    per_branch.push(m.re / weights[i]);
                } else {
                    off_diagonal += m.re;
                }
            }
        }
        let full = obs.expectation(&self.parent)?;
        Ok(BranchExpectation {
            observable: obs.label(),
            full,
            per_branch,
            weights,
            branch_mean,
            off_diagonal,
        })
    }
}

/// Expectation of one observable against a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchExpectation {
    pub observable: String,
    pub full: f64,
    /// Normalized `<psi_i|O|psi_i> / |psi_i|^2`.
    pub per_branch: Vec<f64>,
    pub weights: Vec<f64>,
    /// `sum_i weight_i * per_branch_i`
    pub branch_mean: f64,
    /// `sum_{i != j} Re <psi_i|O|psi_j>`, computed directly.
    pub off_diagonal: f64,
}

/// Splits `parent` by the given projectors; zero-norm images are dropped.
pub fn make_decomposition(parent: &StateVector, projectors: &[ProjectorSpec]) -> Result<Decomposition> {
    make_decomposition_with_floor(parent, projectors, DEFAULT_NORM_FLOOR)
}

pub fn make_decomposition_with_floor(
    parent: &StateVector,
    projectors: &[ProjectorSpec],
    floor: f64,
) -> Result<Decomposition> {
    if projectors.is_empty() {
        return Err(Error::TooFewComponents { needed: 1, found: 0 });
    }
    let amps = parent.amplitudes();
    let images: Vec<Vec<C64>> = projectors.iter().map(|p| p.apply(amps)).collect::<Result<_>>()?;
    // Orthogonality on the support of the parent: P_j P_i psi = delta_ij P_i psi.
    for (i, img) in images.iter().enumerate() {
        for (j, p) in projectors.iter().enumerate() {
            let again = p.apply(img)?;
            let target: &[C64] = if i == j { img } else { &[] };
            let dev = again
                .iter()
                .enumerate()
                .map(|(k, a)| (a - target.get(k).copied().unwrap_or_default()).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if dev > RECONSTRUCTION_TOLERANCE {
                return Err(Error::ProjectorsNotOrthogonal { overlap: dev });
            }
        }
    }
    let lattice = parent.lattice();
    let components = images
        .into_iter()
        .map(|a| StateVector::from_amplitudes(lattice, a))
        .collect::<Result<Vec<_>>>()?;
    let labels = projectors.iter().map(|p| p.label()).collect();
    Decomposition::from_components(parent.clone(), components, labels, floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::observable::Pauli;
    use crate::lattice::state::LatticeSpec;

    fn lat(n: usize) -> LatticeSpec {
        LatticeSpec::new(n).unwrap()
    }

    fn all_zero_one(n: usize) -> Vec<ProjectorSpec> {
        vec![
            ProjectorSpec::BasisStates { indices: vec![0] },
            ProjectorSpec::BasisStates {
                indices: vec![(1 << n) - 1],
            },
        ]
    }

    #[test]
    fn ghz_computational_split() {
        for n in 2..=5 {
            let ghz = StateVector::ghz(lat(n));
            let d = make_decomposition(&ghz, &all_zero_one(n)).unwrap();
            assert_eq!(d.len(), 2);
            for w in d.weights() {
                assert!((w - 0.5).abs() < 1e-15);
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            assert!((d.components()[0].amplitudes()[0].re - h).abs() < 1e-15);
            assert!((d.components()[1].amplitudes()[(1 << n) - 1].re - h).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_projector_is_trivial() {
        let ghz = StateVector::ghz(lat(3));
        let d = make_decomposition(&ghz, &[ProjectorSpec::Identity]).unwrap();
        assert!(d.is_trivial());
        assert_eq!(d.components()[0], ghz);
    }

    #[test]
    fn plus_zero_split_on_site_zero() {
        let plus = StateVector::plus_product(lat(1));
        let s = plus.tensor(&StateVector::zero(lat(1))).unwrap();
        let projs = [
            ProjectorSpec::SiteValues {
                sites: vec![0],
                values: vec![0],
            },
            ProjectorSpec::SiteValues {
                sites: vec![0],
                values: vec![1],
            },
        ];
        let d = make_decomposition(&s, &projs).unwrap();
        for w in d.weights() {
            assert!((w - 0.5).abs() < 1e-15);
        }
        assert_eq!(d.normalized_component(0), StateVector::basis(lat(2), 0).unwrap());
        assert_eq!(d.normalized_component(1), StateVector::basis(lat(2), 1).unwrap());
    }

    #[test]
    fn zero_components_dropped() {
        let zero = StateVector::zero(lat(2));
        let projs = [
            ProjectorSpec::SiteValues {
                sites: vec![1],
                values: vec![0],
            },
            ProjectorSpec::SiteValues {
                sites: vec![1],
                values: vec![1],
            },
        ];
        assert!(make_decomposition(&zero, &projs).unwrap().is_trivial());
    }

    #[test]
    fn overlapping_projectors_rejected() {
        let ghz = StateVector::ghz(lat(2));
        let projs = [ProjectorSpec::Identity, ProjectorSpec::BasisStates { indices: vec![0] }];
        assert!(matches!(
            make_decomposition(&ghz, &projs),
            Err(Error::ProjectorsNotOrthogonal { .. })
        ));
    }

    #[test]
    fn incomplete_projectors_rejected() {
        let ghz = StateVector::ghz(lat(2));
        let projs = [ProjectorSpec::BasisStates { indices: vec![0] }];
        assert!(matches!(
            make_decomposition(&ghz, &projs),
            Err(Error::ReconstructionResidual { .. })
        ));
    }

    #[test]
    fn pauli_eigenspace_split() {
        let plus = StateVector::plus_product(lat(2));
        let projs = [
            ProjectorSpec::PauliEigenspace {
                pauli: PauliString::uniform([0, 1], Pauli::Z),
                sign: 1,
            },
            ProjectorSpec::PauliEigenspace {
                pauli: PauliString::uniform([0, 1], Pauli::Z),
                sign: -1,
            },
        ];
        let d = make_decomposition(&plus, &projs).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn branch_expectation_bookkeeping_ghz() {
        let ghz = StateVector::ghz(lat(2));
        let d = make_decomposition(&ghz, &all_zero_one(2)).unwrap();
        let xx = d.expectation(&Observable::pauli("X0 X1").unwrap()).unwrap();
        assert!((xx.full - 1.0).abs() < 1e-15);
        assert!(xx.branch_mean.abs() < 1e-15);
        assert!((xx.off_diagonal - 1.0).abs() < 1e-15);
        let z = d.expectation(&Observable::pauli("Z0").unwrap()).unwrap();
        assert_eq!(z.per_branch, vec![1.0, -1.0]);
        assert!(z.full.abs() < 1e-15);
    }
}

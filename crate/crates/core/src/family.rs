//! Finite families of candidate decompositions searched by both splitters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{make_decomposition, Decomposition, Pauli, PauliString, ProjectorSpec, StateVector};

/// One named way of splitting a state: a complete set of orthogonal projectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub projectors: Vec<ProjectorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum CandidateFamily {
    /// Joint computational values of every site subset of `sites` with at
    /// most `max_subset` elements.
    ComputationalBasis {
        sites: Vec<usize>,
        #[serde(default = "one")]
        max_subset: usize,
    },
    /// `±1` eigenspaces of every Pauli string of weight `1..=max_weight`.
    PauliEigenspaces {
        #[serde(default = "two")]
        max_weight: usize,
    },
    /// Explicit projector sets.
    Projectors { candidates: Vec<Candidate> },
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

impl Default for CandidateFamily {
    fn default() -> Self {
        CandidateFamily::PauliEigenspaces { max_weight: 2 }
    }
}

impl CandidateFamily {
    /// Single-site Z splits on every site.
    pub fn single_site_z(n_sites: usize) -> Self {
        CandidateFamily::ComputationalBasis {
            sites: (0..n_sites).collect(),
            max_subset: 1,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CandidateFamily::ComputationalBasis { sites, max_subset } => {
                format!("computational values of subsets (size <= {max_subset}) of sites {sites:?}")
            }
            CandidateFamily::PauliEigenspaces { max_weight } => {
                format!("eigenspaces of Pauli strings of weight <= {max_weight}")
            }
            CandidateFamily::Projectors { candidates } => format!("{} user projector sets", candidates.len()),
        }
    }

    /// Candidates in a fixed, lexicographically meaningful order.
    pub fn candidates(&self, n_sites: usize) -> Result<Vec<Candidate>> {
        let out = match self {
            CandidateFamily::ComputationalBasis { sites, max_subset } => {
                for &s in sites {
                    if s >= n_sites {
                        return Err(Error::SiteOutOfRange { site: s, n_sites });
                    }
                }
                let mut sites = sites.clone();
                sites.sort_unstable();
                sites.dedup();
                let mut out = Vec::new();
                for size in 1..=(*max_subset).min(sites.len()) {
                    for subset in subsets(&sites, size) {
                        let projectors = (0..1usize << size)
                            .map(|v| ProjectorSpec::SiteValues {
                                sites: subset.clone(),
                                values: (0..size).map(|k| ((v >> k) & 1) as u8).collect(),
                            })
                            .collect();
                        let label = subset.iter().map(|s| format!("Z{s}")).collect::<Vec<_>>().join(",");
                        out.push(Candidate { label, projectors });
                    }
                }
                out
            }
            CandidateFamily::PauliEigenspaces { max_weight } => {
                let mut out = Vec::new();
                let all: Vec<usize> = (0..n_sites).collect();
                for w in 1..=(*max_weight).min(n_sites) {
                    for support in subsets(&all, w) {
                        for paulis in pauli_words(w) {
                            let ps = PauliString::new(support.iter().copied().zip(paulis).collect())?;
                            out.push(Candidate {
                                label: ps.to_string(),
                                projectors: vec![
                                    ProjectorSpec::PauliEigenspace {
                                        pauli: ps.clone(),
                                        sign: 1,
                                    },
                                    ProjectorSpec::PauliEigenspace { pauli: ps, sign: -1 },
                                ],
                            });
                        }
                    }
                }
                out
            }
            CandidateFamily::Projectors { candidates } => candidates.clone(),
        };
        if out.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(out)
    }
}

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[k + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn pauli_words(len: usize) -> Vec<Vec<Pauli>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                [Pauli::X, Pauli::Y, Pauli::Z].into_iter().map(move |p| {
                    let mut w = w.clone();
                    w.push(p);
                    w
                })
            })
            .collect();
    }
    out
}

/// A candidate applied to a state, or the reason it could not be.
pub fn apply_candidate(psi: &StateVector, candidate: &Candidate) -> Result<Decomposition> {
    make_decomposition(psi, &candidate.projectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    #[test]
    fn family_sizes() {
        assert_eq!(CandidateFamily::single_site_z(3).candidates(3).unwrap().len(), 3);
        let pairs = CandidateFamily::ComputationalBasis {
            sites: vec![0, 1, 2],
            max_subset: 2,
        };
        let c = pairs.candidates(3).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c[3].projectors.len(), 4);
        // 3 * 4 weight-one strings, 9 * 6 weight-two strings.
        assert_eq!(CandidateFamily::default().candidates(4).unwrap().len(), 12 + 54);
    }

    #[test]
    fn empty_family_is_an_error() {
        let f = CandidateFamily::Projectors { candidates: vec![] };
        assert_eq!(f.candidates(2), Err(Error::EmptyFamily));
    }

    #[test]
    fn ghz_split_is_the_same_at_every_site() {
        let l = LatticeSpec::new(3).unwrap();
        let ghz = StateVector::ghz(l);
        let splits: Vec<_> = CandidateFamily::single_site_z(3)
            .candidates(3)
            .unwrap()
            .iter()
            .map(|c| apply_candidate(&ghz, c).unwrap())
            .collect();
        for d in &splits {
            assert_eq!(d.len(), 2);
            assert!((d.components()[0].amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-12);
            assert!((d.components()[1].amplitudes()[7].norm_sqr() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenstate_gives_trivial_split() {
        let l = LatticeSpec::new(2).unwrap();
        let plus = StateVector::plus_product(l);
        let c = Candidate {
            label: "X0".into(),
            projectors: vec![
                ProjectorSpec::PauliEigenspace {
                    pauli: PauliString::single(0, Pauli::X),
                    sign: 1,
                },
                ProjectorSpec::PauliEigenspace {
                    pauli: PauliString::single(0, Pauli::X),
                    sign: -1,
                },
            ],
        };
        assert!(apply_candidate(&plus, &c).unwrap().is_trivial());
    }
}

use serde::{Deserialize, Serialize};

use super::gates::complex_pairs;
use super::state::{inner_slices, StateVector, C64};
use crate::error::{Error, Result};

const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-site Paulis, stored as sorted `(site, P)` with
/// identities omitted. Text form: `"X0 X1"`, `"Z2"`, or `"I"`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(mut ops: Vec<(usize, Pauli)>) -> Result<Self> {
        ops.retain(|(_, p)| *p != Pauli::I);
        ops.sort();
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidObservable("repeated site in Pauli string".into()));
        }
        Ok(Self { ops })
    }

    pub fn single(site: usize, p: Pauli) -> Self {
        Self::new(vec![(site, p)]).expect("single site is never repeated")
    }

    /// Same Pauli on every listed site.
    pub fn uniform(sites: impl IntoIterator<Item = usize>, p: Pauli) -> Self {
        Self::new(sites.into_iter().map(|s| (s, p)).collect()).expect("caller passes distinct sites")
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.ops.last().map(|(s, _)| *s)
    }

    /// `P|psi>` on raw amplitudes.
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ycount = 0u32;
        for &(s, p) in &self.ops {
            match p {
                Pauli::X => flip |= 1 << s,
                Pauli::Y => {
                    flip |= 1 << s;
                    zmask |= 1 << s;
                    ycount += 1;
                }
                Pauli::Z => zmask |= 1 << s,
                Pauli::I => {}
            }
        }
        // Y = i X Z, so P|x> = i^{#Y} (-1)^{popcount(x & zmask)} |x ^ flip>.
        let phase = match ycount % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (x, a) in amps.iter().enumerate() {
            let sign = if (x & zmask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            out[x ^ flip] = phase * sign * a;
        }
        out
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.ops.iter().map(|(s, p)| format!("{}{}", p.symbol(), s)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("I") || s.is_empty() {
            return Ok(Self::identity());
        }
        let mut ops = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == '*') {
            if tok.is_empty() {
                continue;
            }
            let mut chars = tok.chars();
            let p = chars
                .next()
                .and_then(Pauli::from_char)
                .ok_or_else(|| Error::InvalidObservable(format!("bad Pauli token `{tok}`")))?;
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::InvalidObservable(format!("bad site in `{tok}`")))?;
            ops.push((site, p));
        }
        Self::new(ops)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Hermitian operator on the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Pauli(PauliString),
    Dense {
        dim: usize,
        #[serde(with = "complex_pairs")]
        matrix: Vec<C64>,
    },
}

impl Observable {
    pub fn pauli(s: &str) -> Result<Self> {
        Ok(Observable::Pauli(s.parse()?))
    }

    /// Dense observable; rejected unless Hermitian to 1e-12.
    pub fn dense(dim: usize, matrix: Vec<C64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        let obs = Observable::Dense { dim, matrix };
        obs.check_hermitian()?;
        Ok(obs)
    }

    pub fn label(&self) -> String {
        match self {
            Observable::Pauli(p) => p.to_string(),
            Observable::Dense { dim, .. } => format!("dense[{dim}]"),
        }
    }

    pub fn check_hermitian(&self) -> Result<()> {
        if let Observable::Dense { dim, matrix } = self {
            let mut deviation: f64 = 0.0;
            for r in 0..*dim {
                for c in 0..*dim {
                    deviation = deviation.max((matrix[r * dim + c] - matrix[c * dim + r].conj()).norm());
                }
            }
            if deviation > HERMITIAN_TOLERANCE {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Ok(())
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Observable::Pauli(p) => match p.max_site() {
                Some(s) if (1usize << s) >= dim => Err(Error::SiteOutOfRange {
                    site: s,
                    n_sites: dim.trailing_zeros() as usize,
                }),
                _ => Ok(()),
            },
            Observable::Dense { dim: d, .. } if *d != dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: *d,
            }),
            Observable::Dense { .. } => Ok(()),
        }
    }

    /// `O|psi>` on raw amplitudes.
    pub fn apply(&self, amps: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(amps.len())?;
        self.check_hermitian()?;
        Ok(match self {
            Observable::Pauli(p) => p.apply(amps),
            Observable::Dense { dim, matrix } => (0..*dim)
                .map(|r| (0..*dim).map(|c| matrix[r * dim + c] * amps[c]).sum())
                .collect(),
        })
    }

    /// `<a|O|b>`
    pub fn matrix_element(&self, a: &[C64], b: &[C64]) -> Result<C64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(inner_slices(a, &self.apply(b)?))
    }

    /// `<psi|O|psi>`; the state need not be normalized.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let amps = state.amplitudes();
        Ok(self.matrix_element(amps, amps)?.re)
    }
}

/// Free-function form of [`Observable::expectation`] for a single state.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    obs.expectation(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::state::LatticeSpec;

    fn ghz2() -> StateVector {
        StateVector::ghz(LatticeSpec::new(2).unwrap())
    }

    #[test]
    fn ghz_z0_is_zero() {
        assert!(Observable::pauli("Z0").unwrap().expectation(&ghz2()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn one_z0_is_minus_one() {
        let one = StateVector::all_ones(LatticeSpec::new(1).unwrap());
        assert_eq!(Observable::pauli("Z0").unwrap().expectation(&one).unwrap(), -1.0);
    }

    #[test]
    fn ghz_xx_matches_dense_oracle() {
        // X⊗X as a dense 4x4 matrix: anti-diagonal ones.
        let mut m = vec![C64::new(0.0, 0.0); 16];
        for r in 0..4 {
            m[r * 4 + (3 - r)] = C64::new(1.0, 0.0);
        }
        let dense = Observable::dense(4, m).unwrap();
        let via_dense = dense.expectation(&ghz2()).unwrap();
        let via_pauli = Observable::pauli("X0 X1").unwrap().expectation(&ghz2()).unwrap();
        assert!((via_dense - 1.0).abs() < 1e-15);
        assert!((via_pauli - via_dense).abs() < 1e-15);
    }

    #[test]
    fn y_action() {
        // Y|0> = i|1>
        let out = PauliString::single(0, Pauli::Y).apply(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(out[1], C64::new(0.0, 1.0));
        // Y|1> = -i|0>
        let out = PauliString::single(0, Pauli::Y).apply(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(out[0], C64::new(0.0, -1.0));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        assert!(matches!(Observable::dense(2, m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn parse_and_display() {
        let p: PauliString = "Z1 X0".parse().unwrap();
        assert_eq!(p.to_string(), "X0 Z1");
        assert!("Q0".parse::<PauliString>().is_err());
        assert!("X0 Z0".parse::<PauliString>().is_err());
    }

    #[test]
    fn site_out_of_range() {
        let obs = Observable::pauli("Z3").unwrap();
        assert!(obs.expectation(&ghz2()).is_err());
    }
}

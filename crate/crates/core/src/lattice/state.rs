use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest chain accepted unless a caller raises the limit explicitly.
pub const DEFAULT_MAX_SITES: usize = 14;

/// Tolerance for the "normalized" flag on a state.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A 1D open chain of qubits.
///
/// Site `k` is bit `k` of a computational-basis index (little-endian), so
/// `|q_0 q_1 ... q_{n-1}>` has index `sum_k q_k 2^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    n_sites: usize,
}

impl LatticeSpec {
    pub fn new(n_sites: usize) -> Result<Self> {
        Self::with_max(n_sites, DEFAULT_MAX_SITES)
    }

    pub fn with_max(n_sites: usize, max: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > max {
            return Err(Error::LatticeSize { n_sites, max });
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            })
        } else {
            Ok(())
        }
    }

    /// Ordered nearest-neighbour pairs `(i, i+1)` and `(i+1, i)`.
    pub fn ordered_adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::with_capacity(2 * self.n_sites.saturating_sub(1));
        for i in 0..self.n_sites.saturating_sub(1) {
            pairs.push((i, i + 1));
            pairs.push((i + 1, i));
        }
        pairs
    }
}

/// A pure state on a qubit chain.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    lattice: LatticeSpec,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(lattice: LatticeSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                expected: lattice.dim(),
                found: amplitudes.len(),
            });
        }
        if let Some(index) = amplitudes.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { lattice, amplitudes })
    }

    /// Builds a state from raw amplitudes, inferring the chain length.
    pub fn from_vec(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::Invalid(format!("amplitude count {len} is not a power of two")));
        }
        let lattice = LatticeSpec::new(len.trailing_zeros() as usize)?;
        Self::from_amplitudes(lattice, amplitudes)
    }

    pub fn basis(lattice: LatticeSpec, index: usize) -> Result<Self> {
        if index >= lattice.dim() {
            return Err(Error::Invalid(format!(
                "basis index {index} out of range for dimension {}",
                lattice.dim()
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); lattice.dim()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { lattice, amplitudes })
    }

    /// `|0...0>`
    pub fn zero(lattice: LatticeSpec) -> Self {
        Self::basis(lattice, 0).expect("index 0 is always valid")
    }

    /// `|1...1>`
    pub fn all_ones(lattice: LatticeSpec) -> Self {
        Self::basis(lattice, lattice.dim() - 1).expect("last index is valid")
    }

    /// `(|0...0> + |1...1>) / sqrt(2)`
    pub fn ghz(lattice: LatticeSpec) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); lattice.dim()];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amplitudes[0] = C64::new(h, 0.0);
        amplitudes[lattice.dim() - 1] = C64::new(h, 0.0);
        Self { lattice, amplitudes }
    }

    /// Tensor product of single-site states; `sites[k]` sits on site `k`.
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        let lattice = LatticeSpec::new(sites.len())?;
        let mut amplitudes = vec![C64::new(1.0, 0.0); lattice.dim()];
        for (index, amp) in amplitudes.iter_mut().enumerate() {
            for (k, local) in sites.iter().enumerate() {
                *amp *= local[(index >> k) & 1];
            }
        }
        Self::from_amplitudes(lattice, amplitudes)
    }

    /// `|+>^n`
    pub fn plus_product(lattice: LatticeSpec) -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::product(&vec![[h, h]; lattice.n_sites()]).expect("lattice already validated")
    }

    /// `self` on the low sites, `other` on the high sites.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let n = self.lattice.n_sites() + other.lattice.n_sites();
        let lattice = LatticeSpec::new(n)?;
        let low = self.lattice.dim();
        let mut amplitudes = Vec::with_capacity(lattice.dim());
        for hi in &other.amplitudes {
            for lo in &self.amplitudes {
                amplitudes.push(lo * hi);
            }
        }
        debug_assert_eq!(amplitudes.len(), low * other.lattice.dim());
        Self::from_amplitudes(lattice, amplitudes)
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            lattice: self.lattice,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn check_same_lattice(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        } else {
            Ok(())
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_lattice(other)?;
        Ok(inner_slices(&self.amplitudes, &other.amplitudes))
    }

    /// `|<self|other>|`
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Ray equality: `|<a|b>| >= 1 - tol` for normalized states.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> Result<bool> {
        Ok(self.overlap(other)? >= 1.0 - tol)
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.check_same_lattice(other)?;
        Ok(Self {
            lattice: self.lattice,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.check_same_lattice(other)?;
        Ok(Self {
            lattice: self.lattice,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// `<a|b>` over raw amplitude slices of equal length.
pub fn inner_slices(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Free-function form of [`StateVector::inner`].
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.inner(b)
}

//! Transverse-field Ising chain, optionally with an apparatus coupling, and
//! its Trotterized propagator.
//!
//! `H = -J sum_i Z_i Z_{i+1} - g sum_{i in F} X_i - kappa sum_{e != s} Z_s Z_e`
//!
//! where `s` is the apparatus system site and `F` the sites carrying the
//! transverse field (all sites, or all but `s` when the system is shielded).
//! The Z part is diagonal and applied exactly; only the split between the two
//! parts is approximated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::circuit::apply_one_site;
use crate::lattice::{LatticeSpec, StateVector, C64};

/// `dt * max |coupling|` above this triggers an accuracy warning.
pub const DT_GUARD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Apparatus {
    pub system_site: usize,
    pub kappa: f64,
    /// Apply the transverse field to the system site too. Off by default,
    /// which makes `Z_s` conserved.
    #[serde(default)]
    pub field_on_system: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub j: f64,
    pub g: f64,
    #[serde(default)]
    pub apparatus: Option<Apparatus>,
    pub dt: f64,
    #[serde(default = "default_order")]
    pub order: u8,
}

fn default_order() -> u8 {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl HamiltonianSpec {
    pub fn ising(j: f64, g: f64, dt: f64) -> Self {
        Self {
            j,
            g,
            apparatus: None,
            dt,
            order: 2,
        }
    }

    pub fn with_apparatus(mut self, system_site: usize, kappa: f64) -> Self {
        self.apparatus = Some(Apparatus {
            system_site,
            kappa,
            field_on_system: false,
        });
        self
    }

    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter {
                name: "dt",
                value: self.dt,
                range: "(0, inf)",
            });
        }
        if self.order != 1 && self.order != 2 {
            return Err(Error::Parameter {
                name: "order",
                value: f64::from(self.order),
                range: "{1, 2}",
            });
        }
        for (name, v) in [("j", self.j), ("g", self.g), ("kappa", self.kappa())] {
            if !v.is_finite() {
                return Err(Error::Parameter {
                    name,
                    value: v,
                    range: "finite",
                });
            }
        }
        if let Some(a) = &self.apparatus {
            lattice.check_site(a.system_site)?;
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.apparatus.map_or(0.0, |a| a.kappa)
    }

    /// Accuracy-guard messages; empty when `dt` is comfortably small.
    pub fn guard_warnings(&self) -> Vec<String> {
        let scale = self.j.abs().max(self.g.abs()).max(self.kappa().abs());
        if self.dt * scale > DT_GUARD {
            vec![format!(
                "dt * max|coupling| = {:.3} exceeds {DT_GUARD}; Trotter error may be large",
                self.dt * scale
            )]
        } else {
            Vec::new()
        }
    }

    fn field_sites(&self, n: usize) -> Vec<usize> {
        (0..n)
            .filter(|&i| match &self.apparatus {
                Some(a) => a.field_on_system || i != a.system_site,
                None => true,
            })
            .collect()
    }

    /// Diagonal energies of the Z part.
    pub fn diagonal(&self, n: usize) -> Vec<f64> {
        let z = |x: usize, i: usize| if (x >> i) & 1 == 0 { 1.0 } else { -1.0 };
        (0..1usize << n)
            .map(|x| {
                let mut e = 0.0;
                for i in 0..n.saturating_sub(1) {
                    e -= self.j * z(x, i) * z(x, i + 1);
                }
                if let Some(a) = &self.apparatus {
                    for k in (0..n).filter(|&k| k != a.system_site) {
                        e -= a.kappa * z(x, a.system_site) * z(x, k);
                    }
                }
                e
            })
            .collect()
    }

    /// Dense matrix of `H`, row-major; for tests and small checks.
    pub fn dense(&self, n: usize) -> Vec<C64> {
        let dim = 1usize << n;
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        for (x, e) in self.diagonal(n).into_iter().enumerate() {
            h[x * dim + x] += e;
        }
        for i in self.field_sites(n) {
            for x in 0..dim {
                h[(x ^ (1 << i)) * dim + x] -= self.g;
            }
        }
        h
    }
}

/// Precomputed factors of one Trotter step.
#[derive(Clone, Debug)]
pub struct Propagator {
    n: usize,
    order: u8,
    field_sites: Vec<usize>,
    /// `exp(-i E dt)` per basis state.
    phase: Vec<C64>,
    /// `exp(i g tau X)` for `tau = dt` and `dt / 2`.
    rot_full: [C64; 4],
    rot_half: [C64; 4],
}

fn x_rotation(angle: f64) -> [C64; 4] {
    let (c, s) = (C64::new(angle.cos(), 0.0), C64::new(0.0, angle.sin()));
    [c, s, s, c]
}

fn adjoint2(m: &[C64; 4]) -> [C64; 4] {
    [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()]
}

impl Propagator {
    pub fn new(h: &HamiltonianSpec, lattice: &LatticeSpec) -> Result<Self> {
        h.validate(lattice)?;
        for w in h.guard_warnings() {
            log::warn!("{w}");
        }
        let n = lattice.n_sites();
        Ok(Self {
            n,
            order: h.order,
            field_sites: h.field_sites(n),
            phase: h
                .diagonal(n)
                .into_iter()
                .map(|e| C64::from_polar(1.0, -e * h.dt))
                .collect(),
            rot_full: x_rotation(h.g * h.dt),
            rot_half: x_rotation(h.g * h.dt / 2.0),
        })
    }

    fn field(&self, amps: &mut [C64], m: &[C64; 4]) {
        for &i in &self.field_sites {
            apply_one_site(amps, i, m);
        }
    }

    fn diag(&self, amps: &mut [C64], dir: Direction) {
        for (a, p) in amps.iter_mut().zip(&self.phase) {
            *a *= if dir == Direction::Forward { *p } else { p.conj() };
        }
    }

    /// One step of `U(dt)`, or of its exact inverse when backward.
    pub fn step(&self, amps: &mut [C64], dir: Direction) {
        debug_assert_eq!(amps.len(), 1 << self.n);
        let fix = |m: &[C64; 4]| if dir == Direction::Forward { *m } else { adjoint2(m) };
        match (self.order, dir) {
            (1, Direction::Forward) => {
                self.diag(amps, dir);
                self.field(amps, &self.rot_full);
            }
            (1, Direction::Backward) => {
                self.field(amps, &fix(&self.rot_full));
                self.diag(amps, dir);
            }
            _ => {
                let half = fix(&self.rot_half);
                self.field(amps, &half);
                self.diag(amps, dir);
                self.field(amps, &half);
            }
        }
    }

    pub fn evolve(&self, amps: &mut [C64], steps: usize, dir: Direction) {
        for _ in 0..steps {
            self.step(amps, dir);
        }
    }
}

/// `steps` forward Trotter steps.
pub fn trotter_evolve(state: &StateVector, h: &HamiltonianSpec, steps: usize) -> Result<StateVector> {
    let lattice = state.lattice();
    let prop = Propagator::new(h, &lattice)?;
    let mut amps = state.amplitudes().to_vec();
    prop.evolve(&mut amps, steps, Direction::Forward);
    StateVector::from_amplitudes(lattice, amps)
}

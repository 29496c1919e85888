//! Complexity-plus-entropy functional over orthogonal decompositions.
//!
//! `q = sum_i w_i (C_i^2 - b ln w_i)` with `w_i = |psi_i|^2` and `C_i` the
//! state complexity of the normalized branch relative to a vacuum state. For
//! a fixed decomposition `q(b) = A + b H` is linear in `b`, which makes the
//! crossovers of a sweep computable in closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{ComplexityOracle, ComplexityResult, SearchMode, DEFAULT_DELTA, DEFAULT_EXACT_BUDGET};
use crate::error::{Error, Result};
use crate::family::{apply_candidate, Candidate, CandidateFamily};
use crate::lattice::{Decomposition, StateVector};

/// Minima closer than this are reported as ties.
pub const TIE_TOLERANCE: f64 = 1e-6;
const WEIGHT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    pub b: f64,
    /// Reference state; `None` means `|0...0>`.
    #[serde(default, with = "crate::complexity::predicate::opt_state_json")]
    pub vacuum: Option<StateVector>,
    pub mode: SearchMode,
    pub budget: u32,
    pub delta: f64,
}

impl QConfig {
    pub fn new(b: f64) -> Self {
        Self {
            b,
            vacuum: None,
            mode: SearchMode::ExactBfs,
            budget: DEFAULT_EXACT_BUDGET,
            delta: DEFAULT_DELTA,
        }
    }

    pub fn with_b(&self, b: f64) -> Self {
        Self { b, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::Parameter {
                name: "b",
                value: self.b,
                range: "[0, inf)",
            });
        }
        if let Some(v) = &self.vacuum {
            v.require_normalized()?;
        }
        Ok(())
    }

    fn vacuum_for(&self, psi: &StateVector) -> Result<StateVector> {
        match &self.vacuum {
            Some(v) => {
                v.check_same_lattice(psi)?;
                Ok(v.clone())
            }
            None => Ok(StateVector::zero(psi.lattice())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QBranch {
    pub label: String,
    pub weight: f64,
    pub complexity: ComplexityResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub branches: Vec<QBranch>,
    pub b: f64,
    /// `sum_i w_i C_i^2`
    pub complexity_term: f64,
    /// `-sum_i w_i ln w_i`
    pub entropy: f64,
    pub q_value: f64,
    /// Every branch complexity is exact.
    pub exact: bool,
}

impl QReport {
    fn assemble(branches: Vec<QBranch>, b: f64) -> Self {
        let complexity_term = branches
            .iter()
            .map(|br| br.weight * f64::from(br.complexity.value).powi(2))
            .sum();
        let entropy = entropy(&branches.iter().map(|br| br.weight).collect::<Vec<_>>());
        Self {
            exact: branches.iter().all(|br| br.complexity.is_exact()),
            q_value: complexity_term + b * entropy,
            complexity_term,
            entropy,
            branches,
            b,
        }
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.branches.iter().map(|b| b.label.clone()).collect()
    }

    /// `q` of the same decomposition at a different `b`.
    pub fn q_at(&self, b: f64) -> f64 {
        self.complexity_term + b * self.entropy
    }

    /// `sum_i w_i C_i`
    pub fn mean_complexity(&self) -> f64 {
        self.branches
            .iter()
            .map(|br| br.weight * f64::from(br.complexity.value))
            .sum()
    }

    /// Recomputes `q` from the branch fields.
    pub fn recompute(&self) -> f64 {
        self.branches
            .iter()
            .map(|br| {
                let c2 = f64::from(br.complexity.value).powi(2);
                let ent = if br.weight > 0.0 { -self.b * br.weight.ln() } else { 0.0 };
                br.weight * (c2 + ent)
            })
            .sum()
    }
}

/// Shannon entropy in nats, `0 ln 0 = 0`.
pub fn entropy(weights: &[f64]) -> f64 {
    weights.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum()
}

/// Evaluates `q` on a decomposition of a normalized state.
pub fn q_functional(oracle: &ComplexityOracle, d: &Decomposition, cfg: &QConfig) -> Result<QReport> {
    cfg.validate()?;
    d.parent().require_normalized()?;
    let weights = d.weights();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOLERANCE + d.dropped_norm().powi(2) {
        return Err(Error::Invalid(format!("branch weights sum to {total}, expected 1")));
    }
    let vacuum = cfg.vacuum_for(d.parent())?;
    let branches = d
        .normalized_components()
        .par_iter()
        .zip(weights.par_iter())
        .zip(d.labels().par_iter())
        .map(|((branch, &weight), label)| {
            let complexity = oracle.state_complexity(&vacuum, branch, cfg.delta, cfg.mode, cfg.budget)?;
            Ok(QBranch {
                label: label.clone(),
                weight,
                complexity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QReport::assemble(branches, cfg.b))
}

/// A decomposition together with its evaluated functional.
#[derive(Clone, Debug)]
pub struct QCandidate {
    pub decomposition: Decomposition,
    pub report: QReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSearch {
    pub family: String,
    pub best: QReport,
    pub trivial: QReport,
    /// Sequence of accepted refinements, as labels.
    pub path: Vec<String>,
    /// Gap between the chosen minimum and the best distinct alternative seen.
    pub q_gap: Option<f64>,
    pub near_tie: bool,
    #[serde(skip)]
    pub decomposition: Option<Decomposition>,
}

/// Refines `d` by splitting its `index`-th component with `candidate`.
fn refine(d: &Decomposition, index: usize, candidate: &Candidate) -> Result<Option<Decomposition>> {
    let target = &d.components()[index];
    let norm = target.norm();
    let pieces = apply_candidate(&target.normalized()?, candidate)?;
    if pieces.is_trivial() {
        return Ok(None);
    }
    let mut comps = Vec::with_capacity(d.len() + pieces.len() - 1);
    let mut labels = Vec::with_capacity(comps.capacity());
    for (k, (c, l)) in d.components().iter().zip(d.labels()).enumerate() {
        if k == index {
            for (p, pl) in pieces.components().iter().zip(pieces.labels()) {
                comps.push(p.scaled(norm.into()));
                labels.push(if d.is_trivial() {
                    pl.clone()
                } else {
                    format!("{l}|{pl}")
                });
            }
        } else {
            comps.push(c.clone());
            labels.push(l.clone());
        }
    }
    Decomposition::from_components(d.parent().clone(), comps, labels, crate::lattice::DEFAULT_NORM_FLOOR).map(Some)
}

/// Greedy descent from the trivial decomposition: at each round, try every
/// family member on every current branch and accept the refinement that
/// lowers `q` the most. Stops when nothing lowers `q`.
pub fn minimize_q(
    oracle: &ComplexityOracle,
    psi: &StateVector,
    family: &CandidateFamily,
    cfg: &QConfig,
) -> Result<QSearch> {
    cfg.validate()?;
    psi.require_normalized()?;
    let candidates = family.candidates(psi.n_sites())?;
    let trivial_d = Decomposition::trivial(psi.clone());
    let trivial = q_functional(oracle, &trivial_d, cfg)?;
    let mut current = QCandidate {
        decomposition: trivial_d,
        report: trivial.clone(),
    };
    let mut path = Vec::new();
    let mut runner_up: Option<f64> = None;
    loop {
        let moves: Vec<(usize, usize)> = (0..current.decomposition.len())
            .flat_map(|i| (0..candidates.len()).map(move |c| (i, c)))
            .collect();
        let evaluated: Vec<Option<QCandidate>> = moves
            .par_iter()
            .map(|&(i, c)| {
                let d = refine(&current.decomposition, i, &candidates[c]).ok().flatten()?;
                let report = q_functional(oracle, &d, cfg).ok()?;
                Some(QCandidate {
                    decomposition: d,
                    report,
                })
            })
            .collect();
        let mut best: Option<QCandidate> = None;
        for cand in evaluated.into_iter().flatten() {
            let better = match &best {
                None => true,
                Some(b) => {
                    cand.report.q_value < b.report.q_value - 1e-12
                        || ((cand.report.q_value - b.report.q_value).abs() <= 1e-12
                            && cand.report.n_branches() < b.report.n_branches())
                }
            };
            if better {
                best = Some(cand);
            }
        }
        match best {
            Some(b) if b.report.q_value < current.report.q_value - 1e-12 => {
                runner_up = Some(current.report.q_value);
                path.push(b.report.labels().join(" + "));
                current = b;
            }
            other => {
                // The best non-accepted alternative bounds the gap from below.
                if let Some(b) = other {
                    let alt = b.report.q_value;
                    runner_up = Some(runner_up.map_or(alt, |r: f64| r.min(alt)));
                }
                break;
            }
        }
    }
    debug_assert!(current.report.q_value <= trivial.q_value + 1e-12);
    if current.report.q_value > trivial.q_value + 1e-12 {
        return Err(Error::Invalid("minimizer exceeds the trivial decomposition".into()));
    }
    let q_gap = runner_up.map(|r| r - current.report.q_value);
    Ok(QSearch {
        family: family.describe(),
        best: current.report,
        trivial,
        path,
        near_tie: q_gap.is_some_and(|g| g < TIE_TOLERANCE),
        q_gap,
        decomposition: Some(current.decomposition),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub b: f64,
    pub labels: Vec<String>,
    pub q_value: f64,
    pub n_branches: usize,
    pub q_gap: Option<f64>,
    pub near_tie: bool,
    pub exact: bool,
    /// Branches at this `b` are unions of the branches at the previous `b`.
    pub nests_previous: Option<bool>,
}

/// Point where the minimizer changes between two consecutive sweep values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub b_low: f64,
    pub b_high: f64,
    /// Where the two minimizers' linear `q(b)` lines cross.
    pub b_star: f64,
    pub from_branches: usize,
    pub to_branches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BSweep {
    pub rows: Vec<SweepRow>,
    pub crossovers: Vec<Crossover>,
    /// Every step coarse-grains the previous structure.
    pub nested: bool,
}

/// Later components are sums of earlier ones.
fn coarse_grains(fine: &Decomposition, coarse: &Decomposition) -> bool {
    fine.components().iter().all(|f| {
        let w = f.norm_sqr();
        let hits = coarse
            .components()
            .iter()
            .filter(|c| {
                let ip = c.inner(f).expect("same lattice");
                (ip.re - w).abs() <= 1e-9 && ip.im.abs() <= 1e-9
            })
            .count();
        hits == 1
    })
}

pub fn b_sweep(
    oracle: &ComplexityOracle,
    psi: &StateVector,
    cfg: &QConfig,
    b_values: &[f64],
    family: &CandidateFamily,
) -> Result<BSweep> {
    if b_values.is_empty() {
        return Err(Error::Invalid("b sweep needs at least one value".into()));
    }
    if b_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("b values must be sorted".into()));
    }
    let searches: Vec<QSearch> = b_values
        .iter()
        .map(|&b| minimize_q(oracle, psi, family, &cfg.with_b(b)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(searches.len());
    let mut crossovers = Vec::new();
    for (k, s) in searches.iter().enumerate() {
        let nests_previous = (k > 0).then(|| {
            let prev = searches[k - 1].decomposition.as_ref().expect("minimizer kept");
            coarse_grains(prev, s.decomposition.as_ref().expect("minimizer kept"))
        });
        rows.push(SweepRow {
            b: s.best.b,
            labels: s.best.labels(),
            q_value: s.best.q_value,
            n_branches: s.best.n_branches(),
            q_gap: s.q_gap,
            near_tie: s.near_tie,
            exact: s.best.exact,
            nests_previous,
        });
        if k > 0 {
            let prev = &searches[k - 1].best;
            if prev.labels() != s.best.labels() {
                let de = prev.entropy - s.best.entropy;
                let b_star = if de.abs() > 1e-15 {
                    (s.best.complexity_term - prev.complexity_term) / de
                } else {
                    f64::NAN
                };
                crossovers.push(Crossover {
                    b_low: prev.b,
                    b_high: s.best.b,
                    b_star,
                    from_branches: prev.n_branches(),
                    to_branches: s.best.n_branches(),
                });
            }
        }
    }
    let nested = rows.iter().all(|r| r.nests_previous != Some(false));
    Ok(BSweep {
        rows,
        crossovers,
        nested,
    })
}

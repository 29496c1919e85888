//! Branch tracking across sample times and the tree check.
//!
//! At each sample the evolved state is split from scratch. Consecutive levels
//! are linked by `O[j][k] = |<b_k(t2)| U(t2, t1) |b_j(t1)>|^2` on normalized
//! branches, and each later branch is assigned the earlier branch with the
//! largest overlap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{Direction, HamiltonianSpec, Propagator};
use crate::complexity::ComplexityOracle;
use crate::error::{Error, Result};
use crate::family::CandidateFamily;
use crate::lattice::{Decomposition, StateVector, C64};
use crate::tm::{search_tm_split, TmConfig};
use crate::weingarten::{minimize_q, QConfig};

pub const DEFAULT_THETA: f64 = 0.99;
/// Later branches with less column mass than this have no parent.
const MASS_FLOOR: f64 = 1e-12;

/// A stretch of evolution, run forward or reversed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub steps: usize,
    #[serde(default)]
    pub reversed: bool,
}

/// Piecewise evolution; step `k` of the lab clock runs in the direction of the
/// segment containing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub segments: Vec<Segment>,
}

impl Schedule {
    pub fn forward(steps: usize) -> Self {
        Self {
            segments: vec![Segment { steps, reversed: false }],
        }
    }

    pub fn total_steps(&self) -> usize {
        self.segments.iter().map(|s| s.steps).sum()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.segments
            .iter()
            .flat_map(|s| {
                let d = if s.reversed {
                    Direction::Backward
                } else {
                    Direction::Forward
                };
                std::iter::repeat_n(d, s.steps)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Splitter {
    /// The best certified split if it reaches the threshold, else no split.
    Tm { config: TmConfig, family: CandidateFamily },
    /// The functional minimizer.
    Weingarten { config: QConfig, family: CandidateFamily },
}

impl Splitter {
    pub fn split(&self, oracle: &ComplexityOracle, psi: &StateVector) -> Result<Decomposition> {
        match self {
            Splitter::Tm { config, family } => {
                let s = search_tm_split(oracle, psi, family, config)?;
                Ok(match (s.good_split, s.best_decomposition) {
                    (true, Some(d)) => d,
                    _ => Decomposition::trivial(psi.clone()),
                })
            }
            Splitter::Weingarten { config, family } => Ok(minimize_q(oracle, psi, family, config)?
                .decomposition
                .expect("minimizer keeps its decomposition")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub label: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub step: usize,
    /// Lab-clock time `step * dt`.
    pub time: f64,
    /// Signed evolution time, which runs backwards in reversed segments.
    pub net_time: f64,
    pub nodes: Vec<TreeNode>,
    #[serde(skip)]
    pub decomposition: Option<Decomposition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from_level: usize,
    pub to_level: usize,
    /// Rows: earlier branches; columns: later branches.
    pub overlap: Vec<Vec<f64>>,
    pub column_mass: Vec<f64>,
    /// Largest-overlap earlier branch per later branch.
    pub parents: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedLevel {
    pub step: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchTree {
    pub levels: Vec<TreeLevel>,
    pub edges: Vec<TreeEdge>,
    pub skipped: Vec<SkippedLevel>,
}

impl BranchTree {
    pub fn branch_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.nodes.len()).collect()
    }

    /// Number of leading levels whose branch count never decreases: the
    /// stretch before branches stop forming or recohere.
    pub fn prethermal_window(&self) -> usize {
        let counts = self.branch_counts();
        if counts.is_empty() {
            return 0;
        }
        1 + counts.windows(2).take_while(|w| w[1] >= w[0]).count()
    }
}

fn run_steps(prop: &Propagator, amps: &mut [C64], dirs: &[Direction]) {
    for &d in dirs {
        prop.step(amps, d);
    }
}

/// Evolves `psi0` along `schedule`, splits at each sample step, and links
/// consecutive levels by forward-evolved overlaps.
pub fn track_branches(
    oracle: &ComplexityOracle,
    psi0: &StateVector,
    h: &HamiltonianSpec,
    schedule: &Schedule,
    sample_steps: &[usize],
    splitter: &Splitter,
) -> Result<BranchTree> {
    let lattice = psi0.lattice();
    let prop = Propagator::new(h, &lattice)?;
    let dirs = schedule.directions();
    if sample_steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("sample steps must be strictly increasing".into()));
    }
    if let Some(&last) = sample_steps.last() {
        if last > dirs.len() {
            return Err(Error::Invalid(format!(
                "sample step {last} beyond the schedule's {} steps",
                dirs.len()
            )));
        }
    }
    let net = |step: usize| {
        dirs[..step]
            .iter()
            .map(|d| if *d == Direction::Forward { 1.0 } else { -1.0 })
            .sum::<f64>()
            * h.dt
    };

    // States at every sample time.
    let mut states = Vec::with_capacity(sample_steps.len());
    let mut amps = psi0.amplitudes().to_vec();
    let mut at = 0;
    for &s in sample_steps {
        run_steps(&prop, &mut amps, &dirs[at..s]);
        at = s;
        states.push(StateVector::from_amplitudes(lattice, amps.clone())?);
    }

    let splits: Vec<Result<Decomposition>> = states.par_iter().map(|psi| splitter.split(oracle, psi)).collect();

    let mut tree = BranchTree {
        levels: Vec::new(),
        edges: Vec::new(),
        skipped: Vec::new(),
    };
    for (&step, split) in sample_steps.iter().zip(splits) {
        let d = match split {
            Ok(d) => d,
            Err(e) => {
                tree.skipped.push(SkippedLevel {
                    step,
                    error: e.to_string(),
                });
                continue;
            }
        };
        let nodes = d
            .labels()
            .iter()
            .zip(d.weights())
            .map(|(label, weight)| TreeNode {
                label: label.clone(),
                weight,
            })
            .collect();
        if let Some(prev) = tree.levels.last() {
            let prev_d = prev.decomposition.as_ref().expect("levels keep decompositions");
            let path = &dirs[prev.step..step];
            let evolved: Vec<Vec<C64>> = prev_d
                .normalized_components()
                .into_par_iter()
                .map(|b| {
                    let mut a = b.into_amplitudes();
                    run_steps(&prop, &mut a, path);
                    a
                })
                .collect();
            tree.edges
                .push(link(tree.levels.len() - 1, tree.levels.len(), &evolved, &d));
        }
        tree.levels.push(TreeLevel {
            step,
            time: step as f64 * h.dt,
            net_time: net(step),
            nodes,
            decomposition: Some(d),
        });
    }
    Ok(tree)
}

fn link(from: usize, to: usize, evolved: &[Vec<C64>], later: &Decomposition) -> TreeEdge {
    let later_branches = later.normalized_components();
    let overlap: Vec<Vec<f64>> = evolved
        .iter()
        .map(|e| {
            later_branches
                .iter()
                .map(|b| crate::lattice::state::inner_slices(b.amplitudes(), e).norm_sqr())
                .collect()
        })
        .collect();
    let column_mass: Vec<f64> = (0..later_branches.len())
        .map(|k| overlap.iter().map(|row| row[k]).sum())
        .collect();
    let parents = (0..later_branches.len())
        .map(|k| {
            if column_mass[k] < MASS_FLOOR {
                return None;
            }
            // First maximum wins, so ties resolve toward the lower index.
            let mut best = 0;
            for j in 1..overlap.len() {
                if overlap[j][k] > overlap[best][k] {
                    best = j;
                }
            }
            Some(best)
        })
        .collect();
    TreeEdge {
        from_level: from,
        to_level: to,
        overlap,
        column_mass,
        parents,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// No earlier branch carries `theta` of the column mass.
    Ambiguous,
    /// The later branch has no overlap with any earlier branch.
    Missing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeViolation {
    pub edge: usize,
    pub later_level: usize,
    pub branch: usize,
    pub kind: ViolationKind,
    pub column_mass: f64,
    pub max_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeVerification {
    pub theta: f64,
    pub is_tree: bool,
    pub violations: Vec<TreeViolation>,
    /// Every overlap row sums to at most `1 + 1e-8`.
    pub rows_bounded: bool,
    /// Largest `|sum_k w_k - 1|` over levels.
    pub max_weight_defect: f64,
    /// Largest `|w_parent - sum of its children's weights|` over edges.
    pub max_parent_defect: f64,
    pub window_levels: usize,
    /// No violations on edges inside the pre-thermalization window.
    pub window_is_tree: bool,
}

/// Tree check at threshold `theta` of each later branch's column mass.
pub fn verify_tree(tree: &BranchTree, theta: f64) -> Result<TreeVerification> {
    if tree.levels.len() < 2 {
        return Err(Error::TooFewComponents {
            needed: 2,
            found: tree.levels.len(),
        });
    }
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(Error::Parameter {
            name: "theta",
            value: theta,
            range: "(0.5, 1]",
        });
    }
    let mut violations = Vec::new();
    let mut rows_bounded = true;
    let mut max_parent_defect: f64 = 0.0;
    for (e, edge) in tree.edges.iter().enumerate() {
        rows_bounded &= edge.overlap.iter().all(|row| row.iter().sum::<f64>() <= 1.0 + 1e-8);
        for k in 0..edge.column_mass.len() {
            let mass = edge.column_mass[k];
            let max_share = edge.overlap.iter().map(|row| row[k]).fold(0.0, f64::max);
            let kind = if mass < MASS_FLOOR {
                Some(ViolationKind::Missing)
            } else {
                let owners = edge.overlap.iter().filter(|row| row[k] >= theta * mass).count();
                (owners != 1).then_some(ViolationKind::Ambiguous)
            };
            if let Some(kind) = kind {
                violations.push(TreeViolation {
                    edge: e,
                    later_level: edge.to_level,
                    branch: k,
                    kind,
                    column_mass: mass,
                    max_share: if mass > 0.0 { max_share / mass } else { 0.0 },
                });
            }
        }
        let earlier = &tree.levels[edge.from_level].nodes;
        let later = &tree.levels[edge.to_level].nodes;
        for (j, parent) in earlier.iter().enumerate() {
            let children: f64 = edge
                .parents
                .iter()
                .zip(later)
                .filter(|(p, _)| **p == Some(j))
                .map(|(_, n)| n.weight)
                .sum();
            max_parent_defect = max_parent_defect.max((parent.weight - children).abs());
        }
    }
    let max_weight_defect = tree
        .levels
        .iter()
        .map(|l| (l.nodes.iter().map(|n| n.weight).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let window_levels = tree.prethermal_window();
    let window_is_tree = violations.iter().all(|v| v.later_level >= window_levels);
    Ok(TreeVerification {
        theta,
        is_tree: violations.is_empty(),
        violations,
        rows_bounded,
        max_weight_defect,
        max_parent_defect,
        window_levels,
        window_is_tree,
    })
}

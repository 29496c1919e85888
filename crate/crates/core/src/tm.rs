//! Distinguish/interfere branch criterion.
//!
//! For a pair of orthogonal branches, `C_D` is the least cost of a unitary
//! whose diagonal expectations on the two branches differ by a margin of at
//! least `1 - epsilon`, and `C_I` the least cost of one that carries either
//! branch onto the other with overlap `epsilon`. A decomposition is good when
//! `min C_I - max C_D` is large.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{
    ComplexityOracle, ComplexityResult, Predicate, SearchMode, DEFAULT_EXACT_BUDGET, DEFAULT_HEURISTIC_BUDGET,
};
use crate::error::{Error, Result};
use crate::family::{apply_candidate, CandidateFamily};
use crate::lattice::{Decomposition, StateVector};

/// Branches count as orthogonal below this overlap.
pub const ORTHOGONALITY_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmConfig {
    pub epsilon: f64,
    pub mode: SearchMode,
    pub budget: u32,
    /// Certified branchiness needed to call a split good.
    pub threshold: i64,
}

impl TmConfig {
    pub fn new(epsilon: f64, mode: SearchMode) -> Self {
        let budget = match mode {
            SearchMode::ExactBfs => DEFAULT_EXACT_BUDGET,
            SearchMode::HeuristicLayers => DEFAULT_HEURISTIC_BUDGET,
        };
        Self {
            epsilon,
            mode,
            budget,
            threshold: 1,
        }
    }

    pub fn with_budget(mut self, budget: u32) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Parameter {
                name: "epsilon",
                value: self.epsilon,
                range: "(0, 0.5)",
            });
        }
        Ok(())
    }
}

impl Default for TmConfig {
    fn default() -> Self {
        Self::new(0.1, SearchMode::ExactBfs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmPairReport {
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
    pub c_d: ComplexityResult,
    pub c_i: ComplexityResult,
    /// `c_i.value - c_d.value`
    pub pair_branchiness: i64,
    /// `c_d` bounds `C_D` above and `c_i` bounds `C_I` below, so the pair
    /// branchiness is a certified lower bound.
    pub certified: bool,
}

impl TmPairReport {
    fn new(i: usize, j: usize, epsilon: f64, c_d: ComplexityResult, c_i: ComplexityResult) -> Self {
        Self {
            i,
            j,
            epsilon,
            pair_branchiness: i64::from(c_i.value) - i64::from(c_d.value),
            certified: c_d.bounds_above() && c_i.bounds_below(),
            c_d,
            c_i,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmReport {
    pub labels: Vec<String>,
    /// Branch weights, carried for comparison only; the criterion ignores them.
    pub weights: Vec<f64>,
    pub config: TmConfig,
    pub pairs: Vec<TmPairReport>,
    pub c_i_min: u32,
    pub c_d_max: u32,
    pub branchiness: i64,
    pub certified: bool,
}

impl TmReport {
    fn aggregate(d: &Decomposition, config: TmConfig, pairs: Vec<TmPairReport>) -> Self {
        let c_i_min = pairs.iter().map(|p| p.c_i.value).min().unwrap_or(0);
        let c_d_max = pairs.iter().map(|p| p.c_d.value).max().unwrap_or(0);
        let certified = pairs.iter().all(|p| p.certified);
        Self {
            labels: d.labels().to_vec(),
            weights: d.weights(),
            config,
            branchiness: i64::from(c_i_min) - i64::from(c_d_max),
            certified,
            c_i_min,
            c_d_max,
            pairs,
        }
    }

    /// Checks that the aggregates follow from the pair reports.
    pub fn check_consistency(&self) -> Result<()> {
        let c_i_min = self.pairs.iter().map(|p| p.c_i.value).min().unwrap_or(0);
        let c_d_max = self.pairs.iter().map(|p| p.c_d.value).max().unwrap_or(0);
        let ok = c_i_min == self.c_i_min
            && c_d_max == self.c_d_max
            && self.branchiness == i64::from(c_i_min) - i64::from(c_d_max)
            && self
                .pairs
                .iter()
                .all(|p| self.branchiness <= p.pair_branchiness + i64::from(self.c_d_max) - i64::from(p.c_d.value));
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(
                "branchiness aggregates disagree with pair reports".into(),
            ))
        }
    }

    pub fn is_good(&self) -> bool {
        self.certified && self.branchiness >= self.config.threshold
    }
}

fn check_pair(a: &StateVector, b: &StateVector, cfg: &TmConfig) -> Result<()> {
    cfg.validate()?;
    a.require_normalized()?;
    b.require_normalized()?;
    let overlap = a.overlap(b)?;
    if overlap > ORTHOGONALITY_LIMIT {
        return Err(Error::StatesNotOrthogonal { overlap });
    }
    Ok(())
}

/// `C_D`: least cost of `U` with `|<a|U|a> - <b|U|b>| / 2 >= 1 - epsilon`.
pub fn distinguishing_complexity(
    oracle: &ComplexityOracle,
    a: &StateVector,
    b: &StateVector,
    cfg: &TmConfig,
) -> Result<ComplexityResult> {
    check_pair(a, b, cfg)?;
    oracle.query(
        Predicate::distinguish(a.clone(), b.clone(), cfg.epsilon)?,
        cfg.mode,
        cfg.budget,
    )
}

/// `C_I`: least cost of `U` with `(|<a|U|b>| + |<b|U|a>|) / 2 >= epsilon`.
pub fn interference_complexity(
    oracle: &ComplexityOracle,
    a: &StateVector,
    b: &StateVector,
    cfg: &TmConfig,
) -> Result<ComplexityResult> {
    check_pair(a, b, cfg)?;
    oracle.query(
        Predicate::interfere(a.clone(), b.clone(), cfg.epsilon)?,
        cfg.mode,
        cfg.budget,
    )
}

/// Pair reports for every `i < j` on normalized branches, plus aggregates.
pub fn evaluate_decomposition(oracle: &ComplexityOracle, d: &Decomposition, cfg: &TmConfig) -> Result<TmReport> {
    cfg.validate()?;
    if d.len() < 2 {
        return Err(Error::TooFewComponents {
            needed: 2,
            found: d.len(),
        });
    }
    let branches = d.normalized_components();
    let index: Vec<(usize, usize)> = (0..d.len())
        .flat_map(|i| (i + 1..d.len()).map(move |j| (i, j)))
        .collect();
    let pairs = index
        .par_iter()
        .map(|&(i, j)| {
            let c_d = distinguishing_complexity(oracle, &branches[i], &branches[j], cfg)?;
            let c_i = interference_complexity(oracle, &branches[i], &branches[j], cfg)?;
            Ok(TmPairReport::new(i, j, cfg.epsilon, c_d, c_i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TmReport::aggregate(d, *cfg, pairs))
}

/// Outcome of one family member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmCandidateSummary {
    pub label: String,
    pub n_components: usize,
    /// `None` when the split left a single branch.
    pub branchiness: Option<i64>,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmSearch {
    pub family: String,
    /// Index into `candidates` of the selected split.
    pub best: Option<usize>,
    pub best_report: Option<TmReport>,
    pub candidates: Vec<TmCandidateSummary>,
    /// Every candidate whose certified branchiness reaches the threshold.
    pub good: Vec<String>,
    pub good_split: bool,
    #[serde(skip)]
    pub best_decomposition: Option<Decomposition>,
}

/// Ranking key: certified first, then branchiness, then fewer components,
/// then the smaller label.
type Rank = (bool, i64, std::cmp::Reverse<usize>, std::cmp::Reverse<String>);
type Evaluated = Result<(Decomposition, Option<TmReport>)>;

/// Evaluates every family member and picks the largest branchiness, preferring
/// certified reports, then fewer components, then the smaller label.
pub fn search_tm_split(
    oracle: &ComplexityOracle,
    psi: &StateVector,
    family: &CandidateFamily,
    cfg: &TmConfig,
) -> Result<TmSearch> {
    cfg.validate()?;
    psi.require_normalized()?;
    let candidates = family.candidates(psi.n_sites())?;
    let evaluated: Vec<(String, Evaluated)> = candidates
        .iter()
        .map(|c| {
            let out = apply_candidate(psi, c).and_then(|d| {
                if d.is_trivial() {
                    Ok((d, None))
                } else {
                    evaluate_decomposition(oracle, &d, cfg).map(|r| (d, Some(r)))
                }
            });
            (c.label.clone(), out)
        })
        .collect();

    let mut summaries = Vec::with_capacity(evaluated.len());
    let mut best: Option<(usize, Rank)> = None;
    let mut best_pair: Option<(Decomposition, TmReport)> = None;
    for (k, (label, out)) in evaluated.into_iter().enumerate() {
        match out {
            Ok((d, Some(report))) => {
                summaries.push(TmCandidateSummary {
                    label: label.clone(),
                    n_components: d.len(),
                    branchiness: Some(report.branchiness),
                    certified: report.certified,
                    error: None,
                });
                let key = (
                    report.certified,
                    report.branchiness,
                    std::cmp::Reverse(d.len()),
                    std::cmp::Reverse(label),
                );
                if best.as_ref().is_none_or(|(_, b)| key > *b) {
                    best = Some((k, key));
                    best_pair = Some((d, report));
                }
            }
            Ok((d, None)) => summaries.push(TmCandidateSummary {
                label,
                n_components: d.len(),
                branchiness: None,
                certified: false,
                error: None,
            }),
            Err(e) => summaries.push(TmCandidateSummary {
                label,
                n_components: 0,
                branchiness: None,
                certified: false,
                error: Some(e.to_string()),
            }),
        }
    }
    let good: Vec<String> = summaries
        .iter()
        .filter(|s| s.certified && s.branchiness.is_some_and(|b| b >= cfg.threshold))
        .map(|s| s.label.clone())
        .collect();
    let good_split = best_pair.as_ref().is_some_and(|(_, r)| r.is_good());
    let (best_decomposition, best_report) = match best_pair {
        Some((d, r)) => (Some(d), Some(r)),
        None => (None, None),
    };
    Ok(TmSearch {
        family: family.describe(),
        best: best.map(|(k, _)| k),
        best_report,
        candidates: summaries,
        good,
        good_split,
        best_decomposition,
    })
}

use serde::{Deserialize, Serialize};

use crate::lattice::Circuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// No cheaper circuit exists; certified by an exhausted search.
    Exact,
    /// A witness of this cost exists; cheaper ones were not ruled out.
    UpperBound,
    /// Nothing found with cost below `value`.
    LowerBoundCutoff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    ExactBfs,
    HeuristicLayers,
}

impl std::str::FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" | "exact_bfs" => Ok(SearchMode::ExactBfs),
            "heuristic" | "heuristic_layers" => Ok(SearchMode::HeuristicLayers),
            other => Err(format!("unknown mode `{other}` (expected exact|heuristic)")),
        }
    }
}

/// A gate-count complexity value with its certification status.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplexityResult {
    pub value: u32,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Circuit>,
    /// Search budget the query ran with.
    pub cutoff: u32,
    /// Produced by a heuristic search; a heuristic cutoff certifies nothing.
    #[serde(default)]
    pub heuristic: bool,
    /// The exact search stopped early at the frontier node limit.
    #[serde(default)]
    pub frontier_limited: bool,
}

impl ComplexityResult {
    pub fn exact(value: u32, witness: Circuit, cutoff: u32) -> Self {
        Self {
            value,
            status: Status::Exact,
            witness: Some(witness),
            cutoff,
            heuristic: false,
            frontier_limited: false,
        }
    }

    pub fn cutoff(value: u32, cutoff: u32) -> Self {
        Self {
            value,
            status: Status::LowerBoundCutoff,
            witness: None,
            cutoff,
            heuristic: false,
            frontier_limited: false,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.status == Status::Exact
    }

    /// `value` is a valid upper bound on the true complexity.
    pub fn bounds_above(&self) -> bool {
        matches!(self.status, Status::Exact | Status::UpperBound)
    }

    /// `value` is a certified lower bound on the true complexity.
    pub fn bounds_below(&self) -> bool {
        match self.status {
            Status::Exact => true,
            Status::LowerBoundCutoff => !self.heuristic,
            Status::UpperBound => false,
        }
    }
}

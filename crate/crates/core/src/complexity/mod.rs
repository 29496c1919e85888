//! Gate-count complexity of unitaries and states over a declared gate set.
//!
//! Exact mode enumerates circuits by cost and certifies its answers; heuristic
//! mode returns witnessed upper bounds from a beam search, and a separate
//! brickwork relaxation reports bounds counted in two-site blocks.

pub mod beam;
pub mod bfs;
pub mod brickwork;
pub mod cache;
pub mod mitm;
pub mod predicate;
pub mod result;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bfs::{bfs_synthesize, SearchConfig};
pub use brickwork::{heuristic_layer_complexity, LayerBound, LayerSearchConfig};
pub use cache::ComplexityCache;
pub use predicate::{Predicate, SearchPredicate};
pub use result::{ComplexityResult, SearchMode, Status};

use crate::error::Result;
use crate::lattice::{apply_circuit, GateSet, StateVector};

pub const DEFAULT_EXACT_BUDGET: u32 = 12;
pub const DEFAULT_HEURISTIC_BUDGET: u32 = 40;
pub const DEFAULT_DELTA: f64 = 0.01;

/// A complete, serializable complexity question.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityQuery {
    pub predicate: Predicate,
    pub gate_set: GateSet,
    pub mode: SearchMode,
    pub budget: u32,
}

impl ComplexityQuery {
    pub fn new(predicate: Predicate, gate_set: GateSet, mode: SearchMode, budget: u32) -> Self {
        Self {
            predicate,
            gate_set,
            mode,
            budget,
        }
    }
}

/// Runs complexity queries against a shared cache.
#[derive(Clone, Debug)]
pub struct ComplexityOracle {
    pub gate_set: GateSet,
    pub search: SearchConfig,
    cache: Arc<ComplexityCache>,
}

impl ComplexityOracle {
    pub fn new(gate_set: GateSet) -> Self {
        Self {
            gate_set,
            search: SearchConfig::default(),
            cache: Arc::new(ComplexityCache::in_memory()),
        }
    }

    pub fn with_cache(mut self, cache: Arc<ComplexityCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_search(mut self, search: SearchConfig) -> Self {
        self.search = search;
        self
    }

    pub fn cache(&self) -> &Arc<ComplexityCache> {
        &self.cache
    }

    /// Minimal cost over circuits satisfying the query predicate.
    pub fn query_complexity(&self, q: &ComplexityQuery) -> Result<ComplexityResult> {
        q.predicate.validate()?;
        q.gate_set.validate()?;
        let key = ComplexityCache::key(&q.predicate, &q.gate_set, q.mode, &self.search, q.budget);
        if let Some(hit) = self.cache.lookup(&key, q.mode, q.budget) {
            return Ok(hit);
        }
        let lattice = q.predicate.states().0.lattice();
        let result = match (q.mode, &q.predicate) {
            (SearchMode::ExactBfs, Predicate::StateMap { source, target, delta })
                if self.search.meet_in_middle && q.gate_set.has_uniform_cost() =>
            {
                mitm::meet_in_middle(source, target, *delta, &q.gate_set, &lattice, q.budget, &self.search)
            }
            (SearchMode::ExactBfs, p) => bfs_synthesize(p, &q.gate_set, &lattice, q.budget, &self.search),
            (SearchMode::HeuristicLayers, p) => beam::beam_search(p, &q.gate_set, &lattice, q.budget, &self.search),
        };
        if let Some(w) = &result.witness {
            verify_witness(&q.predicate, w, &q.gate_set)?;
        }
        self.cache.store(&key, &result)?;
        Ok(result)
    }

    pub fn query(&self, predicate: Predicate, mode: SearchMode, budget: u32) -> Result<ComplexityResult> {
        self.query_complexity(&ComplexityQuery::new(predicate, self.gate_set.clone(), mode, budget))
    }

    /// Least cost of a circuit `U` with `|<target|U|source>| >= 1 - delta`.
    pub fn state_complexity(
        &self,
        source: &StateVector,
        target: &StateVector,
        delta: f64,
        mode: SearchMode,
        budget: u32,
    ) -> Result<ComplexityResult> {
        self.query(
            Predicate::state_map(source.clone(), target.clone(), delta)?,
            mode,
            budget,
        )
    }
}

impl Default for ComplexityOracle {
    fn default() -> Self {
        Self::new(GateSet::default())
    }
}

/// Re-simulates a witness and checks it against the predicate.
pub fn verify_witness(pred: &Predicate, witness: &crate::lattice::Circuit, gate_set: &GateSet) -> Result<()> {
    let images: Vec<_> = pred
        .frame()
        .into_iter()
        .map(|s| apply_circuit(s, witness, gate_set).map(|o| o.into_amplitudes()))
        .collect::<Result<Vec<_>>>()?
        .concat();
    if pred.satisfied(&images) {
        Ok(())
    } else {
        Err(crate::error::Error::Invalid(format!(
            "witness {witness} fails its {} predicate (score {})",
            pred.kind(),
            pred.score(&images)
        )))
    }
}

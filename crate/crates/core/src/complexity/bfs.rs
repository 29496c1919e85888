//! Exhaustive search over circuits by nondecreasing cost.

use std::collections::{BTreeMap, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};

use rayon::prelude::*;

use super::predicate::{frame_vector, SearchPredicate};
use super::result::ComplexityResult;
use crate::lattice::{all_moves, Circuit, GateSet, LatticeSpec, Move, C64};

/// Grid used when hashing frame images.
pub const HASH_GRID: f64 = 1e-6;
/// Entries below this magnitude never fix the global phase.
const PHASE_PIVOT_FLOOR: f64 = 1e-3;
/// Frontier entries expanded per parallel batch.
const EXPAND_BATCH: usize = 4096;
/// Memory allowed for stored frame images across a search.
const IMAGE_BYTES_LIMIT: usize = 1_500_000_000;

/// `(parent node, move index, cost, frame key, frame images)`.
type Child = (u32, u16, u32, u64, Vec<C64>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SearchConfig {
    /// Stored search nodes before an exact search gives up.
    pub max_nodes: usize,
    /// Join forward and backward searches for state-map predicates.
    pub meet_in_middle: bool,
    /// Nodes kept per depth in the heuristic beam search.
    pub beam_width: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_nodes: 2_000_000,
            meet_in_middle: true,
            beam_width: 256,
        }
    }
}

/// Hash of the frame images with a common global phase divided out and
/// entries rounded to [`HASH_GRID`].
pub fn frame_key(images: &[C64]) -> u64 {
    let phase = images
        .iter()
        .find(|a| a.norm() > PHASE_PIVOT_FLOOR)
        .map(|a| a.conj() / a.norm())
        .unwrap_or(C64::new(1.0, 0.0));
    let mut h = DefaultHasher::new();
    for a in images {
        let z = a * phase;
        ((z.re / HASH_GRID).round() as i64).hash(&mut h);
        ((z.im / HASH_GRID).round() as i64).hash(&mut h);
    }
    h.finish()
}

/// Applies `mv` to every frame state in a flat image vector.
pub(crate) fn apply_to_frame(mv: &Move, gate_set: &GateSet, images: &mut [C64], dim: usize) {
    for chunk in images.chunks_mut(dim) {
        mv.apply(gate_set, chunk);
    }
}

/// Node bookkeeping shared by the exact searches: parent pointers for
/// witness reconstruction.
pub(crate) struct Arena {
    parent: Vec<u32>,
    via: Vec<u16>,
}

impl Arena {
    pub(crate) fn new() -> Self {
        Self {
            parent: vec![u32::MAX],
            via: vec![u16::MAX],
        }
    }

    pub(crate) fn push(&mut self, parent: u32, mv: u16) -> u32 {
        self.parent.push(parent);
        self.via.push(mv);
        (self.parent.len() - 1) as u32
    }

    pub(crate) fn len(&self) -> usize {
        self.parent.len()
    }

    /// Move indices from the root to `node`.
    pub(crate) fn path(&self, mut node: u32) -> Vec<u16> {
        let mut out = Vec::new();
        while node != 0 {
            out.push(self.via[node as usize]);
            node = self.parent[node as usize];
        }
        out.reverse();
        out
    }
}

/// Node cap for a search whose nodes each store `frame_len` amplitudes.
pub(crate) fn node_limit(cfg: &SearchConfig, frame_len: usize) -> usize {
    let per_node = frame_len * std::mem::size_of::<C64>() + 64;
    cfg.max_nodes.min(IMAGE_BYTES_LIMIT / per_node)
}

pub(crate) fn circuit_from_moves(path: &[u16], moves: &[Move], gate_set: &GateSet) -> Circuit {
    Circuit::new(path.iter().map(|&m| moves[m as usize].to_op(gate_set)).collect())
}

struct Entry {
    node: u32,
    key: u64,
    images: Vec<C64>,
}

/// Breadth-first (uniform-cost) enumeration of circuits, deduplicated by
/// [`frame_key`].
///
/// Returns `Exact` with a witness at the first satisfying cost, or
/// `LowerBoundCutoff` with value `budget + 1`; if the node limit is hit the
/// value is one past the last fully exhausted cost.
pub fn bfs_synthesize(
    pred: &dyn SearchPredicate,
    gate_set: &GateSet,
    lattice: &LatticeSpec,
    budget: u32,
    cfg: &SearchConfig,
) -> ComplexityResult {
    let moves = all_moves(gate_set, lattice);
    let costs: Vec<u32> = moves.iter().map(|m| gate_set.gates[m.gate].cost).collect();
    let dim = lattice.dim();

    let root = frame_vector(pred);
    let node_limit = node_limit(cfg, root.len());
    let root_key = frame_key(&root);
    let mut arena = Arena::new();
    let mut best: HashMap<u64, u32> = HashMap::new();
    best.insert(root_key, 0);
    let mut buckets: BTreeMap<u32, Vec<Entry>> = BTreeMap::new();
    buckets.insert(
        0,
        vec![Entry {
            node: 0,
            key: root_key,
            images: root,
        }],
    );

    while let Some((cost, entries)) = buckets.pop_first() {
        if cost > budget {
            break;
        }
        let live: Vec<Entry> = entries
            .into_iter()
            .filter(|e| best.get(&e.key) == Some(&cost))
            .collect();
        if let Some(hit) = live.iter().find(|e| pred.satisfied(&e.images)) {
            let path = arena.path(hit.node);
            return ComplexityResult::exact(cost, circuit_from_moves(&path, &moves, gate_set), budget);
        }
        for batch in live.chunks(EXPAND_BATCH) {
            let children: Vec<Vec<Child>> = batch
                .par_iter()
                .map(|e| {
                    moves
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| cost + costs[*k] <= budget)
                        .map(|(k, mv)| {
                            let mut img = e.images.clone();
                            apply_to_frame(mv, gate_set, &mut img, dim);
                            let key = frame_key(&img);
                            (e.node, k as u16, cost + costs[k], key, img)
                        })
                        .collect()
                })
                .collect();
            for (parent, k, c, key, img) in children.into_iter().flatten() {
                if best.get(&key).is_some_and(|&b| b <= c) {
                    continue;
                }
                best.insert(key, c);
                let node = arena.push(parent, k);
                buckets.entry(c).or_default().push(Entry { node, key, images: img });
            }
            if arena.len() > node_limit {
                log::warn!("search exceeded {node_limit} nodes; exhausted through cost {cost}");
                let mut r = ComplexityResult::cutoff(cost + 1, budget);
                r.frontier_limited = true;
                return r;
            }
        }
    }
    ComplexityResult::cutoff(budget + 1, budget)
}

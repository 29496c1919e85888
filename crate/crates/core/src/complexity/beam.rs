//! Beam search over circuits from the declared gate set.
//!
//! Keeps the best `beam_width` frame images per depth, ranked by predicate
//! score. Any satisfying circuit is a genuine witness, so the result is an
//! upper bound in the same gate-count units as the exact search.

use std::collections::HashSet;

use rayon::prelude::*;

use super::bfs::{apply_to_frame, circuit_from_moves, frame_key, SearchConfig};
use super::predicate::{frame_vector, SearchPredicate};
use super::result::{ComplexityResult, Status};
use crate::lattice::{all_moves, GateSet, LatticeSpec, C64};

struct Node {
    path: Vec<u16>,
    cost: u32,
    images: Vec<C64>,
    score: f64,
}

pub fn beam_search(
    pred: &dyn SearchPredicate,
    gate_set: &GateSet,
    lattice: &LatticeSpec,
    budget: u32,
    cfg: &SearchConfig,
) -> ComplexityResult {
    let moves = all_moves(gate_set, lattice);
    let dim = lattice.dim();
    let root = frame_vector(pred);
    let mut seen: HashSet<u64> = HashSet::new();
    seen.insert(frame_key(&root));
    let score = pred.score(&root);
    let mut beam = vec![Node {
        path: Vec::new(),
        cost: 0,
        images: root,
        score,
    }];

    let finish = |node: &Node| ComplexityResult {
        value: node.cost,
        status: Status::UpperBound,
        witness: Some(circuit_from_moves(&node.path, &moves, gate_set)),
        cutoff: budget,
        heuristic: true,
        frontier_limited: false,
    };
    if pred.satisfied(&beam[0].images) {
        return finish(&beam[0]);
    }

    while !beam.is_empty() {
        let children: Vec<Vec<Node>> = beam
            .par_iter()
            .map(|n| {
                moves
                    .iter()
                    .enumerate()
                    .filter_map(|(k, mv)| {
                        let cost = n.cost + gate_set.gates[mv.gate].cost;
                        if cost > budget {
                            return None;
                        }
                        let mut images = n.images.clone();
                        apply_to_frame(mv, gate_set, &mut images, dim);
                        let mut path = n.path.clone();
                        path.push(k as u16);
                        let score = pred.score(&images);
                        Some(Node {
                            path,
                            cost,
                            images,
                            score,
                        })
                    })
                    .collect()
            })
            .collect();
        let mut next: Vec<Node> = Vec::new();
        for child in children.into_iter().flatten() {
            if seen.insert(frame_key(&child.images)) {
                next.push(child);
            }
        }
        if let Some(hit) = next
            .iter()
            .filter(|n| pred.satisfied(&n.images))
            .min_by(|a, b| a.cost.cmp(&b.cost).then_with(|| a.path.cmp(&b.path)))
        {
            return finish(hit);
        }
        next.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.cost.cmp(&b.cost))
                .then_with(|| a.path.cmp(&b.path))
        });
        next.truncate(cfg.beam_width);
        beam = next;
    }
    ComplexityResult {
        value: budget + 1,
        status: Status::LowerBoundCutoff,
        witness: None,
        cutoff: budget,
        heuristic: true,
        frontier_limited: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::predicate::Predicate;
    use crate::lattice::{apply_circuit, StateVector};

    #[test]
    fn finds_ghz_preparation() {
        let l = LatticeSpec::new(2).unwrap();
        let set = GateSet::clifford_t();
        let p = Predicate::state_map(StateVector::zero(l), StateVector::ghz(l), 0.01).unwrap();
        let r = beam_search(&p, &set, &l, 40, &SearchConfig::default());
        assert_eq!(r.status, Status::UpperBound);
        assert!(r.heuristic);
        assert!(r.value >= 2);
        let out = apply_circuit(&StateVector::zero(l), r.witness.as_ref().unwrap(), &set).unwrap();
        assert!(p.satisfied(out.amplitudes()));
    }

    #[test]
    fn identity_query_is_free() {
        let l = LatticeSpec::new(3).unwrap();
        let s = StateVector::plus_product(l);
        let p = Predicate::state_map(s.clone(), s, 0.01).unwrap();
        let r = beam_search(&p, &GateSet::clifford_t(), &l, 40, &SearchConfig::default());
        assert_eq!(r.value, 0);
    }
}

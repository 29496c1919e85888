//! Meet-in-the-middle search for state-map predicates.
//!
//! Grows a forward tree from the source and a backward tree from the target
//! (using inverse gates), alternating one level at a time. A forward state `p`
//! at depth `a` and a backward state `q` at depth `b` join into a circuit of
//! cost `a + b` when `|<q|p>| >= 1 - delta`. After the trees reach depths
//! `ceil(c/2)` and `floor(c/2)` every circuit of cost `c` has been covered, so
//! the first joining cost is exact.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::bfs::{circuit_from_moves, frame_key, node_limit, Arena, SearchConfig};
use super::predicate::THRESHOLD_SLACK;
use super::result::ComplexityResult;
use crate::lattice::state::inner_slices;
use crate::lattice::{all_moves, Circuit, GateOp, GateSet, LatticeSpec, Move, StateVector, C64};

/// Probabilities used to bucket states for the approximate join.
const BUCKET_COORDS: usize = 3;

type BucketKey = [i32; BUCKET_COORDS];
/// `(parent node, move index, frame key, frame images)`.
type Child = (u32, u16, u64, Vec<C64>);

struct Tree {
    arena: Arena,
    seen: HashSet<u64>,
    states: Vec<Vec<C64>>,
    levels: Vec<Vec<u32>>,
    buckets: HashMap<BucketKey, Vec<u32>>,
    width: f64,
}

impl Tree {
    fn new(root: Vec<C64>, width: f64) -> Self {
        let mut t = Self {
            arena: Arena::new(),
            seen: HashSet::new(),
            states: Vec::new(),
            levels: vec![vec![0]],
            buckets: HashMap::new(),
            width,
        };
        t.seen.insert(frame_key(&root));
        t.index(0, &root);
        t.states.push(root);
        t
    }

    fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    fn index(&mut self, node: u32, state: &[C64]) {
        let key = bucket_key(state, self.width);
        self.buckets.entry(key).or_default().push(node);
    }

    /// Adds one level; returns false if nothing new was reachable.
    fn expand(&mut self, moves: &[Move], gate_set: &GateSet) -> bool {
        let last = self.levels.last().expect("root level exists").clone();
        let children: Vec<Vec<Child>> = last
            .par_iter()
            .map(|&node| {
                let base = &self.states[node as usize];
                moves
                    .iter()
                    .enumerate()
                    .map(|(k, mv)| {
                        let mut img = base.clone();
                        mv.apply(gate_set, &mut img);
                        (node, k as u16, frame_key(&img), img)
                    })
                    .collect()
            })
            .collect();
        let mut level = Vec::new();
        for (parent, k, key, img) in children.into_iter().flatten() {
            if !self.seen.insert(key) {
                continue;
            }
            let node = self.arena.push(parent, k);
            self.index(node, &img);
            self.states.push(img);
            level.push(node);
        }
        let grew = !level.is_empty();
        self.levels.push(level);
        grew
    }

    fn candidates(&self, state: &[C64]) -> Vec<u32> {
        let centre = bucket_key(state, self.width);
        let mut out = Vec::new();
        let dims = centre.len();
        for code in 0..3usize.pow(dims as u32) {
            let mut key = centre;
            let mut c = code;
            for slot in key.iter_mut() {
                *slot += (c % 3) as i32 - 1;
                c /= 3;
            }
            if let Some(nodes) = self.buckets.get(&key) {
                out.extend_from_slice(nodes);
            }
        }
        out
    }

    fn depth_of(&self, node: u32) -> usize {
        self.arena.path(node).len()
    }
}

fn bucket_key(state: &[C64], width: f64) -> BucketKey {
    let mut key = [0i32; BUCKET_COORDS];
    for (slot, a) in key.iter_mut().zip(state) {
        *slot = (a.norm_sqr() / width).floor() as i32;
    }
    key
}

/// Exact state-map complexity by meet-in-the-middle. Requires a gate set
/// with uniform costs; `budget` is in cost units.
pub fn meet_in_middle(
    source: &StateVector,
    target: &StateVector,
    delta: f64,
    gate_set: &GateSet,
    lattice: &LatticeSpec,
    budget: u32,
    cfg: &SearchConfig,
) -> ComplexityResult {
    debug_assert!(gate_set.has_uniform_cost());
    let unit = gate_set.min_cost();
    let max_gates = budget / unit;
    let moves = all_moves(gate_set, lattice);
    let threshold = 1.0 - delta - THRESHOLD_SLACK;
    // A single outcome probability moves by at most the trace distance.
    let width = (1.0 - (1.0 - delta).powi(2)).max(0.0).sqrt() + 1e-9;
    let limit = node_limit(cfg, lattice.dim());

    let mut fwd = Tree::new(source.amplitudes().to_vec(), width);
    let mut bwd = Tree::new(target.amplitudes().to_vec(), width);

    if inner_slices(target.amplitudes(), source.amplitudes()).norm() >= threshold {
        return ComplexityResult::exact(0, Circuit::empty(), budget);
    }
    let mut fwd_open = true;
    let mut bwd_open = true;
    for c in 1..=max_gates {
        let grow_forward = fwd.depth() <= bwd.depth();
        let grew = if grow_forward {
            fwd.expand(&moves, gate_set)
        } else {
            bwd.expand(&moves, gate_set)
        };
        if grow_forward {
            fwd_open = grew;
        } else {
            bwd_open = grew;
        }

        let (new_side, other) = if grow_forward { (&fwd, &bwd) } else { (&bwd, &fwd) };
        let fresh = new_side.levels.last().expect("level just pushed");
        let hits: Vec<Option<(u32, u32)>> = fresh
            .par_iter()
            .map(|&n| {
                let state = &new_side.states[n as usize];
                let mut matched: Option<u32> = None;
                for m in other.candidates(state) {
                    if matched.is_some_and(|best| best <= m) {
                        continue;
                    }
                    if inner_slices(&other.states[m as usize], state).norm() >= threshold {
                        matched = Some(m);
                    }
                }
                matched.map(|m| if grow_forward { (n, m) } else { (m, n) })
            })
            .collect();
        let best = hits
            .into_iter()
            .flatten()
            .min_by_key(|&(f, b)| (fwd.depth_of(f) + bwd.depth_of(b), f, b));
        if let Some((f, b)) = best {
            let cost = (fwd.depth_of(f) + bwd.depth_of(b)) as u32;
            debug_assert_eq!(cost, c);
            let witness = join_witness(&fwd, f, &bwd, b, &moves, gate_set);
            return ComplexityResult::exact(cost * unit, witness, budget);
        }
        if !fwd_open && !bwd_open {
            // Both reachable sets are closed; nothing further can join.
            return ComplexityResult::cutoff(budget + 1, budget);
        }
        if fwd.states.len() + bwd.states.len() > limit {
            log::warn!(
                "meet-in-the-middle exceeded {limit} nodes; exhausted through cost {}",
                c * unit
            );
            let mut r = ComplexityResult::cutoff((c + 1) * unit, budget);
            r.frontier_limited = true;
            return r;
        }
    }
    ComplexityResult::cutoff(budget + 1, budget)
}

fn join_witness(fwd: &Tree, f: u32, bwd: &Tree, b: u32, moves: &[Move], gate_set: &GateSet) -> Circuit {
    let mut circuit = circuit_from_moves(&fwd.arena.path(f), moves, gate_set);
    let back = bwd.arena.path(b);
    for &m in back.iter().rev() {
        let op = moves[m as usize].to_op(gate_set);
        let inverse = gate_set
            .get(&op.gate)
            .map(|g| g.inverse.clone())
            .expect("moves come from the gate set");
        circuit.push(GateOp {
            gate: inverse,
            sites: op.sites,
        });
    }
    circuit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::bfs::bfs_synthesize;
    use crate::complexity::predicate::{Predicate, SearchPredicate};
    use crate::lattice::apply_circuit;

    fn lat(n: usize) -> LatticeSpec {
        LatticeSpec::new(n).unwrap()
    }

    #[test]
    fn ghz_from_zero() {
        let l = lat(2);
        let set = GateSet::clifford_t();
        let r = meet_in_middle(
            &StateVector::zero(l),
            &StateVector::ghz(l),
            0.01,
            &set,
            &l,
            3,
            &SearchConfig::default(),
        );
        assert_eq!(r.value, 2);
        assert!(r.is_exact());
        let out = apply_circuit(&StateVector::zero(l), r.witness.as_ref().unwrap(), &set).unwrap();
        assert!(out.overlap(&StateVector::ghz(l)).unwrap() > 0.99);
    }

    #[test]
    fn agrees_with_plain_bfs_on_short_circuits() {
        let l = lat(2);
        let set = GateSet::clifford_t();
        let prep = Circuit::new(vec![
            GateOp::one("H", 0),
            GateOp::one("T", 0),
            GateOp::two("CNOT", 0, 1),
            GateOp::one("H", 1),
            GateOp::one("S", 1),
        ]);
        let target = apply_circuit(&StateVector::zero(l), &prep, &set).unwrap();
        let pred = Predicate::state_map(StateVector::zero(l), target.clone(), 0.01).unwrap();
        let cfg = SearchConfig::default();
        let plain = bfs_synthesize(&pred, &set, &l, 6, &cfg);
        let joined = meet_in_middle(&StateVector::zero(l), &target, 0.01, &set, &l, 6, &cfg);
        assert_eq!(plain.value, joined.value);
        assert_eq!(plain.status, joined.status);
        let w = joined.witness.unwrap();
        assert_eq!(w.len() as u32, joined.value);
        let out = apply_circuit(&StateVector::zero(l), &w, &set).unwrap();
        assert!(pred.satisfied(out.amplitudes()));
    }

    #[test]
    fn cutoff_when_out_of_reach() {
        let l = lat(3);
        let set = GateSet::clifford_t();
        let r = meet_in_middle(
            &StateVector::zero(l),
            &StateVector::all_ones(l),
            0.01,
            &set,
            &l,
            2,
            &SearchConfig::default(),
        );
        assert_eq!(r.value, 3);
        assert!(!r.is_exact());
    }
}

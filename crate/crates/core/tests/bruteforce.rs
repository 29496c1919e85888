//! Exhaustive enumeration over dense two-site unitaries, with no
//! deduplication, checked against certified oracle answers.

use branchlab::complexity::{ComplexityOracle, Predicate, SearchMode, Status};
use branchlab::corpus::{haar_state, random_circuit};
use branchlab::lattice::{apply_circuit, GateSet, LatticeSpec, StateVector, C64};

const DIM: usize = 4;
type Mat = [[C64; DIM]; DIM];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn one_site_gates() -> Vec<[[C64; 2]; 2]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    let t = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    vec![
        [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        [[o, z], [z, t]],
        [[o, z], [z, t.conj()]],
        [[o, z], [z, c(0.0, 1.0)]],
        [[o, z], [z, c(0.0, -1.0)]],
        [[z, o], [o, z]],
        [[o, z], [z, c(-1.0, 0.0)]],
    ]
}

/// Every placement on two sites, bit k of a basis index being site k.
fn placements() -> Vec<Mat> {
    let mut out = Vec::new();
    for g in one_site_gates() {
        for site in 0..2 {
            let mut m = [[c(0.0, 0.0); DIM]; DIM];
            for (x, row) in m.iter_mut().enumerate() {
                for (y, v) in row.iter_mut().enumerate() {
                    let other = 1 - site;
                    if (x >> other) & 1 == (y >> other) & 1 {
                        *v = g[(x >> site) & 1][(y >> site) & 1];
                    }
                }
            }
            out.push(m);
        }
    }
    for (control, target) in [(0, 1), (1, 0)] {
        let mut m = [[c(0.0, 0.0); DIM]; DIM];
        for (y, _) in m.clone().iter().enumerate() {
            let x = if (y >> control) & 1 == 1 { y ^ (1 << target) } else { y };
            m[x][y] = c(1.0, 0.0);
        }
        out.push(m);
    }
    out
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut m = [[c(0.0, 0.0); DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            m[i][j] = (0..DIM).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn apply(u: &Mat, v: &[C64]) -> Vec<C64> {
    (0..DIM).map(|i| (0..DIM).map(|k| u[i][k] * v[k]).sum()).collect()
}

fn braket(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// The three predicates, written out from their definitions.
fn holds(pred: &Predicate, u: &Mat) -> bool {
    const SLACK: f64 = 1e-12;
    match pred {
        Predicate::StateMap { source, target, delta } => {
            braket(target.amplitudes(), &apply(u, source.amplitudes())).norm() >= 1.0 - delta - SLACK
        }
        Predicate::TmDistinguish { a, b, epsilon } => {
            let ea = braket(a.amplitudes(), &apply(u, a.amplitudes()));
            let eb = braket(b.amplitudes(), &apply(u, b.amplitudes()));
            (ea - eb).norm() / 2.0 >= 1.0 - epsilon - SLACK
        }
        Predicate::TmInterfere { a, b, epsilon } => {
            let ab = braket(a.amplitudes(), &apply(u, b.amplitudes())).norm();
            let ba = braket(b.amplitudes(), &apply(u, a.amplitudes())).norm();
            (ab + ba) / 2.0 >= epsilon - SLACK
        }
    }
}

/// Least gate count `<= max_cost` satisfying `pred`, by plain enumeration.
fn brute_force(pred: &Predicate, max_cost: u32) -> Option<u32> {
    let gates = placements();
    let mut id = [[c(0.0, 0.0); DIM]; DIM];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    let mut level = vec![id];
    for cost in 0..=max_cost {
        if level.iter().any(|u| holds(pred, u)) {
            return Some(cost);
        }
        if cost == max_cost {
            break;
        }
        level = level
            .iter()
            .flat_map(|u| gates.iter().map(move |g| mul(g, u)))
            .collect();
    }
    None
}

fn lattice() -> LatticeSpec {
    LatticeSpec::new(2).unwrap()
}

fn check_agreement(pred: Predicate, budget: u32) {
    let oracle = ComplexityOracle::default();
    let got = oracle.query(pred.clone(), SearchMode::ExactBfs, budget).unwrap();
    match brute_force(&pred, budget) {
        Some(cost) => {
            assert_eq!(got.status, Status::Exact, "{pred:?}");
            assert_eq!(got.value, cost, "{pred:?}");
        }
        None => {
            assert_eq!(got.status, Status::LowerBoundCutoff, "{pred:?}");
            assert_eq!(got.value, budget + 1, "{pred:?}");
        }
    }
}

fn corpus() -> Vec<StateVector> {
    let set = GateSet::default();
    let l = lattice();
    let mut states = vec![
        StateVector::zero(l),
        StateVector::ghz(l),
        StateVector::all_ones(l),
        StateVector::plus_product(l),
    ];
    for seed in 0..12 {
        let c = random_circuit(l, &set, 1 + (seed as usize % 4), seed);
        states.push(apply_circuit(&StateVector::zero(l), &c, &set).unwrap());
    }
    states.push(haar_state(l, 3));
    states
}

#[test]
fn state_maps_match_enumeration() {
    let zero = StateVector::zero(lattice());
    for target in corpus() {
        check_agreement(Predicate::state_map(zero.clone(), target, 0.01).unwrap(), 4);
    }
}

#[test]
fn distinguishing_matches_enumeration() {
    let states = corpus();
    for (a, b) in states.iter().zip(states.iter().skip(1)).take(8) {
        check_agreement(Predicate::distinguish(a.clone(), b.clone(), 0.1).unwrap(), 4);
    }
}

#[test]
fn interference_matches_enumeration() {
    let l = lattice();
    let pairs = [
        (StateVector::zero(l), StateVector::all_ones(l)),
        (StateVector::basis(l, 1).unwrap(), StateVector::basis(l, 2).unwrap()),
        (StateVector::basis(l, 0).unwrap(), StateVector::basis(l, 1).unwrap()),
    ];
    for (a, b) in pairs {
        check_agreement(Predicate::interfere(a, b, 0.1).unwrap(), 3);
    }
}

#[test]
fn enumeration_sanity() {
    let l = lattice();
    let p = Predicate::state_map(StateVector::zero(l), StateVector::ghz(l), 0.01).unwrap();
    assert_eq!(brute_force(&p, 3), Some(2));
    assert_eq!(placements().len(), 16);
}

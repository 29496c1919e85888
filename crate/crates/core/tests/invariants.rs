use branchlab::complexity::{ComplexityOracle, ComplexityResult, Predicate, SearchMode, Status};
use branchlab::corpus::{haar_state, random_circuit};
use branchlab::dynamics::{Direction, HamiltonianSpec, Propagator};
use branchlab::lattice::{
    apply_circuit, make_decomposition, Decomposition, GateSet, LatticeSpec, ProjectorSpec, StateVector, C64,
};
use branchlab::sampling::{sample_branches, SamplingPlan};
use branchlab::tm::{distinguishing_complexity, evaluate_decomposition, interference_complexity, TmConfig};
use branchlab::weingarten::entropy;
use proptest::prelude::*;

fn circuit_state(n: usize, depth: usize, seed: u64) -> StateVector {
    let l = LatticeSpec::new(n).unwrap();
    let set = GateSet::default();
    apply_circuit(&StateVector::zero(l), &random_circuit(l, &set, depth, seed), &set).unwrap()
}

fn exact(budget: u32) -> TmConfig {
    TmConfig::new(0.1, SearchMode::ExactBfs).with_budget(budget)
}

/// `(U|x>, U|y>)` for a random circuit `U`: an orthogonal pair.
fn orthogonal_pair(x: usize, y: usize, depth: usize, seed: u64) -> (StateVector, StateVector) {
    let l = LatticeSpec::new(2).unwrap();
    let set = GateSet::default();
    let u = random_circuit(l, &set, depth, seed);
    let y = if x == y { (y + 1) % 4 } else { y };
    (
        apply_circuit(&StateVector::basis(l, x).unwrap(), &u, &set).unwrap(),
        apply_circuit(&StateVector::basis(l, y).unwrap(), &u, &set).unwrap(),
    )
}

/// What a search at `low` must say given the answer at `high >= low`.
fn consistent(low: &ComplexityResult, high: &ComplexityResult, low_budget: u32) -> bool {
    match (low.status, high.status) {
        (Status::Exact, Status::Exact) => low.value == high.value,
        (Status::Exact, _) => false,
        (Status::LowerBoundCutoff, Status::Exact) => high.value > low_budget,
        (Status::LowerBoundCutoff, Status::LowerBoundCutoff) => high.value >= low.value,
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circuits_preserve_norm(n in 1usize..=8, depth in 0usize..=50, seed in any::<u64>()) {
        let l = LatticeSpec::new(n).unwrap();
        let set = GateSet::default();
        let psi = haar_state(l, seed);
        let out = apply_circuit(&psi, &random_circuit(l, &set, depth, seed ^ 1), &set).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_round_trip(n in 1usize..=6, depth in 0usize..=50, seed in any::<u64>()) {
        let l = LatticeSpec::new(n).unwrap();
        let set = GateSet::default();
        let psi = haar_state(l, seed);
        let c = random_circuit(l, &set, depth, seed.wrapping_add(7));
        let back = apply_circuit(&psi, &c.then(&c.inverse(&set).unwrap()), &set).unwrap();
        prop_assert!(back.overlap(&psi).unwrap() > 1.0 - 1e-10);
        prop_assert_eq!(c.inverse(&set).unwrap().cost(&set).unwrap(), c.cost(&set).unwrap());
    }

    #[test]
    fn random_partitions_decompose(n in 1usize..=5, groups in 1usize..=6, seed in any::<u64>(), labels in proptest::collection::vec(0usize..6, 32)) {
        let l = LatticeSpec::new(n).unwrap();
        let psi = haar_state(l, seed);
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for x in 0..l.dim() {
            parts[labels[x] % groups].push(x);
        }
        parts.retain(|p| !p.is_empty());
        let projectors: Vec<ProjectorSpec> = parts.into_iter().map(|indices| ProjectorSpec::BasisStates { indices }).collect();
        let d = make_decomposition(&psi, &projectors).unwrap();
        prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let mut sum = vec![C64::new(0.0, 0.0); l.dim()];
        for c in d.components() {
            for (s, a) in sum.iter_mut().zip(c.amplitudes()) {
                *s += a;
            }
        }
        for (s, a) in sum.iter().zip(psi.amplitudes()) {
            prop_assert!((s - a).norm() < 1e-10);
        }
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                prop_assert!(d.components()[i].inner(&d.components()[j]).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn entropy_peaks_at_equal_weights(raw in proptest::collection::vec(0.0f64..1.0, 1..8)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let k = w.len() as f64;
        prop_assert!(entropy(&w) <= k.ln() + 1e-12);
        prop_assert!((entropy(&vec![1.0 / k; w.len()]) - k.ln()).abs() < 1e-12);
        prop_assert!(entropy(&w) >= -1e-15);
    }

    #[test]
    fn propagator_is_reversible(n in 2usize..=5, steps in 1usize..=20, seed in any::<u64>(), g in -1.5f64..1.5) {
        let l = LatticeSpec::new(n).unwrap();
        let psi = haar_state(l, seed);
        let p = Propagator::new(&HamiltonianSpec::ising(0.7, g, 0.05).with_apparatus(0, 1.0), &l).unwrap();
        let mut amps = psi.amplitudes().to_vec();
        p.evolve(&mut amps, steps, Direction::Forward);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        p.evolve(&mut amps, steps, Direction::Backward);
        for (a, b) in amps.iter().zip(psi.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tm_complexities_are_symmetric(x in 0usize..4, y in 0usize..4, depth in 0usize..6, seed in any::<u64>()) {
        let (a, b) = orthogonal_pair(x, y, depth, seed);
        let o = ComplexityOracle::default();
        let cfg = exact(3);
        prop_assert_eq!(
            distinguishing_complexity(&o, &a, &b, &cfg).unwrap().value,
            distinguishing_complexity(&o, &b, &a, &cfg).unwrap().value
        );
        prop_assert_eq!(
            interference_complexity(&o, &a, &b, &cfg).unwrap().value,
            interference_complexity(&o, &b, &a, &cfg).unwrap().value
        );
    }

    #[test]
    fn budgets_refine_consistently(depth in 0usize..8, seed in any::<u64>(), low in 0u32..4) {
        let zero = StateVector::zero(LatticeSpec::new(2).unwrap());
        let target = circuit_state(2, depth, seed);
        let pred = Predicate::state_map(zero, target, 0.01).unwrap();
        // Separate oracles, so no answer is shared through the cache.
        let a = ComplexityOracle::default().query(pred.clone(), SearchMode::ExactBfs, low).unwrap();
        let b = ComplexityOracle::default().query(pred, SearchMode::ExactBfs, low + 3).unwrap();
        prop_assert!(consistent(&a, &b, low), "{a:?} vs {b:?}");
    }

    #[test]
    fn epsilon_monotone(x in 0usize..4, y in 0usize..4, depth in 0usize..6, seed in any::<u64>()) {
        let (a, b) = orthogonal_pair(x, y, depth, seed);
        let o = ComplexityOracle::default();
        let loose = TmConfig::new(0.3, SearchMode::ExactBfs).with_budget(3);
        let tight = TmConfig::new(0.05, SearchMode::ExactBfs).with_budget(3);
        // Distinguishing gets easier and interfering harder as epsilon grows.
        let (dl, dt) = (distinguishing_complexity(&o, &a, &b, &loose).unwrap(), distinguishing_complexity(&o, &a, &b, &tight).unwrap());
        if dl.is_exact() && dt.is_exact() {
            prop_assert!(dl.value <= dt.value);
        }
        let (il, it) = (interference_complexity(&o, &a, &b, &loose).unwrap(), interference_complexity(&o, &a, &b, &tight).unwrap());
        if il.is_exact() && it.is_exact() {
            prop_assert!(il.value >= it.value);
        }
    }

    #[test]
    fn branch_order_does_not_matter(depth in 0usize..6, seed in any::<u64>(), site in 0usize..2) {
        let psi = circuit_state(2, depth, seed);
        let sv = |v: u8| ProjectorSpec::SiteValues { sites: vec![site], values: vec![v] };
        let fwd = make_decomposition(&psi, &[sv(0), sv(1)]).unwrap();
        prop_assume!(fwd.len() == 2);
        let rev = make_decomposition(&psi, &[sv(1), sv(0)]).unwrap();
        let o = ComplexityOracle::default();
        let (r1, r2) = (evaluate_decomposition(&o, &fwd, &exact(3)).unwrap(), evaluate_decomposition(&o, &rev, &exact(3)).unwrap());
        prop_assert_eq!((r1.branchiness, r1.certified, r1.c_i_min, r1.c_d_max), (r2.branchiness, r2.certified, r2.c_i_min, r2.c_d_max));
    }

    #[test]
    fn global_phase_is_invisible(depth in 0usize..6, seed in any::<u64>(), phase in 0.0f64..std::f64::consts::TAU) {
        let zero = StateVector::zero(LatticeSpec::new(2).unwrap());
        let t = circuit_state(2, depth, seed);
        let o = ComplexityOracle::default();
        let a = o.state_complexity(&zero, &t, 0.01, SearchMode::ExactBfs, 3).unwrap();
        let b = o.state_complexity(&zero, &t.scaled(C64::from_polar(1.0, phase)), 0.01, SearchMode::ExactBfs, 3).unwrap();
        prop_assert_eq!((a.value, a.status), (b.value, b.status));
    }

    #[test]
    fn sampling_is_unbiased(raw in proptest::collection::vec(0.01f64..1.0, 2..6), seed in any::<u64>()) {
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let n = 4000;
        let draws = sample_branches(&SamplingPlan::new(w.clone(), n, seed).unwrap());
        for (k, p) in w.iter().enumerate() {
            let f = draws.iter().filter(|&&i| i == k).count() as f64 / n as f64;
            prop_assert!((f - p).abs() <= 5.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-9, "branch {k}: {f} vs {p}");
        }
    }
}

#[test]
fn trivial_decomposition_has_no_pairs() {
    let psi = circuit_state(3, 5, 2);
    let d = Decomposition::trivial(psi);
    assert!(evaluate_decomposition(&ComplexityOracle::default(), &d, &exact(2)).is_err());
}

mod common;

use common::preprocessed_case;
use csdr_core::analysis::{
    check_feasibility, normalized_objective, rank_report, recover_unconverted, recover_voltage, stitch_voltages,
    RecoveredSolution, RecoveryOptions, DEFAULT_RANK_THRESHOLD,
};
use csdr_core::chordal::{clique_tree_of, Ordering, SparsityPattern};
use csdr_core::conversion::{aggregate_pattern, convert, ConsistencyStrategy};
use csdr_core::formulation::build_sdr;
use csdr_core::netmodel::synthetic::synthetic_network;
use csdr_core::netmodel::{Branch, Bus, Generator, GeneratorKind, Network};
use csdr_core::solver::{solve_hermitian, SolverOptions, Status};
use csdr_core::{Complex64, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_connected(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> SparsityPattern {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    SparsityPattern::from_edges(n, edges)
}

fn random_voltage(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::from_polar(rng.random_range(0.9..1.1), rng.random_range(-0.5..0.5))).collect()
}

fn clique_blocks(v: &[Complex64], cliques: &[Vec<usize>]) -> Vec<DMatrix<Complex64>> {
    cliques.iter().map(|c| DMatrix::from_fn(c.len(), c.len(), |a, b| v[c[a]] * v[c[b]].conj())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn recovery_round_trip(seed in any::<u64>(), n in 2usize..=20, extra in 0usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pattern = random_connected(n, extra, &mut rng);
        let (_, tree) = clique_tree_of(&pattern, &Ordering::Amd).unwrap();
        let v = random_voltage(n, &mut rng);
        let reference = rng.random_range(0..n);
        let blocks = clique_blocks(&v, &tree.cliques);
        let align = v[reference].conj() / v[reference].norm();
        for strategy in [ConsistencyStrategy::Full, ConsistencyStrategy::Band(1), ConsistencyStrategy::Arrow(1)] {
            let got = stitch_voltages(&blocks, &tree, strategy, reference, &RecoveryOptions::default()).unwrap();
            for (a, b) in got.iter().zip(&v) {
                prop_assert!((a - b * align).norm() <= 1e-8, "{} vs {}", a, b * align);
            }
        }
        let diag = stitch_voltages(&blocks, &tree, ConsistencyStrategy::Diagonal, reference, &RecoveryOptions::default());
        if tree.len() > 1 {
            prop_assert!(matches!(diag, Err(Error::InsufficientCoupling)));
        }
    }

    #[test]
    fn rank_report_permutation_invariant(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = &m * m.adjoint();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let b = DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
        let (ra, rb) = (rank_report(&[a], 1e4).unwrap(), rank_report(&[b], 1e4).unwrap());
        prop_assert!((ra.min_ratio - rb.min_ratio).abs() <= 1e-8 * ra.min_ratio);
        prop_assert!((ra.blocks[0].lambda1 - rb.blocks[0].lambda1).abs() <= 1e-10 * (1.0 + ra.blocks[0].lambda1));
    }
}

fn bus(id: usize, p: f64, q: f64) -> Bus {
    Bus {
        id,
        v_min: 0.9,
        v_max: 1.1,
        p_demand: p,
        q_demand: q,
        shunt_g: 0.0,
        shunt_b: 0.0,
    }
}

fn generator(bus: usize) -> Generator {
    Generator {
        id: 1,
        bus,
        p_min: 0.0,
        p_max: 2.0,
        q_min: -1.0,
        q_max: 1.0,
        alpha: 0.0,
        beta: 1.0,
        cost_constant: 0.0,
        kind: GeneratorKind::Linear,
    }
}

/// Two buses joined by a lossless line of reactance 0.1; voltages 1∠0 and
/// 1∠−0.1. By hand: P = 10 sin 0.1 flows from bus 1 to bus 2 and each end
/// absorbs Q = 10 (1 − cos 0.1).
fn two_bus() -> (Network, Vec<Complex64>) {
    let p = 10.0 * 0.1f64.sin();
    let q = 10.0 * (1.0 - 0.1f64.cos());
    let net = Network {
        base_mva: 100.0,
        buses: vec![bus(1, 0.0, 0.0), bus(2, p, -q)],
        generators: vec![generator(0)],
        branches: vec![Branch {
            id: 1,
            from: 0,
            to: 1,
            r: 0.0,
            x: 0.1,
            b_charging: 0.0,
            tap_ratio: 1.0,
            phase_shift: 0.0,
            s_max: Some(1.0),
        }],
        flow_limited: vec![0],
        reference_bus: 0,
    };
    (net, vec![Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, -0.1)])
}

#[test]
fn feasible_two_bus_point() {
    let (net, v) = two_bus();
    let rec = RecoveredSolution::from_voltages(&net, v, 0.0).unwrap();
    let (p, q) = rec.dispatch[0];
    assert!((p - 10.0 * 0.1f64.sin()).abs() < 1e-12);
    assert!((q - 10.0 * (1.0 - 0.1f64.cos())).abs() < 1e-12);
    let report = check_feasibility(&net, &rec).unwrap();
    assert!(report.max_violation() <= 1e-8, "{report:?}");
    assert!((report.objective_gap - p).abs() < 1e-12);
}

#[test]
fn voltage_violation_reported() {
    let (net, _) = two_bus();
    let v = vec![Complex64::new(1.2, 0.0), Complex64::new(1.2, 0.0)];
    let rec = RecoveredSolution::from_voltages(&net, v, 0.0).unwrap();
    let report = check_feasibility(&net, &rec).unwrap();
    assert!((report.max_voltage_violation - 0.1).abs() < 1e-12);
}

#[test]
fn flat_start_without_demand_is_balanced() {
    let (mut net, _) = two_bus();
    net.buses[1].p_demand = 0.0;
    net.buses[1].q_demand = 0.0;
    net.generators[0].p_min = 0.0;
    net.generators[0].q_min = 0.0;
    let rec = RecoveredSolution::from_voltages(&net, vec![Complex64::new(1.0, 0.0); 2], 0.0).unwrap();
    let report = check_feasibility(&net, &rec).unwrap();
    assert_eq!(report.max_violation(), 0.0, "{report:?}");
    assert_eq!(report.objective_gap, 0.0);
}

#[test]
fn case9_exact_relaxation_recovers_feasible_point() {
    let net = preprocessed_case("case9");
    let (lp, vm) = build_sdr(&net).unwrap();
    let sol = solve_hermitian(&lp, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status(), Status::Optimal);
    let rec = recover_unconverted(&lp, &sol.z, &net, &vm, &RecoveryOptions::default()).unwrap();
    let report = check_feasibility(&net, &rec).unwrap();
    assert!(report.max_violation() < 1e-4, "{report:?}");
    assert!(rec.objective >= sol.objective() - 1e-4 * sol.objective().abs());
    assert!(report.objective_gap <= 1e-3 * sol.objective().abs(), "{report:?}");
    assert!(rec.dispatch_discrepancy.unwrap() < 1e-3);

    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
    let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Full, None).unwrap();
    let csol = solve_hermitian(&conv.lp, &SolverOptions::default()).unwrap();
    assert_eq!(csol.status(), Status::Optimal);
    let crec = recover_voltage(&conv, &csol.z, &net, &vm, &RecoveryOptions::default()).unwrap();
    for (a, b) in crec.voltages.iter().zip(&rec.voltages) {
        assert!((a - b).norm() < 1e-3, "{a} vs {b}");
    }
    let blocks = conv.blocks(&csol.z);
    assert!(rank_report(&blocks, DEFAULT_RANK_THRESHOLD).unwrap().rank_one);
}

#[test]
fn band_objectives_increase_with_bandwidth() {
    let net = synthetic_network(6, 6, 31).network;
    let (lp, vm) = build_sdr(&net).unwrap();
    let opts = SolverOptions::default();
    let sdr = solve_hermitian(&lp, &opts).unwrap();
    assert_eq!(sdr.status(), Status::Optimal);
    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
    let mut last = f64::NEG_INFINITY;
    for strategy in [ConsistencyStrategy::Band(1), ConsistencyStrategy::Band(2), ConsistencyStrategy::Band(3)] {
        let conv = convert(&lp, &vm, &tree, strategy, None).unwrap();
        let s = solve_hermitian(&conv.lp, &opts).unwrap();
        assert_eq!(s.status(), Status::Optimal);
        let ratio = normalized_objective(s.objective(), sdr.objective()).unwrap();
        assert!(ratio >= last - 1e-6, "{strategy}: {ratio} < {last}");
        assert!(ratio <= 1.0 + 1e-6, "{strategy}: {ratio}");
        last = ratio;
    }
}

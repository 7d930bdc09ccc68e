use std::collections::{BTreeMap, HashSet};

use csdr_core::chordal::{amalgamate, clique_tree_of, Ordering, SparsityPattern};
use csdr_core::conversion::{
    aggregate_pattern, consistency_constraints, consistency_count, convert, count_report, real_embedding,
    ConsistencyConstraint, ConsistencyStrategy, Part, RowTag,
};
use csdr_core::formulation::{build_sdr, hermitian_coord, hermitian_to_real, lift_point, pack_hermitian};
use csdr_core::netmodel::{build_admittance, parse_network_json, synthetic::synthetic_network, Network};
use csdr_core::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn network(n: usize, branches: &[(usize, usize)]) -> Network {
    let buses: Vec<String> = (1..=n)
        .map(|i| format!(r#"{{"id": {i}, "v_min": 0.9, "v_max": 1.1, "p_demand": 0.2, "q_demand": 0.05}}"#))
        .collect();
    let br: Vec<String> = branches
        .iter()
        .enumerate()
        .map(|(k, (a, b))| format!(r#"{{"id": {}, "from": {}, "to": {}, "r": 0.01, "x": 0.1, "b_charging": 0.02}}"#, k + 1, a + 1, b + 1))
        .collect();
    let text = format!(
        r#"{{"schema_version": 1, "base_mva": 100, "buses": [{}],
        "generators": [{{"id": 1, "bus": 1, "p_min": 0, "p_max": 3, "q_min": -2, "q_max": 2, "alpha": 1, "beta": 2}}],
        "branches": [{}]}}"#,
        buses.join(","),
        br.join(",")
    );
    parse_network_json(&text).unwrap()
}

/// The four-bus pattern with cliques {1,2,3} and {2,3,4}.
fn fig1() -> Network {
    network(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
}

fn dispatch_for(net: &Network, v: &[Complex64]) -> Vec<(f64, f64)> {
    let i = build_admittance(net).unwrap().mul_vec(v);
    net.generators
        .iter()
        .map(|g| {
            let s = v[g.bus] * i[g.bus].conj();
            let b = &net.buses[g.bus];
            (s.re + b.p_demand, s.im + b.q_demand)
        })
        .collect()
}

#[test]
fn fig1_full_conversion() {
    let net = fig1();
    let (lp, vm) = build_sdr(&net).unwrap();
    let pattern = aggregate_pattern(&lp, &vm);
    assert!(!pattern.has_edge(0, 3));
    let (_, tree) = clique_tree_of(&pattern, &Ordering::Given(vec![0, 1, 2, 3])).unwrap();
    assert_eq!(tree.cliques, vec![vec![0, 1, 2], vec![1, 2, 3]]);
    let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Full, None).unwrap();
    assert_eq!(conv.num_consistency(), 4);
    // The shared entry (2,3) belongs to the postorder-first clique only.
    assert_eq!(conv.assignment.owner(1, 2), Some(0));
    assert_eq!(conv.assignment.owner(0, 3), None);
    let report = count_report(&conv);
    assert_eq!((report.r, report.s), (lp.num_rows(), 4));
    assert_eq!(report.block_orders, vec![3, 3]);
    assert_eq!(report.sum_squared_orders, 18);
    let tags: Vec<_> = conv.tags[lp.num_rows()..].to_vec();
    let reals = tags.iter().filter(|t| matches!(t, RowTag::Consistency(c) if c.part == Part::Real)).count();
    assert_eq!(reals, 3);
}

#[test]
fn three_bus_path() {
    let net = network(3, &[(0, 1), (1, 2)]);
    let (lp, vm) = build_sdr(&net).unwrap();
    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
    for s in [ConsistencyStrategy::Full, ConsistencyStrategy::Diagonal] {
        let conv = convert(&lp, &vm, &tree, s, None).unwrap();
        assert_eq!(conv.num_consistency(), 1);
        assert_eq!(count_report(&conv).block_orders, vec![2, 2]);
    }
    assert!(convert(&lp, &vm, &tree, ConsistencyStrategy::Sparse, None).is_err());
}

/// Coefficient of every (row, entry, part) of the original matrix variable,
/// rebuilt from the converted rows by mapping block coordinates back.
type EntryCoefs = BTreeMap<(usize, usize, usize, bool), f64>;

#[test]
fn split_data_reassembles() {
    let sc = synthetic_network(6, 3, 17);
    let (lp, vm) = build_sdr(&sc.network).unwrap();
    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
    let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Full, None).unwrap();
    let mut back: BTreeMap<usize, (usize, usize, bool)> = BTreeMap::new();
    for (k, c) in tree.cliques.iter().enumerate() {
        for lj in 0..c.len() {
            for li in 0..=lj {
                let (re, im) = hermitian_coord(li, lj);
                back.insert(conv.block_offsets[k] + re, (c[li], c[lj], false));
                if let Some(im) = im {
                    back.insert(conv.block_offsets[k] + im, (c[li], c[lj], true));
                }
            }
        }
    }
    let mut original = EntryCoefs::new();
    let mut rebuilt = EntryCoefs::new();
    for (r, row) in lp.rows.iter().enumerate() {
        for &(k, v) in &row.terms {
            if vm.x_block.contains(&k) {
                let local = k - vm.x_block.start;
                let (i, j, im) = (0..vm.order)
                    .flat_map(|j| (0..=j).map(move |i| (i, j)))
                    .find_map(|(i, j)| {
                        let (re, imc) = hermitian_coord(i, j);
                        if re == local {
                            Some((i, j, false))
                        } else if imc == Some(local) {
                            Some((i, j, true))
                        } else {
                            None
                        }
                    })
                    .unwrap();
                *original.entry((r, i, j, im)).or_default() += v;
            } else {
                assert_eq!(conv.lp.rows[r].terms.iter().find(|t| t.0 == conv.map_plain(k)).map(|t| t.1), Some(v));
            }
        }
        for &(k, v) in &conv.lp.rows[r].terms {
            if let Some(&(i, j, im)) = back.get(&k) {
                *rebuilt.entry((r, i, j, im)).or_default() += v;
            }
        }
    }
    assert_eq!(original, rebuilt);
}

#[test]
fn embedding_doubles_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in 1..6 {
        let a = DMatrix::from_fn(p, p, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let x = &a + a.adjoint();
        let mut ex: Vec<f64> = x.clone().symmetric_eigenvalues().iter().flat_map(|&l| [l, l]).collect();
        let mut ez: Vec<f64> = hermitian_to_real(&x).symmetric_eigenvalues().iter().copied().collect();
        ex.sort_by(f64::total_cmp);
        ez.sort_by(f64::total_cmp);
        for (u, v) in ex.iter().zip(&ez) {
            assert!((u - v).abs() < 1e-10, "{ex:?} vs {ez:?}");
        }
    }
}

#[test]
fn converted_json_has_tags() {
    let net = fig1();
    let (lp, vm) = build_sdr(&net).unwrap();
    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
    let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Band(1), None).unwrap();
    let v: serde_json::Value = serde_json::from_str(&conv.to_json().unwrap()).unwrap();
    assert_eq!(v["strategy"]["kind"], "band");
    assert_eq!(v["tags"][0]["kind"], "original");
    assert_eq!(v["tags"].as_array().unwrap().len(), conv.lp.num_rows());
}

fn random_pattern(n: usize, extra: usize, seed: u64) -> SparsityPattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    SparsityPattern::from_edges(n, edges)
}

fn as_set(c: Vec<ConsistencyConstraint>) -> HashSet<ConsistencyConstraint> {
    c.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn counts_and_lattice(seed in 0u64..1_000_000, n in 2usize..40, extra in 0usize..40, merge in any::<bool>()) {
        let pattern = random_pattern(n, extra, seed);
        let (_, mut tree) = clique_tree_of(&pattern, &Ordering::Amd).unwrap();
        if merge {
            tree = amalgamate(&tree, 4, 4);
        }
        let edges = pattern.edges();
        let mut strategies = vec![ConsistencyStrategy::Full, ConsistencyStrategy::Sparse, ConsistencyStrategy::Diagonal];
        for r in 0..5 {
            strategies.push(ConsistencyStrategy::Band(r));
            strategies.push(ConsistencyStrategy::Arrow(r));
        }
        for s in strategies {
            let list = consistency_constraints(&tree, s, Some(&edges)).unwrap();
            prop_assert_eq!(list.len(), consistency_count(&tree, s, Some(&edges)).unwrap(), "{}", s);
            prop_assert!(list.iter().all(|c| c.part == Part::Real || c.a != c.b));
        }
        let set = |s| as_set(consistency_constraints(&tree, s, Some(&edges)).unwrap());
        let full = set(ConsistencyStrategy::Full);
        prop_assert!(set(ConsistencyStrategy::Diagonal).is_subset(&set(ConsistencyStrategy::Band(0))));
        prop_assert_eq!(set(ConsistencyStrategy::Diagonal), set(ConsistencyStrategy::Band(0)));
        for r in 0..4 {
            prop_assert!(set(ConsistencyStrategy::Band(r)).is_subset(&set(ConsistencyStrategy::Band(r + 1))));
            prop_assert!(set(ConsistencyStrategy::Arrow(r)).is_subset(&set(ConsistencyStrategy::Arrow(r + 1))));
        }
        prop_assert!(set(ConsistencyStrategy::Band(n)).eq(&full));
        prop_assert!(set(ConsistencyStrategy::Sparse).is_subset(&full));
    }

    #[test]
    fn acyclic_full_count(seed in 0u64..1_000_000, n in 3usize..60) {
        let pattern = random_pattern(n, 0, seed);
        let (_, tree) = clique_tree_of(&pattern, &Ordering::Amd).unwrap();
        prop_assert_eq!(tree.len(), n - 1);
        prop_assert!(tree.cliques.iter().all(|c| c.len() == 2));
        // One unit separator per clique-tree edge.
        prop_assert_eq!(consistency_count(&tree, ConsistencyStrategy::Full, None).unwrap(), n - 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lifted_point_feasible_and_embedding_exact(seed in 0u64..10_000, n in 3usize..12) {
        let sc = synthetic_network(n, n / 2, seed);
        let (lp, vm) = build_sdr(&sc.network).unwrap();
        let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
        let z = lift_point(&sc.network, &vm, &sc.voltage, &dispatch_for(&sc.network, &sc.voltage));
        let edges = sc.network.edges();
        for s in [ConsistencyStrategy::Full, ConsistencyStrategy::Band(1), ConsistencyStrategy::Sparse] {
            let conv = convert(&lp, &vm, &tree, s, Some(&edges)).unwrap();
            let w = conv.lift(&z, &vm);
            prop_assert!(conv.lp.max_row_residual(&w) < 1e-9);
            prop_assert!(conv.lp.cone.violation(&w) < 1e-9);
            prop_assert!((conv.lp.objective_value(&w) - lp.objective_value(&z)).abs() < 1e-9 * (1.0 + lp.objective_value(&z).abs()));
            let emb = real_embedding(&conv.lp);
            prop_assert_eq!(emb.lp.num_rows(), conv.lp.num_rows());
            let wr = emb.to_real(&w);
            let (a, b) = (emb.lp.objective_value(&wr), conv.lp.objective_value(&w));
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{} vs {}", a, b);
            prop_assert!(emb.lp.max_row_residual(&wr) < 1e-9);
            let back = emb.to_complex(&wr);
            prop_assert!(back.iter().zip(&w).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn owned_entries_reassemble_psd_cliques(seed in 0u64..10_000) {
        let sc = synthetic_network(8, 5, seed);
        let (lp, vm) = build_sdr(&sc.network).unwrap();
        let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
        let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Full, None).unwrap();
        let z = lift_point(&sc.network, &vm, &sc.voltage, &dispatch_for(&sc.network, &sc.voltage));
        let w = conv.lift(&z, &vm);
        let owned = conv.owned_entries(&w);
        let x = vm.x_matrix(&z);
        for ((i, j), v) in owned {
            prop_assert!((v - x[(i, j)]).norm() < 1e-12);
        }
        for k in 0..tree.len() {
            let block = conv.block(&w, k);
            let min = block.symmetric_eigenvalues().min();
            prop_assert!(min > -1e-9);
            prop_assert_eq!(pack_hermitian(&block).len(), tree.cliques[k].len().pow(2));
        }
    }
}

#[test]
fn ieee118_full_ratio() {
    let text = std::fs::read_to_string(format!("{}/../../data/case118.m", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let net = csdr_core::netmodel::parse_matpower_case(&text).unwrap();
    let (lp, vm) = build_sdr(&net).unwrap();
    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd).unwrap();
    let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Full, None).unwrap();
    let report = count_report(&conv);
    println!("{report:?}");
    assert!((1.4..=2.2).contains(&report.ratio), "{}", report.ratio_display());
}

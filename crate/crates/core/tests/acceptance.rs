//! Acceptance run: one PASS/FAIL line per criterion, followed by the
//! individual checks behind any failure.
//!
//! Checks listed in `KNOWN_UNATTAINABLE` are expected to fail and keep the
//! run green only while they still fail; any other failure makes the run
//! exit nonzero.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::cbf::{cone_totals, read_cbf, split_point};
use common::{data_case, fixture, preprocessed_case};
use csdr_core::analysis::{infer_dispatch, normalized_objective, recover_voltage, RecoveryOptions};
use csdr_core::chordal::{
    amalgamate, chordal_embedding, clique_tree_of, verify_chordal, verify_running_intersection, CliqueTree, Ordering,
    SparsityPattern,
};
use csdr_core::conversion::{
    aggregate_pattern, consistency_constraints, convert, count_report, real_embedding, ConsistencyStrategy,
};
use csdr_core::formulation::{
    build_sdr, hermitian_to_real, lift_point, soc_minor_relaxation, ConeLp, ConeSegment, ConeSpec, LinearForm,
};
use csdr_core::netmodel::synthetic::synthetic_network;
use csdr_core::solver::{
    export_conelp, farkas_residual, ray_residual, solve, solve_hermitian, Certificate, ExportFormat, SolverOptions,
    Status,
};
use csdr_core::{Complex64, Error};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(criterion, check name)` pairs that cannot hold; see the project notes.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(2, "acyclic s = n-1")];

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn runtime(budget: Duration, start: Instant) -> Check {
    let t = start.elapsed();
    check(format!("runtime < {budget:?}"), t < budget, format!("{t:.2?}"))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

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

fn tree_of(p: &ConeLp, vm: &csdr_core::formulation::VariableMap) -> CliqueTree {
    clique_tree_of(&aggregate_pattern(p, vm), &Ordering::Amd).unwrap().1
}

fn c1_constraint_counts() -> Vec<Check> {
    let mut out = Vec::new();
    for (name, expected) in [("case118", 742), ("case300", 1545)] {
        let net = data_case(name);
        let start = Instant::now();
        let (lp, _) = build_sdr(&net).unwrap();
        let t = start.elapsed();
        out.push(check(format!("{name} r = {expected}"), lp.num_rows() == expected, format!("r = {}", lp.num_rows())));
        out.push(check(format!("{name} runtime < 1s"), t < Duration::from_secs(1), format!("{t:.2?}")));
    }
    out
}

/// Closed-form consistency counts from the separators alone.
fn closed_form(tree: &CliqueTree, strategy: ConsistencyStrategy, edges: &BTreeSet<(usize, usize)>) -> usize {
    tree.separators()
        .iter()
        .map(|eta| {
            let e = eta.len();
            match strategy {
                ConsistencyStrategy::Full => e * e,
                ConsistencyStrategy::Band(rho) => e + 2 * (1..=rho.min(e.saturating_sub(1))).map(|l| e - l).sum::<usize>(),
                ConsistencyStrategy::Sparse => {
                    let pairs = eta
                        .iter()
                        .enumerate()
                        .flat_map(|(a, &i)| eta[a + 1..].iter().map(move |&j| (i, j)))
                        .filter(|p| edges.contains(p))
                        .count();
                    e + 2 * pairs
                }
                _ => unreachable!(),
            }
        })
        .sum()
}

fn c2_conversion_counts() -> Vec<Check> {
    let start = Instant::now();
    let mut r = rng(2);
    let mut mismatches = Vec::new();
    let strategies = [
        ConsistencyStrategy::Full,
        ConsistencyStrategy::Band(1),
        ConsistencyStrategy::Band(2),
        ConsistencyStrategy::Band(3),
        ConsistencyStrategy::Sparse,
    ];
    for trial in 0..300 {
        let n = r.random_range(2..=40);
        let extra = r.random_range(0..=2 * n);
        let pattern = random_connected(n, extra, &mut r);
        let (_, mut tree) = clique_tree_of(&pattern, &Ordering::Amd).unwrap();
        if r.random_bool(0.3) {
            tree = amalgamate(&tree, r.random_range(0..8), r.random_range(0..8));
        }
        let edges = pattern.edges();
        let set: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
        for s in strategies {
            let listed = consistency_constraints(&tree, s, Some(&edges)).unwrap().len();
            let formula = closed_form(&tree, s, &set);
            if listed != formula {
                mismatches.push(format!("trial {trial} {s}: {listed} vs {formula}"));
            }
        }
    }
    let mut out = vec![check(
        "enumerated lists match closed forms on 300 trees",
        mismatches.is_empty(),
        mismatches.first().cloned().unwrap_or_default(),
    )];

    let (mut shape, mut literal, mut actual) = (true, true, true);
    for _ in 0..50 {
        let n = r.random_range(3..=60);
        let pattern = random_connected(n, 0, &mut r);
        let (_, tree) = clique_tree_of(&pattern, &Ordering::Amd).unwrap();
        shape &= tree.len() == n - 1 && tree.cliques.iter().all(|c| c.len() == 2);
        let s = consistency_constraints(&tree, ConsistencyStrategy::Full, None).unwrap().len();
        literal &= s == n - 1;
        actual &= s == n - 2;
    }
    out.push(check("acyclic m = n-1 cliques of order 2", shape, ""));
    out.push(check(
        "acyclic s = n-1",
        literal,
        format!("n-1 cliques form a tree with n-2 edges, each separator a single bus; s = n-2 on every tree: {actual}"),
    ));
    out.push(runtime(Duration::from_secs(10), start));
    out
}

struct Instance {
    n: usize,
    sdr: f64,
    full: f64,
    amalgamated: f64,
    band: [f64; 3],
    sparse: f64,
}

fn solve_value(lp: &ConeLp, opts: &SolverOptions, what: &str, failures: &mut Vec<String>) -> f64 {
    let s = solve_hermitian(lp, opts).unwrap();
    if s.status() != Status::Optimal {
        failures.push(format!("{what}: {}", s.status()));
    }
    s.objective()
}

fn synthetic_instances() -> (Vec<Instance>, Vec<String>, Duration) {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut failures = Vec::new();
    let mut out = Vec::new();
    for k in 0..20u64 {
        let n = 6 + (k as usize * 24) / 19;
        let net = synthetic_network(n, n / 2, 3000 + k).network;
        let (lp, vm) = build_sdr(&net).unwrap();
        let tree = tree_of(&lp, &vm);
        let edges = net.edges();
        let mut value = |tree: &CliqueTree, s: ConsistencyStrategy, what: &str| {
            let conv = convert(&lp, &vm, tree, s, Some(&edges)).unwrap();
            solve_value(&conv.lp, &opts, &format!("n={n} {what}"), &mut failures)
        };
        let merged = amalgamate(&tree, 16, 16);
        let inst = Instance {
            n,
            full: value(&tree, ConsistencyStrategy::Full, "full"),
            amalgamated: value(&merged, ConsistencyStrategy::Full, "amalgamated-full"),
            band: [1, 2, 3].map(|r| value(&tree, ConsistencyStrategy::Band(r), &format!("band{r}"))),
            sparse: value(&tree, ConsistencyStrategy::Sparse, "sparse"),
            sdr: solve_value(&lp, &opts, &format!("n={n} sdr"), &mut failures),
        };
        out.push(inst);
    }
    (out, failures, start.elapsed())
}

fn c3_full_equivalence(instances: &[Instance], failures: &[String], elapsed: Duration) -> Vec<Check> {
    let tol = |a: f64| 1e-5 * (1.0 + a.abs());
    let worst = |f: &dyn Fn(&Instance) -> f64| {
        instances
            .iter()
            .map(|i| (i.n, f(i)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map_or_else(String::new, |(n, v)| format!("worst |diff|/tol {v:.3} at n={n}"))
    };
    let full_ok = instances.iter().all(|i| (i.sdr - i.full).abs() <= tol(i.sdr));
    let amal_ok = instances.iter().all(|i| (i.sdr - i.amalgamated).abs() <= tol(i.sdr));
    vec![
        check("all solves optimal", failures.is_empty(), failures.join("; ")),
        check("|sdr - full| <= 1e-5(1+|obj|)", full_ok, worst(&|i| (i.sdr - i.full).abs() / tol(i.sdr))),
        check(
            "|sdr - amalgamated full| <= 1e-5(1+|obj|)",
            amal_ok,
            worst(&|i| (i.sdr - i.amalgamated).abs() / tol(i.sdr)),
        ),
        check("runtime < 5min", elapsed < Duration::from_secs(300), format!("{elapsed:.2?}")),
    ]
}

fn c4_ordering(instances: &[Instance]) -> Vec<Check> {
    let mut order = Vec::new();
    let mut normalized = Vec::new();
    for i in instances {
        let eps = 1e-6 * (1.0 + i.full.abs());
        let [b1, b2, b3] = i.band;
        for (name, lo, hi) in [("band1 <= band2", b1, b2), ("band2 <= band3", b2, b3), ("band3 <= full", b3, i.full), ("sparse <= full", i.sparse, i.full)] {
            if lo > hi + eps {
                order.push(format!("n={} {name}: {lo} > {hi} + {eps:.1e}", i.n));
            }
        }
        for (name, v) in [("band1", b1), ("band2", b2), ("band3", b3), ("sparse", i.sparse), ("full", i.full), ("amalgamated", i.amalgamated)] {
            let r = normalized_objective(v, i.sdr).unwrap();
            if r > 1.0 + 1e-6 {
                normalized.push(format!("n={} {name}: 1 + {:.2e}", i.n, r - 1.0));
            }
        }
    }
    vec![
        check("band1 <= band2 <= band3 <= full + eps, sparse <= full + eps (eps = 1e-6(1+|full|))", order.is_empty(), order.join("; ")),
        check("normalized objectives <= 1 + 1e-6", normalized.is_empty(), normalized.join("; ")),
    ]
}

fn c5_ieee118() -> Vec<Check> {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let net = preprocessed_case("case118");
    let (lp, vm) = build_sdr(&net).unwrap();
    let tree = tree_of(&lp, &vm);
    let sdr = solve_hermitian(&lp, &opts).unwrap();
    let mut out = vec![check("sdr optimal", sdr.status() == Status::Optimal, sdr.status().to_string())];
    for (rho, lo) in [(1, 0.996), (3, 0.999)] {
        let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Band(rho), None).unwrap();
        let s = solve_hermitian(&conv.lp, &opts).unwrap();
        let r = normalized_objective(s.objective(), sdr.objective()).unwrap();
        out.push(check(
            format!("band{rho} in [{lo}, 1 + 1e-6]"),
            s.status() == Status::Optimal && (lo..=1.0 + 1e-6).contains(&r),
            format!("{} normalized {r:.9}", s.status()),
        ));
    }
    out.push(runtime(Duration::from_secs(600), start));
    out
}

fn c6_recovery() -> Vec<Check> {
    let mut r = rng(6);
    let opts = RecoveryOptions::default();
    let (mut worst, mut failures, mut diag_bad, mut multi) = (0.0f64, Vec::new(), Vec::new(), 0);
    for trial in 0..100 {
        let n = r.random_range(2..=20);
        let sc = synthetic_network(n, r.random_range(0..=n), 6000 + trial);
        let net = &sc.network;
        let (lp, vm) = build_sdr(net).unwrap();
        let tree = tree_of(&lp, &vm);
        let z = lift_point(net, &vm, &sc.voltage, &infer_dispatch(net, &sc.voltage).unwrap());
        let reference = sc.voltage[net.reference_bus];
        let align = reference.conj() / reference.norm();
        let edges = net.edges();
        for s in [ConsistencyStrategy::Full, ConsistencyStrategy::Band(1), ConsistencyStrategy::Sparse] {
            let conv = convert(&lp, &vm, &tree, s, Some(&edges)).unwrap();
            match recover_voltage(&conv, &conv.lift(&z, &vm), net, &vm, &opts) {
                Ok(rec) => {
                    for (a, b) in rec.voltages.iter().zip(&sc.voltage) {
                        worst = worst.max((a - b * align).norm());
                    }
                }
                Err(e) => failures.push(format!("trial {trial} {s}: {e}")),
            }
        }
        if tree.len() > 1 {
            multi += 1;
            let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Diagonal, None).unwrap();
            if !matches!(recover_voltage(&conv, &conv.lift(&z, &vm), net, &vm, &opts), Err(Error::InsufficientCoupling)) {
                diag_bad.push(trial);
            }
        }
    }
    vec![
        check("recovery succeeds", failures.is_empty(), failures.join("; ")),
        check("voltages reproduced to 1e-8", worst <= 1e-8 && failures.is_empty(), format!("max error {worst:.2e}")),
        check(
            "diagonal raises InsufficientCoupling",
            diag_bad.is_empty() && multi > 0,
            format!("{multi} multi-clique instances, failures {diag_bad:?}"),
        ),
    ]
}

fn c7_chordal() -> Vec<Check> {
    let mut r = rng(7);
    let (mut chordal, mut rip, mut count, mut superset) = (0, 0, 0, 0);
    for _ in 0..500 {
        let n = r.random_range(2..=40);
        let extra = r.random_range(0..=60);
        let pattern = random_connected(n, extra, &mut r);
        let (filled, _) = chordal_embedding(&pattern, &Ordering::Amd).unwrap();
        chordal += usize::from(verify_chordal(&filled));
        superset += usize::from(pattern.is_subset_of(&filled));
        let (_, tree) = clique_tree_of(&pattern, &Ordering::Amd).unwrap();
        rip += usize::from(verify_running_intersection(&tree));
        count += usize::from(tree.len() < n);
    }
    let fig1 = SparsityPattern::from_edges(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
    let (_, tree) = clique_tree_of(&fig1, &Ordering::Amd).unwrap();
    let cliques: BTreeSet<Vec<usize>> = tree.cliques.iter().cloned().collect();
    let fig_ok = cliques == BTreeSet::from([vec![0, 1, 2], vec![1, 2, 3]]) 
        && tree.separators().into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>() == vec![vec![1, 2]];
    vec![
        check("embedding chordal and contains the pattern", chordal == 500 && superset == 500, format!("{chordal}/500, {superset}/500")),
        check("running intersection", rip == 500, format!("{rip}/500")),
        check("m <= n-1", count == 500, format!("{count}/500")),
        check("four-bus example cliques {1,2,3}, {2,3,4}, separator {2,3}", fig_ok, format!("{:?}", tree.cliques)),
    ]
}

fn lp(segments: Vec<ConeSegment>, objective: Vec<f64>, rows: Vec<LinearForm>) -> ConeLp {
    ConeLp {
        cone: ConeSpec::new(segments),
        objective,
        objective_offset: 0.0,
        rows,
    }
}

fn sdp_fixture() -> ConeLp {
    lp(
        vec![ConeSegment::SymmetricPsd(2)],
        vec![0.0, 0.0, 1.0],
        vec![LinearForm::new(vec![(0, 1.0)], -1.0), LinearForm::new(vec![(1, 1.0)], -2.0)],
    )
}

fn soc_fixture() -> ConeLp {
    lp(
        vec![ConeSegment::Soc { dim: 3, count: 1 }],
        vec![1.0, 0.0, 0.0],
        vec![LinearForm::new(vec![(1, 1.0)], -3.0), LinearForm::new(vec![(2, 1.0)], -4.0)],
    )
}

fn lp_fixture() -> ConeLp {
    lp(vec![ConeSegment::NonNeg(1)], vec![1.0], vec![LinearForm::new(vec![(0, 1.0)], -1.0)])
}

fn c8_solver() -> Vec<Check> {
    let opts = SolverOptions::default();
    let mut out = Vec::new();
    for (name, p, expected) in [("lp", lp_fixture(), 1.0), ("soc", soc_fixture(), 5.0), ("sdp", sdp_fixture(), 4.0)] {
        let s = solve(&p, &opts).unwrap();
        out.push(check(
            format!("{name} fixture to 1e-6"),
            s.status == Status::Optimal && (s.objective - expected).abs() <= 1e-6,
            format!("{} {}", s.status, s.objective),
        ));
    }
    let infeasible = lp(vec![ConeSegment::NonNeg(1)], vec![1.0], vec![LinearForm::new(vec![(0, 1.0)], 1.0)]);
    let s = solve(&infeasible, &opts).unwrap();
    let farkas = matches!(&s.certificate, Some(Certificate::Farkas { y, .. }) if farkas_residual(&infeasible, y) <= 1e-7);
    let unbounded = lp(vec![ConeSegment::NonNeg(2)], vec![-1.0, 0.0], vec![LinearForm::new(vec![(0, 1.0), (1, -1.0)], 0.0)]);
    let u = solve(&unbounded, &opts).unwrap();
    let ray = matches!(&u.certificate, Some(Certificate::Ray { z, .. }) if ray_residual(&unbounded, z) <= 1e-7);
    out.push(check(
        "infeasibility certificates validated",
        s.status == Status::PrimalInfeasible && farkas && u.status == Status::DualInfeasible && ray,
        format!("{} / {}", s.status, u.status),
    ));
    let mut bad = Vec::new();
    for seed in 0..10u64 {
        let net = synthetic_network(5 + seed as usize % 4, 2, 8000 + seed).network;
        let (p, vm) = build_sdr(&net).unwrap();
        let sdr = solve_hermitian(&p, &opts).unwrap();
        let soc = solve(&soc_minor_relaxation(&p, &vm, &net.edges()).unwrap(), &opts).unwrap();
        let eps = 1e-6 * (1.0 + sdr.objective().abs());
        if sdr.status() != Status::Optimal || soc.status != Status::Optimal || soc.objective > sdr.objective() + eps {
            bad.push(format!("seed {seed}: {} {} vs {} {}", soc.status, soc.objective, sdr.status(), sdr.objective()));
        }
    }
    out.push(check("2x2-minor relaxation <= sdr on 10 instances", bad.is_empty(), bad.join("; ")));
    out
}

fn c9_embedding() -> Vec<Check> {
    let mut r = rng(9);
    let (mut eig, mut inner) = (0.0f64, 0.0f64);
    let random = |p: usize, r: &mut ChaCha8Rng| {
        let a = DMatrix::from_fn(p, p, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        &a + a.adjoint()
    };
    for _ in 0..100 {
        let p = r.random_range(1..=8);
        let (a, b) = (random(p, &mut r), random(p, &mut r));
        let mut ea: Vec<f64> = a.clone().symmetric_eigenvalues().iter().flat_map(|&l| [l, l]).collect();
        let mut ez: Vec<f64> = hermitian_to_real(&a).symmetric_eigenvalues().iter().copied().collect();
        ea.sort_by(f64::total_cmp);
        ez.sort_by(f64::total_cmp);
        eig = ea.iter().zip(&ez).fold(eig, |m, (u, v)| m.max((u - v).abs()));
        let complex = (a.adjoint() * &b).trace().re;
        let real = (hermitian_to_real(&a).transpose() * hermitian_to_real(&b)).trace();
        inner = inner.max((real - 2.0 * complex).abs());
    }
    let net = data_case("case118");
    let (lp, vm) = build_sdr(&net).unwrap();
    let tree = tree_of(&lp, &vm);
    let conv = convert(&lp, &vm, &tree, ConsistencyStrategy::Full, None).unwrap();
    let report = count_report(&conv);
    let naive: usize = tree.separators().iter().map(|eta| eta.len() * (2 * eta.len() + 1)).sum();
    let rows_kept = real_embedding(&conv.lp).lp.num_rows() == conv.lp.num_rows() && real_embedding(&lp).lp.num_rows() == lp.num_rows();
    vec![
        check("eigenvalues doubled to 1e-12", eig <= 1e-12, format!("max error {eig:.2e}")),
        check("<A,B>_real = 2 Re <A,B> to 1e-12", inner <= 1e-12, format!("max error {inner:.2e}")),
        check("embedding keeps constraint counts", rows_kept, ""),
        check(
            "case118 s < naive real count / 2",
            2 * report.s < naive && report.naive_real_s == naive,
            format!("s = {}, naive = {naive}", report.s),
        ),
    ]
}

fn c10_formats() -> Vec<Check> {
    let golden = [
        (export_conelp(&sdp_fixture(), ExportFormat::SdpaSparse, &[]).unwrap(), "sdp2.dat-s"),
        (export_conelp(&lp_fixture(), ExportFormat::SdpaSparse, &[]).unwrap(), "lp1.dat-s"),
        (export_conelp(&sdp_fixture(), ExportFormat::Cbf, &[]).unwrap(), "sdp2.cbf"),
        (export_conelp(&soc_fixture(), ExportFormat::Cbf, &[]).unwrap(), "soc3.cbf"),
    ];
    let differing: Vec<&str> = golden.iter().filter(|(text, f)| *text != fixture(f)).map(|(_, f)| *f).collect();
    let mut disagreements = Vec::new();
    for (i, name) in ["case5", "case9", "case14", "case30", "case118", "case300"].iter().enumerate() {
        let (p, vm) = build_sdr(&data_case(name)).unwrap();
        let conv = convert(&p, &vm, &tree_of(&p, &vm), ConsistencyStrategy::Band(1), None).unwrap();
        for (what, problem) in [("sdr", &p), ("band1", &conv.lp)] {
            if let Err(e) = cbf_agrees(problem, i as u64) {
                disagreements.push(format!("{name} {what}: {e}"));
            }
        }
    }
    vec![
        check("golden files byte-exact", differing.is_empty(), format!("{differing:?}")),
        check("CBF reader agrees on every benchmark case", disagreements.is_empty(), disagreements.join("; ")),
    ]
}

fn cbf_agrees(p: &ConeLp, seed: u64) -> Result<(), String> {
    let real = real_embedding(p).lp;
    let cbf = read_cbf(&export_conelp(p, ExportFormat::Cbf, &[]).unwrap());
    let psd: Vec<usize> = real
        .cone
        .segments
        .iter()
        .filter_map(|s| if let ConeSegment::SymmetricPsd(q) = s { Some(*q) } else { None })
        .collect();
    let soc: usize = real.cone.segments.iter().filter(|s| matches!(s, ConeSegment::Soc { .. })).map(|s| s.dim()).sum();
    if cbf.num_cons != real.num_rows() || cbf.psd_orders != psd || cone_totals(&cbf).get("Q").copied().unwrap_or(0) != soc {
        return Err("dimensions differ".into());
    }
    let mut r = rng(seed);
    let z: Vec<f64> = (0..real.num_vars()).map(|_| r.random_range(-1.0..1.0)).collect();
    let (x, mats) = split_point(&real, &z);
    let (rows, obj) = cbf.evaluate(&x, &mats);
    let expected = real.objective_value(&z);
    if rows.iter().zip(real.row_values(&z)).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs()))
        || (obj - expected).abs() > 1e-9 * (1.0 + expected.abs())
    {
        return Err("values differ at a random point".into());
    }
    Ok(())
}

fn main() {
    let titles = [
        "constraint-count identity (case118, case300)",
        "conversion-count identities",
        "full-conversion equivalence",
        "relaxation ordering",
        "IEEE-118 normalized objectives",
        "recovery round-trip",
        "chordal toolkit properties",
        "solver oracle suite",
        "real-embedding identity",
        "format fidelity",
    ];
    let mut results: Vec<(u32, Vec<Check>)> = Vec::new();
    results.push((1, c1_constraint_counts()));
    results.push((2, c2_conversion_counts()));
    let (instances, failures, elapsed) = synthetic_instances();
    results.push((3, c3_full_equivalence(&instances, &failures, elapsed)));
    results.push((4, c4_ordering(&instances)));
    results.push((5, c5_ieee118()));
    results.push((6, c6_recovery()));
    results.push((7, c7_chordal()));
    results.push((8, c8_solver()));
    results.push((9, c9_embedding()));
    results.push((10, c10_formats()));

    let mut unexpected = Vec::new();
    println!();
    for (id, checks) in &results {
        let pass = checks.iter().all(|c| c.pass);
        println!("criterion {id:>2} {}: {}", if pass { "PASS" } else { "FAIL" }, titles[*id as usize - 1]);
        for c in checks {
            let known = KNOWN_UNATTAINABLE.contains(&(*id, c.name.as_str()));
            if !c.pass || known {
                let tag = match (c.pass, known) {
                    (false, true) => "FAIL (known)",
                    (false, false) => "FAIL",
                    _ => "PASS (listed as unattainable)",
                };
                println!("    {tag}: {} [{}]", c.name, c.detail);
            }
            if c.pass == known {
                unexpected.push(format!("criterion {id}: {}", c.name));
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected results: {unexpected:?}");
        std::process::exit(1);
    }
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::feasibility::infer_dispatch;
use super::rank::{rank_report, DEFAULT_RANK_THRESHOLD};
use crate::chordal::CliqueTree;
use crate::conversion::{ConsistencyStrategy, ConvertedProblem};
use crate::error::{Error, Result};
use crate::formulation::{ConeLp, Dispatch, VariableMap};
use crate::netmodel::{GeneratorKind, Network};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// Minimum eigenvalue ratio for a block to count as rank one.
    pub rank_threshold: f64,
    /// Largest phase difference (radians) tolerated on a separator bus.
    pub phase_tolerance: f64,
    /// Largest magnitude difference (per unit) tolerated on a separator bus.
    pub magnitude_tolerance: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            rank_threshold: DEFAULT_RANK_THRESHOLD,
            phase_tolerance: 1e-3,
            magnitude_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredSolution {
    /// Bus voltages in per unit, reference-bus angle 0.
    pub voltages: Vec<Complex64>,
    /// Dispatch inferred from the bus injections at `voltages`.
    pub dispatch: Dispatch,
    /// Dispatch read from the slack variables of the relaxation, if known.
    pub slack_dispatch: Option<Dispatch>,
    /// Largest difference between the two dispatch estimates.
    pub dispatch_discrepancy: Option<f64>,
    /// Generation cost of `dispatch`, constant terms included.
    pub objective: f64,
    /// Objective of the relaxation point the voltages came from.
    pub relaxation_bound: f64,
    pub notes: Vec<String>,
}

impl RecoveredSolution {
    /// Wrap a voltage vector, inferring the dispatch from its injections.
    pub fn from_voltages(network: &Network, voltages: Vec<Complex64>, relaxation_bound: f64) -> Result<Self> {
        let dispatch = infer_dispatch(network, &voltages)?;
        let objective = network.generators.iter().zip(&dispatch).map(|(g, d)| g.cost(d.0)).sum();
        Ok(Self {
            voltages,
            dispatch,
            slack_dispatch: None,
            dispatch_discrepancy: None,
            objective,
            relaxation_bound,
            notes: Vec::new(),
        })
    }
}

fn top_fragment(block: &DMatrix<Complex64>) -> Vec<Complex64> {
    let eig = block.clone().symmetric_eigen();
    let (k, &l1) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty block");
    let scale = l1.max(0.0).sqrt();
    eig.eigenvectors.column(k).iter().map(|x| x * scale).collect()
}

/// Voltages from rank-one clique blocks.
///
/// Each block contributes `√λ₁ u₁` on its clique. Walking the tree from the
/// root, a child fragment is rotated by the phase that best matches its
/// parent on the separator; the remaining mismatch must stay within the
/// tolerances. Magnitudes of buses shared by several cliques are averaged.
/// Finally the global phase puts the reference bus at angle 0.
pub fn stitch_voltages(
    blocks: &[DMatrix<Complex64>],
    tree: &CliqueTree,
    strategy: ConsistencyStrategy,
    reference: usize,
    options: &RecoveryOptions,
) -> Result<Vec<Complex64>> {
    if blocks.len() != tree.len() {
        return Err(Error::DimensionMismatch(format!("{} blocks for {} cliques", blocks.len(), tree.len())));
    }
    if tree.len() > 1 && !strategy.couples_phases() {
        return Err(Error::InsufficientCoupling);
    }
    for (k, (b, c)) in blocks.iter().zip(&tree.cliques).enumerate() {
        if b.nrows() != c.len() {
            return Err(Error::DimensionMismatch(format!("block {k} has order {}, clique has {}", b.nrows(), c.len())));
        }
    }
    let report = rank_report(blocks, options.rank_threshold)?;
    if !report.rank_one {
        return Err(Error::NotRankOne {
            block: report.min_block,
            ratio: report.min_ratio,
        });
    }
    let fragments: Vec<Vec<Complex64>> = blocks.iter().map(top_fragment).collect();
    stitch_fragments(&fragments, tree, reference, options)
}

/// Stitch per-clique voltage fragments (`fragments[k][a]` is the value at
/// bus `tree.cliques[k][a]`) into one voltage vector.
pub fn stitch_fragments(
    fragments: &[Vec<Complex64>],
    tree: &CliqueTree,
    reference: usize,
    options: &RecoveryOptions,
) -> Result<Vec<Complex64>> {
    let n = tree.order();
    let mut phase = vec![None::<Complex64>; n];
    let mut magnitude = vec![0.0; n];
    let mut count = vec![0usize; n];
    // Postorder puts parents after children, so reverse order is top-down.
    for k in (0..tree.len()).rev() {
        let clique = &tree.cliques[k];
        let mut frag = fragments[k].clone();
        if tree.parent[k].is_some() {
            let sep = tree.separator(k);
            let local = |v: usize| clique.binary_search(&v).expect("separator inside clique");
            let current = |v: usize| phase[v].map_or(Complex64::new(0.0, 0.0), |p| p * (magnitude[v] / count[v] as f64));
            let c: Complex64 = sep.iter().map(|&v| frag[local(v)].conj() * current(v)).sum();
            if c.norm() > 0.0 {
                let rot = c / c.norm();
                frag.iter_mut().for_each(|x| *x *= rot);
            }
            let mut mismatch: f64 = 0.0;
            for &v in &sep {
                let (a, b) = (frag[local(v)], current(v));
                let dm = (a.norm() - b.norm()).abs();
                if dm > options.magnitude_tolerance {
                    mismatch = mismatch.max(dm);
                }
                if a.norm() > options.magnitude_tolerance && b.norm() > options.magnitude_tolerance {
                    let dp = (a * b.conj()).arg().abs();
                    if dp > options.phase_tolerance {
                        mismatch = mismatch.max(dp);
                    }
                }
            }
            if mismatch > 0.0 {
                return Err(Error::PhaseInconsistent { clique: k, mismatch });
            }
        }
        for (a, &v) in clique.iter().enumerate() {
            let x = frag[a];
            if phase[v].is_none() && x.norm() > 0.0 {
                phase[v] = Some(x / x.norm());
            }
            magnitude[v] += x.norm();
            count[v] += 1;
        }
    }
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| match (phase[k], count[k]) {
            (Some(p), c) if c > 0 => p * (magnitude[k] / c as f64),
            _ => Complex64::new(0.0, 0.0),
        })
        .collect();
    if let Some(r) = v.get(reference).copied().filter(|r| r.norm() > 0.0) {
        let rot = r.conj() / r.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
    Ok(v)
}

/// Dispatch from the slack coordinates of an original-layout point.
pub fn slack_dispatch(network: &Network, vm: &VariableMap, plain: &[f64]) -> Dispatch {
    network
        .generators
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let p = match vm.dispatchable.iter().position(|&d| d == gi) {
                Some(d) => g.p_min + plain[vm.p_lower.start + d],
                None => {
                    debug_assert_eq!(g.kind, GeneratorKind::Fixed);
                    0.5 * (g.p_min + g.p_max)
                }
            };
            (p, g.q_min + plain[vm.q_lower.start + gi])
        })
        .collect()
}

fn finish(
    network: &Network,
    vm: &VariableMap,
    voltages: Vec<Complex64>,
    plain: &[f64],
    bound: f64,
    notes: Vec<String>,
) -> Result<RecoveredSolution> {
    let mut out = RecoveredSolution::from_voltages(network, voltages, bound)?;
    let slack = slack_dispatch(network, vm, plain);
    let gap = out
        .dispatch
        .iter()
        .zip(&slack)
        .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
        .fold(0.0, f64::max);
    out.slack_dispatch = Some(slack);
    out.dispatch_discrepancy = Some(gap);
    out.notes = notes;
    Ok(out)
}

/// Recover voltages and dispatch from a solved converted problem; `z` is the
/// converted point in Hermitian coordinates.
pub fn recover_voltage(
    converted: &ConvertedProblem,
    z: &[f64],
    network: &Network,
    vm: &VariableMap,
    options: &RecoveryOptions,
) -> Result<RecoveredSolution> {
    let blocks = converted.blocks(z);
    let v = stitch_voltages(&blocks, &converted.tree, converted.strategy, network.reference_bus, options)?;
    let notes = vec![format!(
        "stitched {} clique fragments under {} consistency",
        converted.tree.len(),
        converted.strategy
    )];
    finish(network, vm, v, &converted.plain_values(z), converted.lp.objective_value(z), notes)
}

/// Recover voltages and dispatch from a solved unconverted relaxation.
pub fn recover_unconverted(
    lp: &ConeLp,
    z: &[f64],
    network: &Network,
    vm: &VariableMap,
    options: &RecoveryOptions,
) -> Result<RecoveredSolution> {
    let tree = CliqueTree {
        cliques: vec![(0..vm.order).collect()],
        parent: vec![None],
    };
    let v = stitch_voltages(&[vm.x_matrix(z)], &tree, ConsistencyStrategy::Full, network.reference_bus, options)?;
    let notes = vec!["top eigenvector of the full matrix variable".to_string()];
    finish(network, vm, v, z, lp.objective_value(z), notes)
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex64;

pub const DEFAULT_RANK_THRESHOLD: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRank {
    pub order: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub blocks: Vec<BlockRank>,
    pub min_ratio: f64,
    /// Index of the block attaining `min_ratio`.
    pub min_block: usize,
    pub threshold: f64,
    pub rank_one: bool,
}

/// Two largest eigenvalues of a Hermitian matrix, largest first; order-one
/// blocks report `λ₂ = 0`.
pub fn top_eigenvalues(block: &DMatrix<Complex64>) -> (f64, f64) {
    let mut ev: Vec<f64> = block.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    (ev.first().copied().unwrap_or(0.0), ev.get(1).copied().unwrap_or(0.0))
}

/// `λ₁ / max(λ₂, ε·λ₁)`; a zero block has ratio 1.
pub fn eigenvalue_ratio(lambda1: f64, lambda2: f64) -> f64 {
    if lambda1 <= 0.0 {
        return 1.0;
    }
    lambda1 / lambda2.max(f64::EPSILON * lambda1)
}

pub fn block_rank(block: &DMatrix<Complex64>) -> BlockRank {
    let (lambda1, lambda2) = top_eigenvalues(block);
    BlockRank {
        order: block.nrows(),
        lambda1,
        lambda2,
        ratio: eigenvalue_ratio(lambda1, lambda2),
    }
}

/// Per-block eigenvalue ratios and the rank-one verdict
/// `min ratio ≥ threshold`.
pub fn rank_report(blocks: &[DMatrix<Complex64>], threshold: f64) -> Result<RankReport> {
    if blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let ranks: Vec<BlockRank> = blocks.iter().map(block_rank).collect();
    let (min_block, min_ratio) = ranks
        .iter()
        .enumerate()
        .map(|(k, b)| (k, b.ratio))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    Ok(RankReport {
        blocks: ranks,
        min_ratio,
        min_block,
        threshold,
        rank_one: min_ratio >= threshold,
    })
}

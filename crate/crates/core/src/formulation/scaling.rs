use serde::{Deserialize, Serialize};

use super::ConeLp;

/// Row scale factors `d` and objective norm applied by [`scale_conelp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub d: Vec<f64>,
    pub h_norm: f64,
}

impl ScalingRecord {
    /// Map equality multipliers of the scaled problem back to the original.
    pub fn unscale_duals(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.d).map(|(v, d)| self.h_norm * v / d).collect()
    }

    /// Map `hᵀz` of the scaled problem (without offset) back to the original.
    pub fn unscale_objective(&self, value: f64) -> f64 {
        self.h_norm * value
    }
}

/// Divide each row by `d_k = max(|c_k|, max_j |G_jk|)` (1 when that is 0),
/// then normalize the objective to unit Euclidean norm. Primal variables are
/// untouched; the offset is kept as is.
pub fn scale_conelp(lp: &ConeLp) -> (ConeLp, ScalingRecord) {
    let mut out = lp.clone();
    let mut d = Vec::with_capacity(lp.rows.len());
    for row in &mut out.rows {
        let mut dk = row.constant.abs().max(row.max_abs_coef());
        if dk == 0.0 {
            dk = 1.0;
        }
        row.constant /= dk;
        for t in &mut row.terms {
            t.1 /= dk;
        }
        d.push(dk);
    }
    let mut h_norm = lp.objective.iter().map(|v| v * v).sum::<f64>().sqrt();
    if h_norm == 0.0 {
        h_norm = 1.0;
    }
    for h in &mut out.objective {
        *h /= h_norm;
    }
    (out, ScalingRecord { d, h_norm })
}

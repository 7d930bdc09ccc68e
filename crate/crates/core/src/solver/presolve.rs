//! Elimination of free coordinates by substitution and removal of empty rows.

use std::collections::{BTreeMap, BTreeSet};

use crate::formulation::{ConeLp, ConeSegment};

/// One substitution `z_k = −(constant + Σ terms) / pivot` taken from row
/// `row`, together with the column of `z_k` at that stage.
#[derive(Debug, Clone)]
struct Elimination {
    var: usize,
    row: usize,
    pivot: f64,
    terms: Vec<(usize, f64)>,
    constant: f64,
    column: Vec<(usize, f64)>,
    cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    /// The reduced problem; rows are `Σ a z = b`.
    Reduced,
    /// An empty row with a nonzero constant; Farkas ray on the original rows.
    PrimalInfeasible(Vec<f64>),
    /// A free coordinate in no row with nonzero cost; primal ray.
    DualInfeasible(Vec<f64>),
}

#[derive(Debug, Clone)]
pub(crate) struct Presolved {
    pub outcome: Outcome,
    /// Reduced rows over reduced variable indices.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Non-free segments in order.
    pub segments: Vec<ConeSegment>,
    /// Original index of each reduced variable.
    var_map: Vec<usize>,
    /// Original index of each reduced row.
    row_map: Vec<usize>,
    eliminations: Vec<Elimination>,
    num_vars: usize,
    num_rows: usize,
}

const DROP_TOL: f64 = 1e-14;

pub(crate) fn presolve(lp: &ConeLp, infeasible_tol: f64) -> Presolved {
    let n = lp.num_vars();
    let mut free = vec![false; n];
    let mut segments = Vec::new();
    for (off, seg) in lp.cone.with_offsets() {
        match seg {
            ConeSegment::Free(k) => free[off..off + k].iter_mut().for_each(|f| *f = true),
            s => segments.push(s),
        }
    }
    let mut rows: Vec<BTreeMap<usize, f64>> = lp
        .rows
        .iter()
        .map(|r| {
            let mut m = BTreeMap::new();
            for &(k, v) in &r.terms {
                *m.entry(k).or_insert(0.0) += v;
            }
            m.retain(|_, v: &mut f64| *v != 0.0);
            m
        })
        .collect();
    let mut constants: Vec<f64> = lp.rows.iter().map(|r| r.constant).collect();
    let mut active = vec![true; rows.len()];
    let mut h = lp.objective.clone();
    let mut cols: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        for &k in row.keys() {
            if free[k] {
                cols.entry(k).or_default().insert(r);
            }
        }
    }
    let mut eliminations = Vec::new();
    let mut outcome = Outcome::Reduced;
    for k in (0..n).filter(|&k| free[k]) {
        let col: Vec<usize> = cols.get(&k).map(|s| s.iter().copied().collect()).unwrap_or_default();
        if col.is_empty() {
            if h[k] != 0.0 {
                let mut ray = vec![0.0; n];
                ray[k] = -h[k].signum();
                outcome = Outcome::DualInfeasible(ray);
                break;
            }
            continue;
        }
        let amax = col.iter().map(|&r| rows[r][&k].abs()).fold(0.0, f64::max);
        let p = *col
            .iter()
            .filter(|&&r| rows[r][&k].abs() >= 0.1 * amax)
            .min_by_key(|&&r| (rows[r].len(), r))
            .expect("nonempty column");
        let pivot = rows[p][&k];
        let prow: Vec<(usize, f64)> = rows[p].iter().filter(|e| *e.0 != k).map(|(&j, &v)| (j, v)).collect();
        let pconst = constants[p];
        let mut column = Vec::new();
        for &r in col.iter().filter(|&&r| r != p) {
            let a = rows[r].remove(&k).expect("column entry");
            column.push((r, a));
            let f = a / pivot;
            let scale = rows[r].values().fold(a.abs(), |m, v| m.max(v.abs()));
            for &(j, v) in &prow {
                let e = rows[r].entry(j).or_insert(0.0);
                *e -= f * v;
                if e.abs() <= DROP_TOL * scale {
                    rows[r].remove(&j);
                    if free[j] {
                        cols.get_mut(&j).map(|s| s.remove(&r));
                    }
                } else if free[j] {
                    cols.entry(j).or_default().insert(r);
                }
            }
            constants[r] -= f * pconst;
        }
        let cost = h[k];
        if cost != 0.0 {
            for &(j, v) in &prow {
                h[j] -= cost * v / pivot;
            }
            h[k] = 0.0;
        }
        for &(j, _) in &prow {
            if free[j] {
                cols.get_mut(&j).map(|s| s.remove(&p));
            }
        }
        cols.remove(&k);
        active[p] = false;
        rows[p].clear();
        eliminations.push(Elimination { var: k, row: p, pivot, terms: prow, constant: pconst, column, cost });
    }
    let mut var_map = Vec::new();
    let mut new_index = vec![usize::MAX; n];
    for k in (0..n).filter(|&k| !free[k]) {
        new_index[k] = var_map.len();
        var_map.push(k);
    }
    let mut out_rows = Vec::new();
    let mut b = Vec::new();
    let mut row_map = Vec::new();
    if matches!(outcome, Outcome::Reduced) {
        for r in 0..rows.len() {
            if !active[r] {
                continue;
            }
            if rows[r].is_empty() {
                let scale = lp.rows[r].constant.abs().max(lp.rows[r].max_abs_coef()).max(1.0);
                if constants[r].abs() > infeasible_tol * scale {
                    let mut y = vec![0.0; rows.len()];
                    y[r] = -constants[r].signum();
                    outcome = Outcome::PrimalInfeasible(y);
                    break;
                }
                continue;
            }
            out_rows.push(rows[r].iter().map(|(&j, &v)| (new_index[j], v)).collect());
            b.push(-constants[r]);
            row_map.push(r);
        }
    }
    let c = var_map.iter().map(|&k| h[k]).collect();
    let mut pre = Presolved {
        outcome,
        rows: out_rows,
        b,
        c,
        segments,
        var_map,
        row_map,
        eliminations,
        num_vars: n,
        num_rows: lp.rows.len(),
    };
    // Rays found during presolve are expressed at an intermediate stage;
    // carry them back to the original coordinates.
    match std::mem::replace(&mut pre.outcome, Outcome::Reduced) {
        Outcome::PrimalInfeasible(y) => {
            let y = pre.duals_from_stage(y, true);
            pre.outcome = Outcome::PrimalInfeasible(y);
        }
        Outcome::DualInfeasible(z) => {
            let z = pre.primal_from_stage(z, true);
            pre.outcome = Outcome::DualInfeasible(z);
        }
        Outcome::Reduced => {}
    }
    pre
}

impl Presolved {
    pub(crate) fn num_reduced_vars(&self) -> usize {
        self.var_map.len()
    }

    /// Original primal point from a reduced point; `ray` drops constants.
    pub(crate) fn primal(&self, x: &[f64], ray: bool) -> Vec<f64> {
        let mut z = vec![0.0; self.num_vars];
        for (i, &k) in self.var_map.iter().enumerate() {
            z[k] = x[i];
        }
        self.primal_from_stage(z, ray)
    }

    fn primal_from_stage(&self, mut z: Vec<f64>, ray: bool) -> Vec<f64> {
        for e in self.eliminations.iter().rev() {
            let c = if ray { 0.0 } else { e.constant };
            let s: f64 = e.terms.iter().map(|&(j, v)| v * z[j]).sum();
            z[e.var] = -(c + s) / e.pivot;
        }
        z
    }

    /// Original equality multipliers from reduced ones; `ray` drops costs.
    pub(crate) fn duals(&self, y: &[f64], ray: bool) -> Vec<f64> {
        let mut full = vec![0.0; self.num_rows];
        for (i, &r) in self.row_map.iter().enumerate() {
            full[r] = y[i];
        }
        self.duals_from_stage(full, ray)
    }

    fn duals_from_stage(&self, mut y: Vec<f64>, ray: bool) -> Vec<f64> {
        for e in self.eliminations.iter().rev() {
            let h = if ray { 0.0 } else { e.cost };
            let s: f64 = e.column.iter().map(|&(r, a)| a * y[r]).sum();
            y[e.row] = (h - s) / e.pivot;
        }
        y
    }

    /// Original dual slack from a reduced one (zero on free coordinates).
    pub(crate) fn slack(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars];
        for (i, &k) in self.var_map.iter().enumerate() {
            out[k] = s[i];
        }
        out
    }
}

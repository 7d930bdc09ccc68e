//! Homogeneous self-dual predictor–corrector method with Nesterov–Todd
//! scaling over products of nonnegative, second-order and symmetric PSD
//! cones in `svec` coordinates.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::cones::{dot, inverse_product, max_step, Cone, Scaling};
use super::{SolverOptions, Status};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `min cᵀx` subject to `A x = b`, `x ∈ K`.
#[derive(Debug, Clone)]
pub(crate) struct StdProblem {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: Vec<Cone>,
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub mu: f64,
    pub step: f64,
    pub tau: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmResult {
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub log: Vec<IterationLog>,
}

/// Column-oriented view of the rows restricted to one cone.
#[derive(Debug, Clone)]
struct ConeRows {
    /// `(row, local entries)` for every row touching the cone.
    rows: Vec<(usize, Vec<(usize, f64)>)>,
    /// For symmetric blocks: sorted local positions used by any row.
    positions: Vec<usize>,
}

struct Kkt {
    factor: Cholesky<f64, Dyn>,
}

impl Kkt {
    /// Solve `A W² Aᵀ y = rhs`, refining against the operator `op`.
    fn solve(&self, rhs: &[f64], op: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let r = DVector::from_column_slice(rhs);
        let mut x = self.factor.solve(&r);
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            let ax = op(x.as_slice());
            let res = DVector::from_iterator(rhs.len(), rhs.iter().zip(&ax).map(|(r, a)| r - a));
            let size = res.norm();
            if size >= 0.9 * best || size == 0.0 {
                break;
            }
            best = size;
            x += self.factor.solve(&res);
        }
        x.as_slice().to_vec()
    }
}

struct Workspace<'a> {
    p: &'a StdProblem,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cone_rows: Vec<ConeRows>,
    b_norm: f64,
    c_norm: f64,
    degree: f64,
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

impl<'a> Workspace<'a> {
    fn new(p: &'a StdProblem) -> Self {
        let m = p.rows.len();
        let mut cols = vec![Vec::new(); p.n];
        for (r, row) in p.rows.iter().enumerate() {
            for &(k, v) in row {
                cols[k].push((r, v));
            }
        }
        let cone_rows = p
            .cones
            .iter()
            .map(|cone| {
                let mut by_row: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
                let mut positions = Vec::new();
                if !matches!(cone, Cone::NonNeg { .. }) {
                    for k in cone.range() {
                        if !cols[k].is_empty() {
                            positions.push(k - cone.off());
                        }
                        for &(r, v) in &cols[k] {
                            by_row.entry(r).or_default().push((k - cone.off(), v));
                        }
                    }
                }
                ConeRows {
                    rows: by_row.into_iter().collect(),
                    positions,
                }
            })
            .collect();
        Workspace {
            p,
            m,
            cols,
            cone_rows,
            b_norm: norm(&p.b),
            c_norm: norm(&p.c),
            degree: p.cones.iter().map(Cone::degree).sum::<usize>() as f64,
        }
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        self.p.rows.iter().map(|row| row.iter().map(|&(k, v)| v * x[k]).sum()).collect()
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p.n];
        for (r, row) in self.p.rows.iter().enumerate() {
            if y[r] != 0.0 {
                for &(k, v) in row {
                    out[k] += v * y[r];
                }
            }
        }
        out
    }

    fn per_cone(&self, scalings: &[Scaling], u: &[f64], op: impl Fn(&Scaling, &[f64], &mut [f64])) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (cone, sc) in self.p.cones.iter().zip(scalings) {
            let r = cone.range();
            op(sc, &u[r.clone()], &mut out[r]);
        }
        out
    }

    fn normal_matrix(&self, scalings: &[Scaling]) -> DMatrix<f64> {
        let m = self.m;
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for ((cone, sc), cr) in self.p.cones.iter().zip(scalings).zip(&self.cone_rows) {
            match (cone, sc) {
                (Cone::NonNeg { .. }, Scaling::NonNeg { w }) => {
                    for (l, k) in cone.range().enumerate() {
                        let d = w[l] * w[l];
                        let col = &self.cols[k];
                        for (i, &(ri, vi)) in col.iter().enumerate() {
                            for &(rj, vj) in &col[..=i] {
                                let (a, b) = if ri >= rj { (ri, rj) } else { (rj, ri) };
                                mat[(a, b)] += d * vi * vj;
                            }
                        }
                    }
                }
                (Cone::Soc { dim, .. }, Scaling::Soc { beta, wbar }) => {
                    let b2 = beta * beta;
                    let dense: Vec<Vec<f64>> = cr
                        .rows
                        .iter()
                        .map(|(_, e)| {
                            let mut v = vec![0.0; *dim];
                            for &(l, a) in e {
                                v[l] += a;
                            }
                            v
                        })
                        .collect();
                    let proj: Vec<f64> = dense.iter().map(|v| dot(v, wbar)).collect();
                    for i in 0..cr.rows.len() {
                        for j in 0..=i {
                            let (u, v) = (&dense[i], &dense[j]);
                            let jdot = u[0] * v[0] - dot(&u[1..], &v[1..]);
                            let val = b2 * (2.0 * proj[i] * proj[j] - jdot);
                            let (ri, rj) = (cr.rows[i].0, cr.rows[j].0);
                            let (a, b) = if ri >= rj { (ri, rj) } else { (rj, ri) };
                            mat[(a, b)] += val;
                        }
                    }
                }
                (Cone::Psd { q, .. }, Scaling::Psd { g, .. }) => {
                    let pos_index: BTreeMap<usize, usize> =
                        cr.positions.iter().enumerate().map(|(i, &l)| (l, i)).collect();
                    let pairs: Vec<(usize, usize)> = cr.positions.iter().map(|&l| unsvec(l, *q)).collect();
                    let mut bvals = vec![0.0; pairs.len()];
                    for (i, (ri, entries)) in cr.rows.iter().enumerate() {
                        bvals.iter_mut().for_each(|v| *v = 0.0);
                        for &(l, v) in entries {
                            let (ei, ej) = unsvec(l, *q);
                            for (t, &(a, b)) in pairs.iter().enumerate() {
                                let val = if ei == ej {
                                    v * g[(a, ei)] * g[(ei, b)]
                                } else {
                                    v / SQRT2 * (g[(a, ei)] * g[(ej, b)] + g[(a, ej)] * g[(ei, b)])
                                };
                                bvals[t] += if a == b { val } else { SQRT2 * val };
                            }
                        }
                        for (rj, ej) in &cr.rows[..=i] {
                            let val: f64 = ej.iter().map(|&(l, v)| v * bvals[pos_index[&l]]).sum();
                            let (a, b) = if *ri >= *rj { (*ri, *rj) } else { (*rj, *ri) };
                            mat[(a, b)] += val;
                        }
                    }
                }
                _ => unreachable!("scaling matches cone"),
            }
        }
        mat.fill_upper_triangle_with_lower_triangle();
        mat
    }

    fn factor(&self, matrix: DMatrix<f64>) -> Option<Kkt> {
        let dmax = matrix.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        for reg in [0.0, 1e-12, 1e-10, 1e-8] {
            let mut shifted = matrix.clone();
            for i in 0..self.m {
                shifted[(i, i)] += reg * dmax;
            }
            if let Some(factor) = Cholesky::new(shifted) {
                return Some(Kkt { factor });
            }
        }
        None
    }
}

/// Inverse of `svec_index` for a block of order `q`.
fn unsvec(l: usize, q: usize) -> (usize, usize) {
    let mut j = ((((8 * l + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while j * (j + 1) / 2 > l {
        j -= 1;
    }
    while (j + 1) * (j + 2) / 2 <= l {
        j += 1;
    }
    debug_assert!(j < q);
    (l - j * (j + 1) / 2, j)
}

struct State {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

pub(crate) fn solve_std(p: &StdProblem, opts: &SolverOptions) -> IpmResult {
    let ws = Workspace::new(p);
    let n = p.n;
    let m = ws.m;
    let mut st = State {
        x: vec![0.0; n],
        y: vec![0.0; m],
        s: vec![0.0; n],
        tau: 1.0,
        kappa: 1.0,
    };
    let mut e = vec![0.0; n];
    for cone in &p.cones {
        cone.identity(&mut e[cone.range()]);
    }
    st.x.copy_from_slice(&e);
    st.s.copy_from_slice(&e);
    let mut log = Vec::new();
    let mut status = Status::IterationLimit;
    let mut measures = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut slow_steps = 0;
    for it in 0..=opts.max_iterations {
        iterations = it;
        let ax = ws.a_mul(&st.x);
        let aty = ws.at_mul(&st.y);
        let f1: Vec<f64> = (0..m).map(|i| ax[i] - p.b[i] * st.tau).collect();
        let f2: Vec<f64> = (0..n).map(|k| aty[k] + st.s[k] - p.c[k] * st.tau).collect();
        let cx = dot(&p.c, &st.x);
        let by = dot(&p.b, &st.y);
        let f3 = cx - by + st.kappa;
        let mu = (dot(&st.x, &st.s) + st.tau * st.kappa) / (ws.degree + 1.0);
        let pobj = cx / st.tau;
        let dobj = by / st.tau;
        let pres = norm(&f1) / st.tau / (1.0 + ws.b_norm);
        let dres = norm(&f2) / st.tau / (1.0 + ws.c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs().min(dobj.abs()));
        measures = (pres, dres, gap);
        log.push(IterationLog {
            iteration: it,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual: pres,
            dual_residual: dres,
            gap,
            mu,
            step: 0.0,
            tau: st.tau,
            kappa: st.kappa,
        });
        if pres <= opts.tolerance && dres <= opts.tolerance && gap <= opts.tolerance {
            status = Status::Optimal;
            break;
        }
        // Infeasibility certificates.
        if by > 0.0 {
            let r: Vec<f64> = (0..n).map(|k| aty[k] + st.s[k]).collect();
            if norm(&r) / by <= opts.tolerance && st.tau <= opts.tolerance.sqrt() * st.kappa.max(1.0) {
                status = Status::PrimalInfeasible;
                break;
            }
        }
        if cx < 0.0 && norm(&ax) / (-cx) <= opts.tolerance && st.tau <= opts.tolerance.sqrt() * st.kappa.max(1.0) {
            status = Status::DualInfeasible;
            break;
        }
        if it == opts.max_iterations {
            break;
        }
        // Scaling.
        let mut lambda = vec![0.0; n];
        let mut scalings = Vec::with_capacity(p.cones.len());
        let mut failed = false;
        for cone in &p.cones {
            let r = cone.range();
            match Scaling::new(cone, &st.x[r.clone()], &st.s[r.clone()], &mut lambda[r]) {
                Ok(sc) => scalings.push(sc),
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            status = Status::NumericalFailure;
            break;
        }
        let Some(kkt) = ws.factor(ws.normal_matrix(&scalings)) else {
            status = Status::NumericalFailure;
            break;
        };
        let wc = ws.per_cone(&scalings, &p.c, Scaling::apply_sq);
        let mut rhs_p = ws.a_mul(&wc);
        for i in 0..m {
            rhs_p[i] += p.b[i];
        }
        let normal_op = |y: &[f64]| ws.a_mul(&ws.per_cone(&scalings, &ws.at_mul(y), Scaling::apply_sq));
        let pvec = kkt.solve(&rhs_p, normal_op);
        let v: Vec<f64> = ws.at_mul(&pvec).iter().zip(&p.c).map(|(a, c)| a - c).collect();
        let wv = ws.per_cone(&scalings, &v, Scaling::apply_sq);
        let denom = -dot(&v, &wv) - st.kappa / st.tau;

        let lam_sq = jordan(&p.cones, &lambda, &lambda);
        // Newton system: A dx − b dτ = r1, Aᵀdy + ds − c dτ = r2,
        // cᵀdx − bᵀdy + dκ = r3, dx + W² ds = t, κ dτ + τ dκ = rτ.
        let newton = |r1: &[f64], r2: &[f64], r3: f64, t: &[f64], rtau: f64| -> Direction {
            let w2r2 = ws.per_cone(&scalings, r2, Scaling::apply_sq);
            let g: Vec<f64> = (0..n).map(|k| t[k] - w2r2[k]).collect();
            let ag = ws.a_mul(&g);
            let rhs: Vec<f64> = (0..m).map(|i| r1[i] - ag[i]).collect();
            let q = kkt.solve(&rhs, normal_op);
            let atq = ws.at_mul(&q);
            let num = r3 - dot(&wc, &atq) - dot(&p.c, &g) + dot(&p.b, &q) - rtau / st.tau;
            let dtau = num / denom;
            let dy: Vec<f64> = (0..m).map(|i| q[i] + pvec[i] * dtau).collect();
            let atdy = ws.at_mul(&dy);
            let u: Vec<f64> = (0..n).map(|k| atdy[k] - p.c[k] * dtau).collect();
            let mut dx = ws.per_cone(&scalings, &u, Scaling::apply_sq);
            for k in 0..n {
                dx[k] += g[k];
            }
            let ds: Vec<f64> = (0..n).map(|k| r2[k] - atdy[k] + p.c[k] * dtau).collect();
            let dkappa = (rtau - st.kappa * dtau) / st.tau;
            Direction { dx, dy, ds, dtau, dkappa }
        };
        let direction = |eta: f64, rc: &[f64], rtau: f64| -> Direction {
            let r1: Vec<f64> = f1.iter().map(|v| -eta * v).collect();
            let r2: Vec<f64> = f2.iter().map(|v| -eta * v).collect();
            let r3 = -eta * f3;
            let mut t = vec![0.0; n];
            for (cone, sc) in p.cones.iter().zip(&scalings) {
                let r = cone.range();
                let mut inv = vec![0.0; r.len()];
                inverse_product(cone, &lambda[r.clone()], &rc[r.clone()], &mut inv);
                sc.apply(&inv, &mut t[r]);
            }
            let mut d = newton(&r1, &r2, r3, &t, rtau);
            let mut best = f64::INFINITY;
            for _ in 0..3 {
                let adx = ws.a_mul(&d.dx);
                let atdy = ws.at_mul(&d.dy);
                let w2ds = ws.per_cone(&scalings, &d.ds, Scaling::apply_sq);
                let e1: Vec<f64> = (0..m).map(|i| r1[i] - adx[i] + p.b[i] * d.dtau).collect();
                let e2: Vec<f64> = (0..n).map(|k| r2[k] - atdy[k] - d.ds[k] + p.c[k] * d.dtau).collect();
                let e3 = r3 - dot(&p.c, &d.dx) + dot(&p.b, &d.dy) - d.dkappa;
                let e4: Vec<f64> = (0..n).map(|k| t[k] - d.dx[k] - w2ds[k]).collect();
                let e5 = rtau - st.kappa * d.dtau - st.tau * d.dkappa;
                let size = norm(&e1) / (1.0 + ws.b_norm) + norm(&e2) / (1.0 + ws.c_norm) + e3.abs();
                if size >= 0.5 * best || size <= f64::EPSILON * (1.0 + norm(&r1) + norm(&r2)) {
                    break;
                }
                best = size;
                let c = newton(&e1, &e2, e3, &e4, e5);
                for k in 0..n {
                    d.dx[k] += c.dx[k];
                    d.ds[k] += c.ds[k];
                }
                for i in 0..m {
                    d.dy[i] += c.dy[i];
                }
                d.dtau += c.dtau;
                d.dkappa += c.dkappa;
            }
            d
        };
        let scaled = |d: &Direction| -> (Vec<f64>, Vec<f64>) {
            (
                ws.per_cone(&scalings, &d.dx, Scaling::apply_inv),
                ws.per_cone(&scalings, &d.ds, Scaling::apply_t),
            )
        };
        let step_to_boundary = |d: &Direction, dxs: &[f64], dss: &[f64]| -> f64 {
            let mut a = f64::INFINITY;
            for cone in &p.cones {
                let r = cone.range();
                a = a.min(max_step(cone, &lambda[r.clone()], &dxs[r.clone()]));
                a = a.min(max_step(cone, &lambda[r.clone()], &dss[r]));
            }
            if d.dtau < 0.0 {
                a = a.min(-st.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-st.kappa / d.dkappa);
            }
            a
        };

        // Predictor.
        let rc_aff: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let aff = direction(1.0, &rc_aff, -st.tau * st.kappa);
        let (dxa, dsa) = scaled(&aff);
        let alpha_aff = step_to_boundary(&aff, &dxa, &dsa).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let corr = jordan(&p.cones, &dxa, &dsa);
        let rc: Vec<f64> = (0..n).map(|k| sigma * mu * e[k] - lam_sq[k] - corr[k]).collect();
        let rtau = sigma * mu - st.tau * st.kappa - aff.dtau * aff.dkappa;
        let dir = direction(1.0 - sigma, &rc, rtau);
        let (dxs, dss) = scaled(&dir);
        let alpha = (opts.step_fraction * step_to_boundary(&dir, &dxs, &dss)).min(1.0);
        if let Some(last) = log.last_mut() {
            last.step = alpha;
        }
        for k in 0..n {
            st.x[k] += alpha * dir.dx[k];
            st.s[k] += alpha * dir.ds[k];
        }
        for i in 0..m {
            st.y[i] += alpha * dir.dy[i];
        }
        st.tau += alpha * dir.dtau;
        st.kappa += alpha * dir.dkappa;
        if alpha < 1e-8 {
            slow_steps += 1;
            if slow_steps >= 5 {
                status = Status::NumericalFailure;
                break;
            }
        } else {
            slow_steps = 0;
        }
    }
    let (x, y, s) = match status {
        Status::PrimalInfeasible => {
            let by = dot(&p.b, &st.y);
            (vec![0.0; n], st.y.iter().map(|v| v / by).collect(), st.s.iter().map(|v| v / by).collect())
        }
        Status::DualInfeasible => {
            let cx = -dot(&p.c, &st.x);
            (st.x.iter().map(|v| v / cx).collect(), vec![0.0; m], vec![0.0; n])
        }
        _ => (
            st.x.iter().map(|v| v / st.tau).collect(),
            st.y.iter().map(|v| v / st.tau).collect(),
            st.s.iter().map(|v| v / st.tau).collect(),
        ),
    };
    IpmResult {
        status,
        x,
        y,
        s,
        primal_residual: measures.0,
        dual_residual: measures.1,
        gap: measures.2,
        iterations,
        log,
    }
}

fn jordan(cones: &[Cone], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for cone in cones {
        let r = cone.range();
        cone.product(&u[r.clone()], &v[r.clone()], &mut out[r]);
    }
    out
}

/// Map packed symmetric coordinates to `svec` coordinates: off-diagonal
/// primal entries are multiplied by √2, so row and cost coefficients are
/// divided by √2.
pub(crate) fn svec_factor(cone: &Cone, local: usize) -> f64 {
    match *cone {
        Cone::Psd { q, .. } => {
            let (i, j) = unsvec(local, q);
            if i == j {
                1.0
            } else {
                SQRT2
            }
        }
        _ => 1.0,
    }
}

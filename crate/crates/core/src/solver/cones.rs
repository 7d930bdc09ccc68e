//! Cone kernels in scaled coordinates: Jordan products, Nesterov–Todd
//! scaling and step-to-boundary computations. Symmetric blocks use `svec`
//! coordinates (off-diagonal entries times √2) so the Euclidean inner product
//! equals the trace inner product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cone {
    NonNeg { off: usize, n: usize },
    Soc { off: usize, dim: usize },
    Psd { off: usize, q: usize },
}

impl Cone {
    pub(crate) fn off(&self) -> usize {
        match *self {
            Cone::NonNeg { off, .. } | Cone::Soc { off, .. } | Cone::Psd { off, .. } => off,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        match *self {
            Cone::NonNeg { n, .. } => n,
            Cone::Soc { dim, .. } => dim,
            Cone::Psd { q, .. } => q * (q + 1) / 2,
        }
    }

    /// Barrier degree.
    pub(crate) fn degree(&self) -> usize {
        match *self {
            Cone::NonNeg { n, .. } => n,
            Cone::Soc { .. } => 1,
            Cone::Psd { q, .. } => q,
        }
    }

    pub(crate) fn range(&self) -> std::ops::Range<usize> {
        self.off()..self.off() + self.dim()
    }

    /// Write the identity element into `out`.
    pub(crate) fn identity(&self, out: &mut [f64]) {
        out.fill(0.0);
        match *self {
            Cone::NonNeg { .. } => out.fill(1.0),
            Cone::Soc { .. } => out[0] = 1.0,
            Cone::Psd { q, .. } => {
                for i in 0..q {
                    out[svec_index(i, i)] = 1.0;
                }
            }
        }
    }

    /// Jordan product `u ∘ v`.
    pub(crate) fn product(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        match *self {
            Cone::NonNeg { .. } => {
                for k in 0..u.len() {
                    out[k] = u[k] * v[k];
                }
            }
            Cone::Soc { .. } => {
                out[0] = dot(u, v);
                for k in 1..u.len() {
                    out[k] = u[0] * v[k] + v[0] * u[k];
                }
            }
            Cone::Psd { q, .. } => {
                let a = smat(u, q);
                let b = smat(v, q);
                let p = &a * &b;
                let s = (&p + p.transpose()) * 0.5;
                svec_into(&s, out);
            }
        }
    }
}

/// Index of entry `(i, j)`, `i ≤ j`, in the packed upper triangle.
pub(crate) fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    j * (j + 1) / 2 + i
}

pub(crate) fn smat(v: &[f64], q: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(q, q);
    for j in 0..q {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                m[(i, j)] = x / SQRT2;
                m[(j, i)] = x / SQRT2;
            }
        }
    }
    m
}

pub(crate) fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let q = m.nrows();
    for j in 0..q {
        for i in 0..=j {
            out[svec_index(i, j)] = if i == j { m[(i, i)] } else { SQRT2 * 0.5 * (m[(i, j)] + m[(j, i)]) };
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nesterov–Todd scaling of one cone at the pair `(x, s)`, with
/// `λ = W⁻¹x = Wᵀs`.
#[derive(Debug, Clone)]
pub(crate) enum Scaling {
    NonNeg { w: Vec<f64> },
    /// `W = β W̄`, `W̄² = 2w̄w̄ᵀ − J`.
    Soc { beta: f64, wbar: Vec<f64> },
    /// `W(U) = R U Rᵀ`.
    Psd { r: DMatrix<f64>, rinv: DMatrix<f64>, g: DMatrix<f64> },
}

fn jnorm(v: &[f64]) -> Option<f64> {
    let d = v[0] * v[0] - v[1..].iter().map(|t| t * t).sum::<f64>();
    (v[0] > 0.0 && d > 0.0).then(|| d.sqrt())
}

impl Scaling {
    pub(crate) fn new(cone: &Cone, x: &[f64], s: &[f64], lambda: &mut [f64]) -> Result<Self> {
        let fail = || Error::NumericalFailure("iterate left the cone interior".into());
        match *cone {
            Cone::NonNeg { .. } => {
                let mut w = Vec::with_capacity(x.len());
                for k in 0..x.len() {
                    if !(x[k] > 0.0 && s[k] > 0.0) {
                        return Err(fail());
                    }
                    w.push((x[k] / s[k]).sqrt());
                    lambda[k] = (x[k] * s[k]).sqrt();
                }
                Ok(Scaling::NonNeg { w })
            }
            Cone::Soc { .. } => {
                let nx = jnorm(x).ok_or_else(fail)?;
                let ns = jnorm(s).ok_or_else(fail)?;
                let beta = (nx / ns).sqrt();
                let xb: Vec<f64> = x.iter().map(|v| v / nx).collect();
                let sb: Vec<f64> = s.iter().map(|v| v / ns).collect();
                let gamma = ((1.0 + dot(&xb, &sb)) / 2.0).sqrt();
                let mut wbar: Vec<f64> = xb.iter().zip(&sb).map(|(a, b)| (a - b) / (2.0 * gamma)).collect();
                wbar[0] = (xb[0] + sb[0]) / (2.0 * gamma);
                let sc = Scaling::Soc { beta, wbar };
                sc.apply_inv(x, lambda);
                Ok(sc)
            }
            Cone::Psd { q, .. } => {
                let lx = smat(x, q).cholesky().ok_or_else(fail)?.l();
                let ls = smat(s, q).cholesky().ok_or_else(fail)?.l();
                let svd = (ls.transpose() * &lx).svd(true, true);
                let v_t = svd.v_t.ok_or_else(fail)?;
                let sig = svd.singular_values;
                if sig.iter().any(|&v| !(v > 0.0)) {
                    return Err(fail());
                }
                let inv_sqrt = DVector::from_iterator(q, sig.iter().map(|v| 1.0 / v.sqrt()));
                let r = &lx * v_t.transpose() * DMatrix::from_diagonal(&inv_sqrt);
                let rinv = r.clone().try_inverse().ok_or_else(fail)?;
                let g = &r * r.transpose();
                lambda.fill(0.0);
                for i in 0..q {
                    lambda[svec_index(i, i)] = sig[i];
                }
                Ok(Scaling::Psd { r, rinv, g })
            }
        }
    }

    /// `out = W u`.
    pub(crate) fn apply(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Scaling::NonNeg { w } => {
                for k in 0..u.len() {
                    out[k] = w[k] * u[k];
                }
            }
            Scaling::Soc { beta, wbar } => soc_wbar(*beta, wbar, u, out, false),
            Scaling::Psd { r, .. } => congruence(r, u, out, false),
        }
    }

    /// `out = Wᵀ u`.
    pub(crate) fn apply_t(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Psd { r, .. } => congruence(r, u, out, true),
            _ => self.apply(u, out),
        }
    }

    /// `out = W⁻¹ u`.
    pub(crate) fn apply_inv(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Scaling::NonNeg { w } => {
                for k in 0..u.len() {
                    out[k] = u[k] / w[k];
                }
            }
            Scaling::Soc { beta, wbar } => soc_wbar(1.0 / beta, wbar, u, out, true),
            Scaling::Psd { rinv, .. } => congruence(rinv, u, out, false),
        }
    }

    /// `out = W⁻ᵀ u`.
    #[cfg(test)]
    pub(crate) fn apply_inv_t(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Scaling::Psd { rinv, .. } => congruence(rinv, u, out, true),
            _ => self.apply_inv(u, out),
        }
    }

    /// `out = W Wᵀ u`.
    pub(crate) fn apply_sq(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Scaling::NonNeg { w } => {
                for k in 0..u.len() {
                    out[k] = w[k] * w[k] * u[k];
                }
            }
            Scaling::Soc { beta, wbar } => {
                let b2 = beta * beta;
                let p = 2.0 * dot(wbar, u);
                out[0] = b2 * (p * wbar[0] - u[0]);
                for k in 1..u.len() {
                    out[k] = b2 * (p * wbar[k] + u[k]);
                }
            }
            Scaling::Psd { g, .. } => {
                let q = g.nrows();
                let m = g * smat(u, q) * g;
                svec_into(&m, out);
            }
        }
    }
}

/// `β W̄ u`, or `β W̄⁻¹ u` with `W̄⁻¹ = J W̄ J` when `inverse`.
fn soc_wbar(beta: f64, w: &[f64], u: &[f64], out: &mut [f64], inverse: bool) {
    let sign = if inverse { -1.0 } else { 1.0 };
    let w1u1: f64 = w[1..].iter().zip(&u[1..]).map(|(a, b)| a * b).sum();
    out[0] = beta * (w[0] * u[0] + sign * w1u1);
    let c = sign * u[0] + w1u1 / (1.0 + w[0]);
    for k in 1..u.len() {
        out[k] = beta * (u[k] + c * w[k]);
    }
}

/// `svec(R U Rᵀ)` or `svec(Rᵀ U R)`.
fn congruence(r: &DMatrix<f64>, u: &[f64], out: &mut [f64], transpose: bool) {
    let q = r.nrows();
    let m = smat(u, q);
    let p = if transpose { r.transpose() * m * r } else { r * m * r.transpose() };
    svec_into(&p, out);
}

/// Solve `λ ∘ u = v` for `u`, where `λ` is the scaled point of the cone
/// (diagonal for symmetric blocks).
pub(crate) fn inverse_product(cone: &Cone, lambda: &[f64], v: &[f64], out: &mut [f64]) {
    match *cone {
        Cone::NonNeg { .. } => {
            for k in 0..v.len() {
                out[k] = v[k] / lambda[k];
            }
        }
        Cone::Soc { .. } => {
            let l1v1: f64 = lambda[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
            let det = lambda[0] * lambda[0] - lambda[1..].iter().map(|t| t * t).sum::<f64>();
            let u0 = (lambda[0] * v[0] - l1v1) / det;
            out[0] = u0;
            for k in 1..v.len() {
                out[k] = (v[k] - u0 * lambda[k]) / lambda[0];
            }
        }
        Cone::Psd { q, .. } => {
            for j in 0..q {
                for i in 0..=j {
                    let k = svec_index(i, j);
                    out[k] = 2.0 * v[k] / (lambda[svec_index(i, i)] + lambda[svec_index(j, j)]);
                }
            }
        }
    }
}

/// Largest `α ≥ 0` with `λ + α d` in the cone (`f64::INFINITY` if unbounded).
pub(crate) fn max_step(cone: &Cone, lambda: &[f64], d: &[f64]) -> f64 {
    match *cone {
        Cone::NonNeg { .. } => {
            let mut a = f64::INFINITY;
            for k in 0..d.len() {
                if d[k] < 0.0 {
                    a = a.min(-lambda[k] / d[k]);
                }
            }
            a
        }
        Cone::Soc { .. } => {
            let qa = d[0] * d[0] - d[1..].iter().map(|t| t * t).sum::<f64>();
            let qb = lambda[0] * d[0] - lambda[1..].iter().zip(&d[1..]).map(|(a, b)| a * b).sum::<f64>();
            let qc = lambda[0] * lambda[0] - lambda[1..].iter().map(|t| t * t).sum::<f64>();
            smallest_positive_root(qa, qb, qc.max(0.0))
        }
        Cone::Psd { q, .. } => {
            let mut m = smat(d, q);
            for i in 0..q {
                let si = lambda[svec_index(i, i)].sqrt();
                for j in 0..q {
                    m[(i, j)] /= si;
                    m[(j, i)] /= si;
                }
            }
            let min = SymmetricEigen::new(m).eigenvalues.min();
            if min >= 0.0 {
                f64::INFINITY
            } else {
                -1.0 / min
            }
        }
    }
}

/// Smallest positive root of `a α² + 2 b α + c` with `c ≥ 0`.
fn smallest_positive_root(a: f64, b: f64, c: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return f64::INFINITY;
    }
    if a.abs() <= 1e-14 * scale {
        return if b < 0.0 { c / (-2.0 * b) } else { f64::INFINITY };
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let t = -(b + b.signum() * disc.sqrt());
    let mut best = f64::INFINITY;
    for r in [t / a, if t != 0.0 { c / t } else { f64::INFINITY }] {
        if r > 0.0 && r < best {
            best = r;
        }
    }
    best
}

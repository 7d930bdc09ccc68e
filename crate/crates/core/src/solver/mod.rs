//! Primal–dual interior-point solver for cone LPs and writers for the
//! SDPA-sparse and CBF interchange formats.

mod cones;
mod export;
mod ipm;
mod presolve;

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use export::{export_cbf, export_conelp, export_sdpa, ExportFormat};
pub use ipm::IterationLog;

use crate::conversion::{real_embedding, RealEmbedding};
use crate::error::{Error, Result};
use crate::formulation::{scale_conelp, unpack_symmetric, ConeLp, ConeSegment, ConeSpec};
use cones::Cone;
use ipm::{solve_std, svec_factor, StdProblem};
use presolve::{presolve, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative tolerance on primal residual, dual residual and gap.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: f64,
    /// Apply row and objective scaling before solving.
    pub scale: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_iterations: 200,
            step_fraction: 0.98,
            scale: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Validation(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::Validation(format!("step fraction must lie in (0, 1), got {}", self.step_fraction)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    NumericalFailure,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Optimal => "optimal",
            Status::PrimalInfeasible => "primal_infeasible",
            Status::DualInfeasible => "dual_infeasible",
            Status::IterationLimit => "iteration_limit",
            Status::NumericalFailure => "numerical_failure",
        };
        f.write_str(s)
    }
}

/// Relative residuals of the scaled problem at termination, plus the cone
/// violation of the returned point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub cone: f64,
}

/// Infeasibility certificate on the original rows and coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `y` with `bᵀy = 1` and `−Aᵀy` in the dual cone, where `b = −constant`.
    Farkas { y: Vec<f64>, residual: f64 },
    /// `z` in the cone with `A z = 0` and `hᵀz = −1`.
    Ray { z: Vec<f64>, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Primal point (meaningful for `Optimal` and limit statuses).
    pub z: Vec<f64>,
    /// Equality multipliers, one per row.
    pub y: Vec<f64>,
    /// Dual slack `h − Σ y_k g_k`.
    pub s: Vec<f64>,
    /// `hᵀz` plus the objective offset.
    pub objective: f64,
    /// Dual objective plus the objective offset.
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    /// Seconds; excluded from determinism comparisons.
    pub wall_time: f64,
    pub log: Vec<IterationLog>,
}

/// Solve a cone LP over free, nonnegative, second-order and real symmetric
/// PSD segments. Hermitian blocks must go through [`real_embedding`] first
/// (see [`solve_hermitian`]).
pub fn solve(lp: &ConeLp, options: &SolverOptions) -> Result<Solution> {
    options.validate()?;
    lp.validate()?;
    if lp.cone.segments.iter().any(|s| matches!(s, ConeSegment::HermitianPsd(_))) {
        return Err(Error::UnsupportedSegment("hermitian_psd (apply real_embedding first)".into()));
    }
    let start = Instant::now();
    let (work, record) = if options.scale {
        let (s, r) = scale_conelp(lp);
        (s, Some(r))
    } else {
        (lp.clone(), None)
    };
    let pre = presolve(&work, options.tolerance);
    let unscale_ray = |y: Vec<f64>| -> Vec<f64> {
        match &record {
            Some(r) => y.iter().zip(&r.d).map(|(v, d)| v / d).collect(),
            None => y,
        }
    };
    let finish = |status, certificate, iterations, log, residuals| Solution {
        status,
        z: vec![0.0; lp.num_vars()],
        y: vec![0.0; lp.num_rows()],
        s: vec![0.0; lp.num_vars()],
        objective: f64::NAN,
        dual_objective: f64::NAN,
        residuals,
        certificate,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        log,
    };
    let nan = Residuals { primal: f64::NAN, dual: f64::NAN, gap: f64::NAN, cone: f64::NAN };
    match &pre.outcome {
        Outcome::PrimalInfeasible(y) => {
            let cert = farkas_certificate(lp, unscale_ray(y.clone()));
            return Ok(finish(Status::PrimalInfeasible, Some(cert), 0, Vec::new(), nan));
        }
        Outcome::DualInfeasible(z) => {
            let cert = ray_certificate(lp, z.clone());
            return Ok(finish(Status::DualInfeasible, Some(cert), 0, Vec::new(), nan));
        }
        Outcome::Reduced => {}
    }

    // Standard form in svec coordinates.
    let mut cones = Vec::new();
    let mut off = 0;
    for seg in &pre.segments {
        match *seg {
            ConeSegment::NonNeg(n) => cones.push(Cone::NonNeg { off, n }),
            ConeSegment::Soc { dim, count } => {
                for c in 0..count {
                    cones.push(Cone::Soc { off: off + c * dim, dim });
                }
            }
            ConeSegment::SymmetricPsd(q) => cones.push(Cone::Psd { off, q }),
            ConeSegment::Free(_) | ConeSegment::HermitianPsd(_) => unreachable!("removed above"),
        }
        off += seg.dim();
    }
    let n = pre.num_reduced_vars();
    let mut factor = vec![1.0; n];
    for cone in &cones {
        for (l, k) in cone.range().enumerate() {
            factor[k] = svec_factor(cone, l);
        }
    }
    let std = StdProblem {
        n,
        rows: pre.rows.iter().map(|r| r.iter().map(|&(k, v)| (k, v / factor[k])).collect()).collect(),
        b: pre.b.clone(),
        c: pre.c.iter().zip(&factor).map(|(c, f)| c / f).collect(),
        cones,
    };
    let res = solve_std(&std, options);
    let x: Vec<f64> = res.x.iter().zip(&factor).map(|(v, f)| v / f).collect();
    let s: Vec<f64> = res.s.iter().zip(&factor).map(|(v, f)| v * f).collect();
    let residuals = |z: &[f64]| Residuals {
        primal: res.primal_residual,
        dual: res.dual_residual,
        gap: res.gap,
        cone: lp.cone.violation(z),
    };
    match res.status {
        Status::PrimalInfeasible => {
            let y = unscale_ray(pre.duals(&res.y, true));
            let cert = farkas_certificate(lp, y);
            Ok(finish(res.status, Some(cert), res.iterations, res.log, residuals(&vec![0.0; lp.num_vars()])))
        }
        Status::DualInfeasible => {
            let z = pre.primal(&x, true);
            let cert = ray_certificate(lp, z);
            Ok(finish(res.status, Some(cert), res.iterations, res.log, residuals(&vec![0.0; lp.num_vars()])))
        }
        _ => {
            let z = pre.primal(&x, false);
            let y_scaled = pre.duals(&res.y, false);
            let s_scaled = pre.slack(&s);
            let (y, s) = match &record {
                Some(r) => (r.unscale_duals(&y_scaled), s_scaled.iter().map(|v| v * r.h_norm).collect()),
                None => (y_scaled, s_scaled),
            };
            let b: Vec<f64> = lp.rows.iter().map(|r| -r.constant).collect();
            let dual_objective = b.iter().zip(&y).map(|(b, y)| b * y).sum::<f64>() + lp.objective_offset;
            Ok(Solution {
                status: res.status,
                objective: lp.objective_value(&z),
                dual_objective,
                residuals: residuals(&z),
                certificate: None,
                iterations: res.iterations,
                wall_time: start.elapsed().as_secs_f64(),
                log: res.log,
                z,
                y,
                s,
            })
        }
    }
}

/// Normalize a Farkas ray to `bᵀy = 1` and measure its residual.
fn farkas_certificate(lp: &ConeLp, y: Vec<f64>) -> Certificate {
    let by: f64 = lp.rows.iter().zip(&y).map(|(r, y)| -r.constant * y).sum();
    let y: Vec<f64> = y.iter().map(|v| v / by).collect();
    let residual = farkas_residual(lp, &y);
    Certificate::Farkas { y, residual }
}

fn ray_certificate(lp: &ConeLp, z: Vec<f64>) -> Certificate {
    let hz: f64 = lp.objective.iter().zip(&z).map(|(h, z)| h * z).sum();
    let z: Vec<f64> = z.iter().map(|v| v / -hz).collect();
    let residual = ray_residual(lp, &z);
    Certificate::Ray { z, residual }
}

/// Violation of `bᵀy = 1`, `−Aᵀy ∈ K*` for a proposed Farkas vector.
pub fn farkas_residual(lp: &ConeLp, y: &[f64]) -> f64 {
    let mut s = vec![0.0; lp.num_vars()];
    let mut by = 0.0;
    for (r, &yr) in lp.rows.iter().zip(y) {
        by -= r.constant * yr;
        for &(k, v) in &r.terms {
            s[k] -= v * yr;
        }
    }
    dual_cone_violation(&lp.cone, &s).max((by - 1.0).abs())
}

/// Violation of `A z = 0`, `z ∈ K`, `hᵀz = −1` for a proposed primal ray.
pub fn ray_residual(lp: &ConeLp, z: &[f64]) -> f64 {
    let az = lp
        .rows
        .iter()
        .map(|r| r.terms.iter().map(|&(k, v)| v * z[k]).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let hz: f64 = lp.objective.iter().zip(z).map(|(h, z)| h * z).sum();
    az.max(lp.cone.violation(z)).max((hz + 1.0).abs())
}

/// Largest amount by which `s` lies outside the dual cone under the plain
/// coordinate inner product.
pub fn dual_cone_violation(cone: &ConeSpec, s: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (off, seg) in cone.with_offsets() {
        let v = &s[off..off + seg.dim()];
        let viol = match seg {
            ConeSegment::Free(_) => v.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
            ConeSegment::NonNeg(_) | ConeSegment::Soc { .. } => ConeSpec::new(vec![seg]).violation(v),
            ConeSegment::SymmetricPsd(q) => {
                let mut m = unpack_symmetric(v, q);
                for i in 0..q {
                    for j in 0..q {
                        if i != j {
                            m[(i, j)] *= 0.5;
                        }
                    }
                }
                -min_eig(m)
            }
            ConeSegment::HermitianPsd(p) => {
                let mut a = DMatrix::<Complex64>::zeros(p, p);
                for j in 0..p {
                    for i in 0..=j {
                        let (re, im) = crate::formulation::hermitian_coord(i, j);
                        if let Some(im) = im {
                            let x = Complex64::new(v[re], v[im]) * 0.5;
                            a[(i, j)] = x;
                            a[(j, i)] = x.conj();
                        } else {
                            a[(i, i)] = Complex64::new(v[re], 0.0);
                        }
                    }
                }
                -min_eig(crate::formulation::hermitian_to_real(&a))
            }
        };
        worst = worst.max(viol);
    }
    worst
}

fn min_eig(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m).eigenvalues.min()
}

/// Solution of a problem with Hermitian blocks, solved through its real
/// embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSolution {
    /// Solution of the embedded real problem.
    pub real: Solution,
    /// Primal point mapped back to the Hermitian coordinates.
    pub z: Vec<f64>,
    pub embedding: RealEmbedding,
}

impl HermitianSolution {
    pub fn status(&self) -> Status {
        self.real.status
    }

    pub fn objective(&self) -> f64 {
        self.real.objective
    }
}

/// Embed Hermitian blocks as real symmetric blocks, solve, and map the
/// primal point back.
pub fn solve_hermitian(lp: &ConeLp, options: &SolverOptions) -> Result<HermitianSolution> {
    let embedding = real_embedding(lp);
    let real = solve(&embedding.lp, options)?;
    let z = embedding.to_complex(&real.z);
    Ok(HermitianSolution { real, z, embedding })
}

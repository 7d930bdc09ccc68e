//! Cone segments and the coordinate layout of matrix blocks.
//!
//! A Hermitian block of order `p` is stored column by column over its upper
//! triangle: column `j` starts at offset `j²`, the pair `(Re X_ij, Im X_ij)`
//! for `i < j` sits at `j² + 2i` and `j² + 2i + 1`, and `X_jj` at `j² + 2j`.
//! This uses exactly `p²` real coordinates. A real symmetric block of order
//! `q` stores `Z_ij` (`i ≤ j`) at `j(j+1)/2 + i`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSegment {
    /// Unconstrained coordinates.
    Free(usize),
    NonNeg(usize),
    /// `count` second-order cones of dimension `dim`, each `(t, x)` with
    /// `t ≥ ‖x‖₂`.
    Soc { dim: usize, count: usize },
    HermitianPsd(usize),
    SymmetricPsd(usize),
}

impl ConeSegment {
    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        match *self {
            ConeSegment::Free(n) | ConeSegment::NonNeg(n) => n,
            ConeSegment::Soc { dim, count } => dim * count,
            ConeSegment::HermitianPsd(p) => p * p,
            ConeSegment::SymmetricPsd(q) => q * (q + 1) / 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConeSegment::Free(_) => "free",
            ConeSegment::NonNeg(_) => "nonneg",
            ConeSegment::Soc { .. } => "soc",
            ConeSegment::HermitianPsd(_) => "hermitian_psd",
            ConeSegment::SymmetricPsd(_) => "symmetric_psd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConeSpec {
    pub segments: Vec<ConeSegment>,
}

impl ConeSpec {
    pub fn new(segments: Vec<ConeSegment>) -> Self {
        Self {
            segments: segments.into_iter().filter(|s| s.dim() > 0).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.segments.iter().map(ConeSegment::dim).sum()
    }

    /// Dimension excluding free coordinates.
    pub fn cone_dim(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| !matches!(s, ConeSegment::Free(_)))
            .map(ConeSegment::dim)
            .sum()
    }

    /// Segments paired with their starting coordinate.
    pub fn with_offsets(&self) -> impl Iterator<Item = (usize, ConeSegment)> + '_ {
        self.segments.iter().scan(0, |off, &s| {
            let start = *off;
            *off += s.dim();
            Some((start, s))
        })
    }

    /// Largest amount by which `z` lies outside the cone (0 when inside).
    pub fn violation(&self, z: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (off, seg) in self.with_offsets() {
            let v = match seg {
                ConeSegment::Free(_) => 0.0,
                ConeSegment::NonNeg(n) => z[off..off + n].iter().fold(0.0, |m: f64, &x| m.max(-x)),
                ConeSegment::Soc { dim, count } => (0..count)
                    .map(|c| {
                        let s = &z[off + c * dim..off + (c + 1) * dim];
                        norm(&s[1..]) - s[0]
                    })
                    .fold(0.0, f64::max),
                ConeSegment::HermitianPsd(p) => {
                    let x = unpack_hermitian(&z[off..off + p * p], p);
                    -min_eigenvalue(&hermitian_to_real(&x))
                }
                ConeSegment::SymmetricPsd(q) => -min_eigenvalue(&unpack_symmetric(&z[off..off + q * (q + 1) / 2], q)),
            };
            worst = worst.max(v);
        }
        worst
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Offsets of `(Re X_ij, Im X_ij)` within a Hermitian block, `i ≤ j`; the
/// imaginary slot is `None` on the diagonal.
pub fn hermitian_coord(i: usize, j: usize) -> (usize, Option<usize>) {
    debug_assert!(i <= j);
    if i == j {
        (j * j + 2 * j, None)
    } else {
        (j * j + 2 * i, Some(j * j + 2 * i + 1))
    }
}

/// Offset of `Z_ij`, `i ≤ j`, within a symmetric block.
pub fn symmetric_coord(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Coefficients `(offset, value)` of the linear functional `tr(A X)` over the
/// coordinates of a Hermitian block; `A` must be Hermitian.
pub fn hermitian_trace_terms(entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (i, j, a) in entries {
        if i > j {
            continue;
        }
        let (re, im) = hermitian_coord(i, j);
        match im {
            None => out.push((re, a.re)),
            Some(im) => {
                out.push((re, 2.0 * a.re));
                out.push((im, 2.0 * a.im));
            }
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    out
}

pub fn pack_hermitian(x: &DMatrix<Complex64>) -> Vec<f64> {
    let p = x.nrows();
    let mut out = vec![0.0; p * p];
    for j in 0..p {
        for i in 0..=j {
            let (re, im) = hermitian_coord(i, j);
            out[re] = x[(i, j)].re;
            if let Some(im) = im {
                out[im] = x[(i, j)].im;
            }
        }
    }
    out
}

pub fn unpack_hermitian(z: &[f64], p: usize) -> DMatrix<Complex64> {
    let mut x = DMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            let (re, im) = hermitian_coord(i, j);
            let v = Complex64::new(z[re], im.map_or(0.0, |k| z[k]));
            x[(i, j)] = v;
            x[(j, i)] = v.conj();
        }
    }
    x
}

pub fn pack_symmetric(x: &DMatrix<f64>) -> Vec<f64> {
    let q = x.nrows();
    let mut out = Vec::with_capacity(q * (q + 1) / 2);
    for j in 0..q {
        for i in 0..=j {
            out.push(x[(i, j)]);
        }
    }
    out
}

pub fn unpack_symmetric(z: &[f64], q: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(q, q);
    for j in 0..q {
        for i in 0..=j {
            let v = z[symmetric_coord(i, j)];
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
    x
}

/// `[[Re X, −Im X], [Im X, Re X]]`.
pub fn hermitian_to_real(x: &DMatrix<Complex64>) -> DMatrix<f64> {
    let p = x.nrows();
    let mut z = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            let v = x[(i, j)];
            z[(i, j)] = v.re;
            z[(p + i, p + j)] = v.re;
            z[(p + i, j)] = v.im;
            z[(i, p + j)] = -v.im;
        }
    }
    z
}

/// Inverse of [`hermitian_to_real`] that averages the duplicated parts, so it
/// also projects a general symmetric matrix onto the embedded structure.
pub fn real_to_hermitian(z: &DMatrix<f64>) -> DMatrix<Complex64> {
    let p = z.nrows() / 2;
    DMatrix::from_fn(p, p, |i, j| {
        Complex64::new(
            0.5 * (z[(i, j)] + z[(p + i, p + j)]),
            0.5 * (z[(p + i, j)] - z[(i, p + j)]),
        )
    })
}

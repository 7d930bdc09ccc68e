use serde::{Deserialize, Serialize};

use crate::formulation::{
    hermitian_coord, hermitian_to_real, pack_hermitian, pack_symmetric, real_to_hermitian, symmetric_coord,
    unpack_hermitian, unpack_symmetric, ConeLp, ConeSegment, ConeSpec, LinearForm,
};

/// A cone LP whose Hermitian blocks were replaced by real symmetric blocks of
/// twice the order, together with the coordinate maps between the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealEmbedding {
    pub lp: ConeLp,
    /// Per original segment: (original offset, new offset, segment).
    layout: Vec<(usize, usize, ConeSegment)>,
    original_vars: usize,
}

/// Real symmetric coordinates `(index, weight)` whose weighted sum equals the
/// Hermitian coordinate, for `Z = [[Re X, −Im X], [Im X, Re X]]`.
fn substitution(p: usize, i: usize, j: usize, imag: bool) -> [(usize, f64); 2] {
    if !imag {
        [(symmetric_coord(i, j), 0.5), (symmetric_coord(p + i, p + j), 0.5)]
    } else {
        // Im X_ij = (Z[p+i, j] − Z[i, p+j]) / 2 with j < p + i.
        [(symmetric_coord(j, p + i), 0.5), (symmetric_coord(i, p + j), -0.5)]
    }
}

/// Realize every Hermitian block of order `p` as a real symmetric block of
/// order `2p`; rows and objective are rewritten so that
/// `tr(A X) = ½ tr(A_Z Z)`. The row count is unchanged.
pub fn real_embedding(lp: &ConeLp) -> RealEmbedding {
    let mut layout = Vec::new();
    let mut segments = Vec::new();
    let mut new_off = 0;
    for (off, seg) in lp.cone.with_offsets() {
        layout.push((off, new_off, seg));
        let new_seg = match seg {
            ConeSegment::HermitianPsd(p) => ConeSegment::SymmetricPsd(2 * p),
            s => s,
        };
        new_off += new_seg.dim();
        segments.push(new_seg);
    }
    let cone = ConeSpec::new(segments);
    // Map of each original coordinate to its replacement terms.
    let mut map: Vec<Vec<(usize, f64)>> = Vec::with_capacity(lp.num_vars());
    for &(_, noff, seg) in &layout {
        match seg {
            ConeSegment::HermitianPsd(p) => {
                let start = map.len();
                map.resize(start + p * p, Vec::new());
                for j in 0..p {
                    for i in 0..=j {
                        let (re, im) = hermitian_coord(i, j);
                        map[start + re] = if i == j {
                            vec![(noff + symmetric_coord(i, i), 0.5), (noff + symmetric_coord(p + i, p + i), 0.5)]
                        } else {
                            substitution(p, i, j, false).iter().map(|&(k, w)| (noff + k, w)).collect()
                        };
                        if let Some(im) = im {
                            map[start + im] = substitution(p, i, j, true).iter().map(|&(k, w)| (noff + k, w)).collect();
                        }
                    }
                }
            }
            s => {
                for t in 0..s.dim() {
                    map.push(vec![(noff + t, 1.0)]);
                }
            }
        }
    }
    let rewrite = |terms: &[(usize, f64)]| -> Vec<(usize, f64)> {
        terms
            .iter()
            .flat_map(|&(k, v)| map[k].iter().map(move |&(t, w)| (t, v * w)))
            .collect()
    };
    let objective_terms: Vec<(usize, f64)> = lp.objective.iter().enumerate().filter(|(_, &h)| h != 0.0).map(|(k, &h)| (k, h)).collect();
    let mut objective = vec![0.0; cone.dim()];
    for (t, v) in rewrite(&objective_terms) {
        objective[t] += v;
    }
    let rows = lp.rows.iter().map(|r| LinearForm::new(rewrite(&r.terms), r.constant)).collect();
    RealEmbedding {
        lp: ConeLp {
            cone,
            objective,
            objective_offset: lp.objective_offset,
            rows,
        },
        layout,
        original_vars: lp.num_vars(),
    }
}

impl RealEmbedding {
    /// Real point of a complex-side point (`Z` is the exact embedding of `X`).
    pub fn to_real(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.lp.num_vars()];
        for &(off, noff, seg) in &self.layout {
            match seg {
                ConeSegment::HermitianPsd(p) => {
                    let zr = pack_symmetric(&hermitian_to_real(&unpack_hermitian(&z[off..off + p * p], p)));
                    out[noff..noff + zr.len()].copy_from_slice(&zr);
                }
                s => out[noff..noff + s.dim()].copy_from_slice(&z[off..off + s.dim()]),
            }
        }
        out
    }

    /// Complex-side point of a real point; symmetric blocks are projected
    /// onto the embedded structure.
    pub fn to_complex(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.original_vars];
        for &(off, noff, seg) in &self.layout {
            match seg {
                ConeSegment::HermitianPsd(p) => {
                    let q = 2 * p;
                    let x = real_to_hermitian(&unpack_symmetric(&z[noff..noff + q * (q + 1) / 2], q));
                    out[off..off + p * p].copy_from_slice(&pack_hermitian(&x));
                }
                s => out[off..off + s.dim()].copy_from_slice(&z[noff..noff + s.dim()]),
            }
        }
        out
    }

    /// Per original segment: (original offset, real offset, original segment).
    pub fn layout(&self) -> &[(usize, usize, ConeSegment)] {
        &self.layout
    }
}

use std::collections::HashSet;

use super::{ConeLp, ConeSegment, ConeSpec, LinearForm, VariableMap};
use crate::error::{Error, Result};

/// Replace `X ⪰ 0` by positive semidefiniteness of the listed 2×2 principal
/// submatrices, each written as the 4-dimensional second-order cone
/// `(X_ii + X_jj, X_ii − X_jj, 2 Re X_ij, 2 Im X_ij)`.
///
/// The coordinates of `X` become free variables and four linking rows are
/// appended per minor, followed by a new cone segment holding the minors.
pub fn soc_minor_relaxation(lp: &ConeLp, vm: &VariableMap, minors: &[(usize, usize)]) -> Result<ConeLp> {
    let mut seen = HashSet::new();
    for &(i, j) in minors {
        if i == j || i.max(j) >= vm.order {
            return Err(Error::Formulation(format!("invalid minor ({i}, {j})")));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::DuplicateMinor(i.min(j), i.max(j)));
        }
    }
    let mut segments = Vec::with_capacity(lp.cone.segments.len() + 1);
    let mut replaced = false;
    for (off, seg) in lp.cone.with_offsets() {
        match seg {
            ConeSegment::HermitianPsd(p) if off == vm.x_block.start && p == vm.order => {
                segments.push(ConeSegment::Free(p * p));
                replaced = true;
            }
            s => segments.push(s),
        }
    }
    if !replaced {
        return Err(Error::Formulation("matrix block not found in cone".into()));
    }
    segments.push(ConeSegment::Soc {
        dim: 4,
        count: minors.len(),
    });
    let cone = ConeSpec::new(segments);
    let mut out = lp.clone();
    let base = lp.num_vars();
    out.objective.resize(cone.dim(), 0.0);
    out.cone = cone;
    for (m, &(a, b)) in minors.iter().enumerate() {
        let (i, j) = (a.min(b), a.max(b));
        let u = base + 4 * m;
        let (xi, _) = vm.x_coord(i, i);
        let (xj, _) = vm.x_coord(j, j);
        let (re, im) = vm.x_coord(i, j);
        let im = im.expect("off-diagonal entry");
        out.rows.push(LinearForm::new(vec![(u, 1.0), (xi, -1.0), (xj, -1.0)], 0.0));
        out.rows.push(LinearForm::new(vec![(u + 1, 1.0), (xi, -1.0), (xj, 1.0)], 0.0));
        out.rows.push(LinearForm::new(vec![(u + 2, 1.0), (re, -2.0)], 0.0));
        out.rows.push(LinearForm::new(vec![(u + 3, 1.0), (im, -2.0)], 0.0));
    }
    Ok(out)
}

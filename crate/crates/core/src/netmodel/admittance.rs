use num_complex::Complex64;

use super::{Branch, ComplexSparseMatrix, Network};
use crate::error::{Error, Result};

/// Per-branch π-model admittances `(y_ff, y_ft, y_tf, y_tt)`.
pub(crate) fn branch_admittances(br: &Branch) -> Result<(Complex64, Complex64, Complex64, Complex64)> {
    let z = Complex64::new(br.r, br.x);
    if z.norm() == 0.0 {
        return Err(Error::SingularBranch { branch: br.id });
    }
    let ys = z.inv();
    let half_b = Complex64::new(0.0, 0.5 * br.b_charging);
    let tap = Complex64::from_polar(br.tap_ratio, br.phase_shift);
    let ytt = ys + half_b;
    let yff = ytt / (br.tap_ratio * br.tap_ratio);
    let yft = -ys / tap.conj();
    let ytf = -ys / tap;
    Ok((yff, yft, ytf, ytt))
}

/// Bus admittance matrix `Y` with `i = Y v`.
pub fn build_admittance(network: &Network) -> Result<ComplexSparseMatrix> {
    let n = network.num_buses();
    let mut t = Vec::with_capacity(4 * network.branches.len() + n);
    for br in &network.branches {
        let (yff, yft, ytf, ytt) = branch_admittances(br)?;
        t.push((br.from, br.from, yff));
        t.push((br.from, br.to, yft));
        t.push((br.to, br.from, ytf));
        t.push((br.to, br.to, ytt));
    }
    for (k, bus) in network.buses.iter().enumerate() {
        t.push((k, k, Complex64::new(bus.shunt_g, bus.shunt_b)));
    }
    Ok(ComplexSparseMatrix::from_triplets(n, t))
}

/// The Hermitian pair `(Y_k, Ỹ_k)` with `vᴴY_k v = Re(i_k* v_k)` and
/// `vᴴỸ_k v = Im(i_k* v_k)`.
pub fn bus_injection_matrices(y: &ComplexSparseMatrix, k: usize) -> Result<(ComplexSparseMatrix, ComplexSparseMatrix)> {
    let n = y.order();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    // B = Yᴴ e_k e_kᵀ has column k equal to the conjugated row k of Y.
    let b = ComplexSparseMatrix::from_triplets(
        n,
        y.entries()
            .iter()
            .filter(|&&(i, _, _)| i == k)
            .map(|&(_, m, v)| (m, k, v.conj())),
    );
    Ok(b.hermitian_split())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchFlowMatrices {
    /// Real power into the branch at the from end.
    pub t_from: ComplexSparseMatrix,
    /// Reactive power into the branch at the from end.
    pub t_from_q: ComplexSparseMatrix,
    pub t_to: ComplexSparseMatrix,
    pub t_to_q: ComplexSparseMatrix,
}

/// Flow matrices of one branch so that the complex power entering the branch
/// at the from end is `vᴴT_from v + j·vᴴT_from_q v` (likewise at the to end).
pub fn branch_flow_matrices(network: &Network, branch: usize) -> Result<BranchFlowMatrices> {
    let br = network.branches.get(branch).ok_or(Error::IndexOutOfRange {
        index: branch,
        len: network.branches.len(),
    })?;
    let n = network.num_buses();
    let (yff, yft, ytf, ytt) = branch_admittances(br)?;
    let (f, t) = (br.from, br.to);
    // S_f = v_f conj(i_f) = vᴴ conj(y_f) e_fᵀ v.
    let bf = ComplexSparseMatrix::from_triplets(n, [(f, f, yff.conj()), (t, f, yft.conj())]);
    let bt = ComplexSparseMatrix::from_triplets(n, [(f, t, ytf.conj()), (t, t, ytt.conj())]);
    let (t_from, t_from_q) = bf.hermitian_split();
    let (t_to, t_to_q) = bt.hermitian_split();
    Ok(BranchFlowMatrices {
        t_from,
        t_from_q,
        t_to,
        t_to_q,
    })
}

/// Complex power entering a branch at both ends, straight from the π-model.
pub fn branch_flows(br: &Branch, v: &[Complex64]) -> Result<(Complex64, Complex64)> {
    let (yff, yft, ytf, ytt) = branch_admittances(br)?;
    let (vf, vt) = (v[br.from], v[br.to]);
    let i_f = yff * vf + yft * vt;
    let i_t = ytf * vf + ytt * vt;
    Ok((vf * i_f.conj(), vt * i_t.conj()))
}

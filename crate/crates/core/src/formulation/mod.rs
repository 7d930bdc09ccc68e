//! The semidefinite relaxation of the OPF problem written as a cone linear
//! program
//!
//! ```text
//! minimize hᵀz   subject to   Gᵀz + c = 0,   z ∈ K
//! ```
//!
//! Each equality is stored as a [`LinearForm`] whose value must vanish.

mod cone;
mod minors;
mod scaling;

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{branch_flow_matrices, build_admittance, bus_injection_matrices, GeneratorKind, Network};

pub use cone::{
    hermitian_coord, hermitian_to_real, hermitian_trace_terms, pack_hermitian, pack_symmetric, real_to_hermitian,
    symmetric_coord, unpack_hermitian, unpack_symmetric, ConeSegment, ConeSpec,
};
pub use minors::soc_minor_relaxation;
pub use scaling::{scale_conelp, ScalingRecord};

/// `constant + Σ coef·z[index]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearForm {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearForm {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { terms, constant }.canonical()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    /// Sort by index, merge duplicates and drop zero coefficients.
    pub fn canonical(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (k, v) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 += v,
                _ => out.push((k, v)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
        self
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(k, v)| v * z[k]).sum::<f64>()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.1.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeLp {
    pub cone: ConeSpec,
    /// Objective vector `h`, one entry per coordinate.
    pub objective: Vec<f64>,
    /// Constant added to `hᵀz` to report the true cost.
    pub objective_offset: f64,
    /// Equality rows, each required to evaluate to zero.
    pub rows: Vec<LinearForm>,
}

impl ConeLp {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_vars(&self) -> usize {
        self.cone.dim()
    }

    /// `hᵀz + offset`.
    pub fn objective_value(&self, z: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(z).map(|(h, x)| h * x).sum::<f64>()
    }

    pub fn row_values(&self, z: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.eval(z)).collect()
    }

    pub fn max_row_residual(&self, z: &[f64]) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.eval(z).abs()))
    }

    /// Check sizes, index bounds and finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "objective has {} entries for {n} variables",
                self.objective.len()
            )));
        }
        if self.objective.iter().any(|v| !v.is_finite()) || !self.objective_offset.is_finite() {
            return Err(Error::Formulation("non-finite objective data".into()));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.constant.is_finite() {
                return Err(Error::Formulation(format!("row {r} has a non-finite constant")));
            }
            for &(k, v) in &row.terms {
                if k >= n {
                    return Err(Error::IndexOutOfRange { index: k, len: n });
                }
                if !v.is_finite() {
                    return Err(Error::Formulation(format!("row {r} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lp: ConeLp = serde_json::from_str(text).map_err(|e| Error::parse("conelp", e.to_string()))?;
        lp.validate()?;
        Ok(lp)
    }
}

/// Where each group of relaxation variables lives in `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    /// Cost epigraph variables `t_g`, one per quadratic generator.
    pub t: Range<usize>,
    pub p_lower: Range<usize>,
    pub p_upper: Range<usize>,
    pub q_lower: Range<usize>,
    pub q_upper: Range<usize>,
    pub nu_lower: Range<usize>,
    pub nu_upper: Range<usize>,
    /// Six coordinates per flow-limited branch: `z_kl` then `z_lk`.
    pub z_flow: Range<usize>,
    /// Three coordinates per quadratic generator.
    pub w_cost: Range<usize>,
    /// The Hermitian matrix variable `X`.
    pub x_block: Range<usize>,
    pub order: usize,
    /// Generator indices owning `p_lower`/`p_upper` entries (non-fixed).
    pub dispatchable: Vec<usize>,
    /// Generator indices owning `t`/`w_cost` entries.
    pub quadratic: Vec<usize>,
    /// Branch indices owning `z_flow` entries.
    pub flow_branches: Vec<usize>,
}

impl VariableMap {
    /// Coordinates of `(Re X_ij, Im X_ij)`; the pair is normalized to `i ≤ j`
    /// (the imaginary part of an entry below the diagonal is the negative of
    /// the stored one).
    pub fn x_coord(&self, i: usize, j: usize) -> (usize, Option<usize>) {
        let (re, im) = hermitian_coord(i.min(j), i.max(j));
        (self.x_block.start + re, im.map(|k| self.x_block.start + k))
    }

    /// Name of the variable group holding coordinate `k`.
    pub fn describe(&self, k: usize) -> Option<String> {
        let groups = [
            ("t", &self.t),
            ("p_lower", &self.p_lower),
            ("p_upper", &self.p_upper),
            ("q_lower", &self.q_lower),
            ("q_upper", &self.q_upper),
            ("nu_lower", &self.nu_lower),
            ("nu_upper", &self.nu_upper),
            ("z_flow", &self.z_flow),
            ("w_cost", &self.w_cost),
            ("x", &self.x_block),
        ];
        groups
            .iter()
            .find(|(_, r)| r.contains(&k))
            .map(|(name, r)| format!("{name}[{}]", k - r.start))
    }

    pub fn x_matrix(&self, z: &[f64]) -> nalgebra::DMatrix<Complex64> {
        unpack_hermitian(&z[self.x_block.clone()], self.order)
    }
}

/// Total scalar count of the cone variables (free epigraph variables are not
/// counted): `2|G_disp| + 2|G| + 2|N| + 3(2|F| + |G_quad|) + |N|²`, which is
/// `4|G| + 2|N| + 3(2|F| + |G_quad|) + |N|²` when no generator is fixed.
pub fn count_variables(network: &Network) -> usize {
    let g = network.generators.len();
    let fixed = network.count_kind(GeneratorKind::Fixed);
    let quad = network.count_kind(GeneratorKind::Quadratic);
    let n = network.num_buses();
    2 * (g - fixed) + 2 * g + 2 * n + 3 * (2 * network.flow_limited.len() + quad) + n * n
}

/// Closed-form number of equality rows of [`build_sdr`]:
/// `4|N| + 2|G_disp| + |G_fix| + 3(2|F| + |G_quad|)`.
pub fn count_rows(network: &Network) -> usize {
    let g = network.generators.len();
    let fixed = network.count_kind(GeneratorKind::Fixed);
    let quad = network.count_kind(GeneratorKind::Quadratic);
    4 * network.num_buses() + 2 * g - fixed + 3 * (2 * network.flow_limited.len() + quad)
}

/// The three epigraph rows `w = (1/2 + t − βp, 1/2 − t + βp, √(2α)p)` for a
/// quadratic cost `αp² + βp ≤ t`, where `p` is an affine expression. The
/// rows constrain the coordinates `w..w+3`, which must form one 3-dimensional
/// second-order cone.
pub fn quadratic_cost_rows(alpha: f64, beta: f64, p: &LinearForm, t: usize, w: usize) -> [LinearForm; 3] {
    let scaled = |f: f64| p.terms.iter().map(move |&(k, v)| (k, f * v));
    let s = (2.0 * alpha).sqrt();
    let mut r1: Vec<(usize, f64)> = vec![(w, 1.0), (t, -1.0)];
    r1.extend(scaled(beta));
    let mut r2: Vec<(usize, f64)> = vec![(w + 1, 1.0), (t, 1.0)];
    r2.extend(scaled(-beta));
    let mut r3: Vec<(usize, f64)> = vec![(w + 2, 1.0)];
    r3.extend(scaled(-s));
    [
        LinearForm::new(r1, -0.5 + beta * p.constant),
        LinearForm::new(r2, -0.5 - beta * p.constant),
        LinearForm::new(r3, -s * p.constant),
    ]
}

/// The six rows `z_kl = (S_max, tr(T_kl X), tr(T̃_kl X))` and likewise
/// `z_lk` for one flow-limited branch. `z` is the first of six coordinates and
/// `x_offset` the start of the Hermitian block.
pub fn flow_limit_rows(network: &Network, branch: usize, z: usize, x_offset: usize) -> Result<[LinearForm; 6]> {
    let br = network.branches.get(branch).ok_or(Error::IndexOutOfRange {
        index: branch,
        len: network.branches.len(),
    })?;
    let s_max = br.s_max.ok_or(Error::MissingLimit { branch: br.id })?;
    let fm = branch_flow_matrices(network, branch)?;
    let trace_row = |slot: usize, m: &crate::netmodel::ComplexSparseMatrix| {
        let mut terms: Vec<(usize, f64)> = hermitian_trace_terms(m.upper_entries())
            .into_iter()
            .map(|(k, v)| (x_offset + k, -v))
            .collect();
        terms.push((slot, 1.0));
        LinearForm::new(terms, 0.0)
    };
    Ok([
        LinearForm::new(vec![(z, 1.0)], -s_max),
        trace_row(z + 1, &fm.t_from),
        trace_row(z + 2, &fm.t_from_q),
        LinearForm::new(vec![(z + 3, 1.0)], -s_max),
        trace_row(z + 4, &fm.t_to),
        trace_row(z + 5, &fm.t_to_q),
    ])
}

/// Build the SDR cone LP and its variable map.
///
/// Rows: real power balance per bus, reactive power balance per bus, real
/// slack pairs per dispatchable generator, reactive slack pairs per
/// generator, lower then upper voltage rows per bus, flow rows per
/// flow-limited branch, and cost epigraph rows per quadratic generator.
/// Fixed generators inject `p = p_min = p_max` as a constant.
pub fn build_sdr(network: &Network) -> Result<(ConeLp, VariableMap)> {
    let n = network.num_buses();
    for g in &network.generators {
        if g.kind == GeneratorKind::Quadratic && !(g.alpha > 0.0) {
            return Err(Error::Formulation(format!(
                "generator {} is quadratic but has alpha = {}",
                g.id, g.alpha
            )));
        }
    }
    let dispatchable: Vec<usize> = (0..network.generators.len())
        .filter(|&g| network.generators[g].kind != GeneratorKind::Fixed)
        .collect();
    let quadratic: Vec<usize> = (0..network.generators.len())
        .filter(|&g| network.generators[g].kind == GeneratorKind::Quadratic)
        .collect();
    let flow_branches = network.flow_limited.clone();
    let (nd, ng, nq, nf) = (dispatchable.len(), network.generators.len(), quadratic.len(), flow_branches.len());

    let mut at = 0;
    let mut take = |len: usize| {
        let r = at..at + len;
        at += len;
        r
    };
    let vm = VariableMap {
        t: take(nq),
        p_lower: take(nd),
        p_upper: take(nd),
        q_lower: take(ng),
        q_upper: take(ng),
        nu_lower: take(n),
        nu_upper: take(n),
        z_flow: take(6 * nf),
        w_cost: take(3 * nq),
        x_block: take(n * n),
        order: n,
        dispatchable,
        quadratic,
        flow_branches,
    };
    let cone = ConeSpec::new(vec![
        ConeSegment::Free(nq),
        ConeSegment::NonNeg(2 * nd + 2 * ng + 2 * n),
        ConeSegment::Soc {
            dim: 3,
            count: 2 * nf + nq,
        },
        ConeSegment::HermitianPsd(n),
    ]);
    let nvars = cone.dim();
    debug_assert_eq!(nvars, at);

    let x0 = vm.x_block.start;
    let shift = |terms: Vec<(usize, f64)>| terms.into_iter().map(|(k, v)| (x0 + k, v)).collect::<Vec<_>>();
    let y = build_admittance(network)?;
    let disp_pos = |g: usize| vm.dispatchable.iter().position(|&d| d == g);

    let mut p_rows = Vec::with_capacity(n);
    let mut q_rows = Vec::with_capacity(n);
    for k in 0..n {
        let (yk, ykt) = bus_injection_matrices(&y, k)?;
        let bus = &network.buses[k];
        let mut p_terms = shift(hermitian_trace_terms(yk.upper_entries()));
        let mut q_terms = shift(hermitian_trace_terms(ykt.upper_entries()));
        let mut p_const = bus.p_demand;
        let mut q_const = bus.q_demand;
        for (gi, g) in network.generators_at(k) {
            match disp_pos(gi) {
                Some(d) => {
                    p_terms.push((vm.p_lower.start + d, -1.0));
                    p_const -= g.p_min;
                }
                None => p_const -= 0.5 * (g.p_min + g.p_max),
            }
            q_terms.push((vm.q_lower.start + gi, -1.0));
            q_const -= g.q_min;
        }
        p_rows.push(LinearForm::new(p_terms, p_const));
        q_rows.push(LinearForm::new(q_terms, q_const));
    }
    let mut rows = p_rows;
    rows.extend(q_rows);
    for (d, &gi) in vm.dispatchable.iter().enumerate() {
        let g = &network.generators[gi];
        rows.push(LinearForm::new(
            vec![(vm.p_lower.start + d, 1.0), (vm.p_upper.start + d, 1.0)],
            -(g.p_max - g.p_min),
        ));
    }
    for (gi, g) in network.generators.iter().enumerate() {
        rows.push(LinearForm::new(
            vec![(vm.q_lower.start + gi, 1.0), (vm.q_upper.start + gi, 1.0)],
            -(g.q_max - g.q_min),
        ));
    }
    for k in 0..n {
        let (d, _) = vm.x_coord(k, k);
        let v = network.buses[k].v_min;
        rows.push(LinearForm::new(vec![(d, 1.0), (vm.nu_lower.start + k, -1.0)], -v * v));
    }
    for k in 0..n {
        let (d, _) = vm.x_coord(k, k);
        let v = network.buses[k].v_max;
        rows.push(LinearForm::new(vec![(d, 1.0), (vm.nu_upper.start + k, 1.0)], -v * v));
    }
    for (f, &b) in vm.flow_branches.iter().enumerate() {
        rows.extend(flow_limit_rows(network, b, vm.z_flow.start + 6 * f, x0)?);
    }
    let mut objective = vec![0.0; nvars];
    let mut offset = network.fixed_cost();
    for (d, &gi) in vm.dispatchable.iter().enumerate() {
        let g = &network.generators[gi];
        if g.kind == GeneratorKind::Linear {
            objective[vm.p_lower.start + d] = g.beta;
            offset += g.beta * g.p_min;
        }
    }
    for (qi, &gi) in vm.quadratic.iter().enumerate() {
        let g = &network.generators[gi];
        let d = disp_pos(gi).expect("quadratic generators are dispatchable");
        let p = LinearForm {
            terms: vec![(vm.p_lower.start + d, 1.0)],
            constant: g.p_min,
        };
        let t = vm.t.start + qi;
        rows.extend(quadratic_cost_rows(g.alpha, g.beta, &p, t, vm.w_cost.start + 3 * qi));
        objective[t] = 1.0;
    }
    let lp = ConeLp {
        cone,
        objective,
        objective_offset: offset,
        rows,
    };
    debug_assert_eq!(lp.num_rows(), count_rows(network));
    lp.validate()?;
    Ok((lp, vm))
}

/// Generator set points `(p_g, q_g)` for every generator.
pub type Dispatch = Vec<(f64, f64)>;

/// The point of the relaxation induced by a voltage vector and dispatch:
/// `X = vvᴴ`, slacks from the bounds, flow vectors from the flows and cost
/// epigraph variables at equality. Feasibility of the original problem makes
/// the returned point satisfy every row and cone.
pub fn lift_point(network: &Network, vm: &VariableMap, v: &[Complex64], dispatch: &[(f64, f64)]) -> Vec<f64> {
    let n = vm.order;
    let total = vm.x_block.end;
    let mut z = vec![0.0; total];
    for (d, &gi) in vm.dispatchable.iter().enumerate() {
        let g = &network.generators[gi];
        z[vm.p_lower.start + d] = dispatch[gi].0 - g.p_min;
        z[vm.p_upper.start + d] = g.p_max - dispatch[gi].0;
    }
    for (gi, g) in network.generators.iter().enumerate() {
        z[vm.q_lower.start + gi] = dispatch[gi].1 - g.q_min;
        z[vm.q_upper.start + gi] = g.q_max - dispatch[gi].1;
    }
    for k in 0..n {
        let m2 = v[k].norm_sqr();
        z[vm.nu_lower.start + k] = m2 - network.buses[k].v_min.powi(2);
        z[vm.nu_upper.start + k] = network.buses[k].v_max.powi(2) - m2;
    }
    for (f, &b) in vm.flow_branches.iter().enumerate() {
        let br = &network.branches[b];
        let (sf, st) = crate::netmodel::branch_flows(br, v).expect("valid branch");
        let s_max = br.s_max.unwrap_or(0.0);
        let base = vm.z_flow.start + 6 * f;
        z[base..base + 6].copy_from_slice(&[s_max, sf.re, sf.im, s_max, st.re, st.im]);
    }
    for (qi, &gi) in vm.quadratic.iter().enumerate() {
        let g = &network.generators[gi];
        let p = dispatch[gi].0;
        let t = g.alpha * p * p + g.beta * p;
        z[vm.t.start + qi] = t;
        let w = vm.w_cost.start + 3 * qi;
        z[w] = 0.5 + t - g.beta * p;
        z[w + 1] = 0.5 - t + g.beta * p;
        z[w + 2] = (2.0 * g.alpha).sqrt() * p;
    }
    let x = nalgebra::DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
    z[vm.x_block.clone()].copy_from_slice(&pack_hermitian(&x));
    z
}

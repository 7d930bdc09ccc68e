use serde::{Deserialize, Serialize};

use super::recovery::RecoveredSolution;
use crate::error::Result;
use crate::formulation::Dispatch;
use crate::netmodel::{branch_flows, build_admittance, Network};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Largest real power mismatch over buses without generators.
    pub max_p_balance: f64,
    /// Largest reactive power mismatch over buses without generators.
    pub max_q_balance: f64,
    /// Largest amount by which inferred dispatch had to be clipped.
    pub max_generation_violation: f64,
    pub max_voltage_violation: f64,
    pub max_flow_violation: f64,
    /// `|objective − relaxation bound|`.
    pub objective_gap: f64,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.max_p_balance,
            self.max_q_balance,
            self.max_generation_violation,
            self.max_voltage_violation,
            self.max_flow_violation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Complex power injected at every bus, `s = v ∘ conj(Y v)`.
pub fn bus_injections(network: &Network, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let y = build_admittance(network)?;
    Ok(y.mul_vec(v).iter().zip(v).map(|(i, vk)| vk * i.conj()).collect())
}

/// Share `total` among generators with bounds `[lo_g, hi_g]` in proportion to
/// their bound widths (equally when every width is zero). Values are not
/// clipped.
fn distribute(total: f64, bounds: &[(f64, f64)]) -> Vec<f64> {
    let floor: f64 = bounds.iter().map(|b| b.0).sum();
    let width: f64 = bounds.iter().map(|b| b.1 - b.0).sum();
    let extra = total - floor;
    bounds
        .iter()
        .map(|&(lo, hi)| {
            if width > 0.0 {
                lo + extra * (hi - lo) / width
            } else {
                lo + extra / bounds.len() as f64
            }
        })
        .collect()
}

/// Generator set points that exactly balance the bus injections at `v`.
/// Buses without generators keep their mismatch; see [`check_feasibility`].
pub fn infer_dispatch(network: &Network, v: &[Complex64]) -> Result<Dispatch> {
    let s = bus_injections(network, v)?;
    let mut dispatch = vec![(0.0, 0.0); network.generators.len()];
    for (k, bus) in network.buses.iter().enumerate() {
        let gens: Vec<usize> = network.generators_at(k).map(|(g, _)| g).collect();
        if gens.is_empty() {
            continue;
        }
        let pb: Vec<(f64, f64)> = gens.iter().map(|&g| (network.generators[g].p_min, network.generators[g].p_max)).collect();
        let qb: Vec<(f64, f64)> = gens.iter().map(|&g| (network.generators[g].q_min, network.generators[g].q_max)).collect();
        let p = distribute(s[k].re + bus.p_demand, &pb);
        let q = distribute(s[k].im + bus.q_demand, &qb);
        for (i, &g) in gens.iter().enumerate() {
            dispatch[g] = (p[i], q[i]);
        }
    }
    Ok(dispatch)
}

fn excess(x: f64, lo: f64, hi: f64) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

/// Residuals of the original power flow constraints at a recovered point.
pub fn check_feasibility(network: &Network, recovered: &RecoveredSolution) -> Result<FeasibilityReport> {
    let v = &recovered.voltages;
    let s = bus_injections(network, v)?;
    let mut report = FeasibilityReport {
        max_p_balance: 0.0,
        max_q_balance: 0.0,
        max_generation_violation: 0.0,
        max_voltage_violation: 0.0,
        max_flow_violation: 0.0,
        objective_gap: (recovered.objective - recovered.relaxation_bound).abs(),
    };
    for (k, bus) in network.buses.iter().enumerate() {
        if network.generators_at(k).next().is_none() {
            report.max_p_balance = report.max_p_balance.max((s[k].re + bus.p_demand).abs());
            report.max_q_balance = report.max_q_balance.max((s[k].im + bus.q_demand).abs());
        }
        report.max_voltage_violation = report.max_voltage_violation.max(excess(v[k].norm(), bus.v_min, bus.v_max));
    }
    for (g, &(p, q)) in network.generators.iter().zip(&infer_dispatch(network, v)?) {
        let e = excess(p, g.p_min, g.p_max).max(excess(q, g.q_min, g.q_max));
        report.max_generation_violation = report.max_generation_violation.max(e);
    }
    for &b in &network.flow_limited {
        let br = &network.branches[b];
        if let Some(limit) = br.s_max {
            let (sf, st) = branch_flows(br, v)?;
            report.max_flow_violation = report.max_flow_violation.max(sf.norm() - limit).max(st.norm() - limit);
        }
    }
    Ok(report)
}

//! Power network model: parsing, preprocessing and the complex data matrices
//! (admittance, bus injection and branch flow matrices) of the relaxation.
//!
//! All quantities are per unit on the system base. Buses are stored in a
//! contiguous internal order; the external (file) ids are kept on each bus
//! for reporting.

mod admittance;
mod json;
mod matpower;
mod preprocess;
mod sparse;
pub mod synthetic;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use admittance::{branch_flow_matrices, branch_flows, build_admittance, bus_injection_matrices, BranchFlowMatrices};
pub use json::{parse_network_json, serialize_network_json, NETWORK_SCHEMA_VERSION};
pub use matpower::parse_matpower_case;
pub use preprocess::{apply_min_resistance, fix_tight_generators, DEFAULT_FIXING_TOLERANCE, DEFAULT_MIN_RESISTANCE};
pub use sparse::ComplexSparseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// External id as found in the input file.
    pub id: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub p_demand: f64,
    pub q_demand: f64,
    pub shunt_g: f64,
    pub shunt_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// Real power pinned to the midpoint of its bounds.
    Fixed,
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: usize,
    /// Internal bus index.
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Quadratic cost coefficient (cost per unit squared).
    pub alpha: f64,
    /// Linear cost coefficient (cost per unit).
    pub beta: f64,
    /// Constant cost term; reported as an objective offset only.
    pub cost_constant: f64,
    pub kind: GeneratorKind,
}

impl Generator {
    pub fn classify_cost(alpha: f64) -> GeneratorKind {
        if alpha > 0.0 {
            GeneratorKind::Quadratic
        } else {
            GeneratorKind::Linear
        }
    }

    /// Cost of producing `p` (per unit), including the constant term.
    pub fn cost(&self, p: f64) -> f64 {
        self.alpha * p * p + self.beta * p + self.cost_constant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: usize,
    /// Internal bus index of the from end.
    pub from: usize,
    /// Internal bus index of the to end.
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub b_charging: f64,
    pub tap_ratio: f64,
    /// Phase shift in radians.
    pub phase_shift: f64,
    /// Apparent power limit; `None` means unlimited.
    pub s_max: Option<f64>,
}

/// How the set of flow-limited branches is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowSelection {
    /// Every branch with a finite limit.
    All,
    None,
    /// Explicit external branch ids.
    Ids(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub branches: Vec<Branch>,
    /// Indices into `branches` of the flow-limited set.
    pub flow_limited: Vec<usize>,
    /// Internal index of the angle reference bus.
    pub reference_bus: usize,
}

impl Network {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, external_id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == external_id)
    }

    pub fn bus_id_map(&self) -> HashMap<usize, usize> {
        self.buses.iter().enumerate().map(|(k, b)| (b.id, k)).collect()
    }

    pub fn generators_at(&self, bus: usize) -> impl Iterator<Item = (usize, &Generator)> {
        self.generators
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.bus == bus)
    }

    pub fn count_kind(&self, kind: GeneratorKind) -> usize {
        self.generators.iter().filter(|g| g.kind == kind).count()
    }

    /// Sum of constant cost terms plus the cost of fixed generators.
    pub fn fixed_cost(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| match g.kind {
                GeneratorKind::Fixed => g.cost(0.5 * (g.p_min + g.p_max)),
                _ => g.cost_constant,
            })
            .sum()
    }

    /// Distinct undirected bus pairs joined by at least one branch.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .branches
            .iter()
            .map(|b| (b.from.min(b.to), b.from.max(b.to)))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Replace the flow-limited set.
    pub fn select_flow_limits(&mut self, selection: &FlowSelection) -> Result<()> {
        self.flow_limited = match selection {
            FlowSelection::All => (0..self.branches.len())
                .filter(|&i| self.branches[i].s_max.is_some())
                .collect(),
            FlowSelection::None => Vec::new(),
            FlowSelection::Ids(ids) => {
                let mut out = Vec::with_capacity(ids.len());
                for &id in ids {
                    let idx = self
                        .branches
                        .iter()
                        .position(|b| b.id == id)
                        .ok_or_else(|| Error::Validation(format!("flow list names unknown branch {id}")))?;
                    if self.branches[idx].s_max.is_none() {
                        return Err(Error::MissingLimit { branch: id });
                    }
                    out.push(idx);
                }
                out.sort_unstable();
                out.dedup();
                out
            }
        };
        Ok(())
    }

    /// Check the structural invariants: positive voltage bounds, valid branch
    /// endpoints and taps, generator bounds, and a connected network graph.
    pub fn validate(&self) -> Result<()> {
        let n = self.buses.len();
        if n == 0 {
            return Err(Error::Validation("network has no buses".into()));
        }
        if self.reference_bus >= n {
            return Err(Error::Validation("reference bus out of range".into()));
        }
        for b in &self.buses {
            if !(b.v_min > 0.0) || b.v_min > b.v_max {
                return Err(Error::Validation(format!(
                    "bus {} has invalid voltage bounds [{}, {}]",
                    b.id, b.v_min, b.v_max
                )));
            }
            if !b.p_demand.is_finite() || !b.q_demand.is_finite() {
                return Err(Error::Validation(format!("bus {} has non-finite demand", b.id)));
            }
        }
        for br in &self.branches {
            if br.from >= n || br.to >= n {
                return Err(Error::Validation(format!("branch {} references unknown bus", br.id)));
            }
            if br.from == br.to {
                return Err(Error::Validation(format!("branch {} is a self loop", br.id)));
            }
            if br.r < 0.0 {
                return Err(Error::Validation(format!("branch {} has negative resistance", br.id)));
            }
            if !(br.tap_ratio > 0.0) {
                return Err(Error::Validation(format!("branch {} has nonpositive tap ratio", br.id)));
            }
        }
        for g in &self.generators {
            if g.bus >= n {
                return Err(Error::Validation(format!("generator {} references unknown bus", g.id)));
            }
            if g.p_min > g.p_max || g.q_min > g.q_max {
                return Err(Error::Validation(format!("generator {} has crossed bounds", g.id)));
            }
            if g.alpha < 0.0 {
                return Err(Error::Validation(format!("generator {} has a concave cost", g.id)));
            }
        }
        for &f in &self.flow_limited {
            match self.branches.get(f) {
                Some(br) if br.s_max.is_some() => {}
                Some(br) => return Err(Error::MissingLimit { branch: br.id }),
                None => return Err(Error::Validation(format!("flow-limited index {f} out of range"))),
            }
        }
        if !self.is_connected() {
            return Err(Error::Validation("network graph is disconnected".into()));
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            adj[br.from].push(br.to);
            adj[br.to].push(br.from);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }
}

/// Parse a flow-set list: one external branch id per line, `#` starts a
/// comment.
pub fn parse_flow_list(text: &str) -> Result<Vec<usize>> {
    let mut ids = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let id = line
            .parse::<usize>()
            .map_err(|e| Error::parse(format!("flow list line {}", lineno + 1), e.to_string()))?;
        ids.push(id);
    }
    Ok(ids)
}

//! Native JSON network format. Buses, generators and branches are referenced
//! by their external ids; see `docs/network-json.md`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Branch, Bus, Generator, GeneratorKind, Network};
use crate::error::{Error, Result};

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    schema_version: u32,
    base_mva: f64,
    /// External id of the reference bus; defaults to the first bus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_bus: Option<usize>,
    buses: Vec<BusDoc>,
    generators: Vec<GeneratorDoc>,
    branches: Vec<BranchDoc>,
    /// External branch ids; defaults to every branch with a limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flow_limited: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusDoc {
    id: usize,
    v_min: f64,
    v_max: f64,
    #[serde(default)]
    p_demand: f64,
    #[serde(default)]
    q_demand: f64,
    #[serde(default)]
    shunt_g: f64,
    #[serde(default)]
    shunt_b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    id: usize,
    bus: usize,
    p_min: f64,
    p_max: f64,
    q_min: f64,
    q_max: f64,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    beta: f64,
    #[serde(default)]
    cost_constant: f64,
    /// Derived from `alpha` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<GeneratorKind>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchDoc {
    id: usize,
    from: usize,
    to: usize,
    r: f64,
    x: f64,
    #[serde(default)]
    b_charging: f64,
    #[serde(default = "one")]
    tap_ratio: f64,
    /// Radians.
    #[serde(default)]
    phase_shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_max: Option<f64>,
}

/// Parse and validate a network document. Errors carry the JSON path of the
/// offending field.
pub fn parse_network_json(text: &str) -> Result<Network> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: NetworkDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // Missing keys are reported by serde against the enclosing object.
        let context = match inner.split('`').nth(1) {
            Some(key) if inner.starts_with("missing field") => {
                if path == "." {
                    key.to_string()
                } else {
                    format!("{path}.{key}")
                }
            }
            _ => path,
        };
        Error::parse(context, inner)
    })?;
    if doc.schema_version != NETWORK_SCHEMA_VERSION {
        return Err(Error::parse(
            "schema_version",
            format!("unsupported version {}", doc.schema_version),
        ));
    }

    let mut index = HashMap::new();
    for (k, b) in doc.buses.iter().enumerate() {
        if index.insert(b.id, k).is_some() {
            return Err(Error::parse(format!("buses[{k}].id"), format!("duplicate bus id {}", b.id)));
        }
    }
    let lookup = |id: usize, ctx: String| index.get(&id).copied().ok_or_else(|| Error::parse(ctx, format!("unknown bus {id}")));

    let buses = doc
        .buses
        .iter()
        .map(|b| Bus {
            id: b.id,
            v_min: b.v_min,
            v_max: b.v_max,
            p_demand: b.p_demand,
            q_demand: b.q_demand,
            shunt_g: b.shunt_g,
            shunt_b: b.shunt_b,
        })
        .collect();
    let mut generators = Vec::with_capacity(doc.generators.len());
    for (k, g) in doc.generators.iter().enumerate() {
        generators.push(Generator {
            id: g.id,
            bus: lookup(g.bus, format!("generators[{k}].bus"))?,
            p_min: g.p_min,
            p_max: g.p_max,
            q_min: g.q_min,
            q_max: g.q_max,
            alpha: g.alpha,
            beta: g.beta,
            cost_constant: g.cost_constant,
            kind: g.kind.unwrap_or_else(|| Generator::classify_cost(g.alpha)),
        });
    }
    let mut branches = Vec::with_capacity(doc.branches.len());
    for (k, b) in doc.branches.iter().enumerate() {
        branches.push(Branch {
            id: b.id,
            from: lookup(b.from, format!("branches[{k}].from"))?,
            to: lookup(b.to, format!("branches[{k}].to"))?,
            r: b.r,
            x: b.x,
            b_charging: b.b_charging,
            tap_ratio: b.tap_ratio,
            phase_shift: b.phase_shift,
            s_max: b.s_max,
        });
    }
    let flow_limited = match &doc.flow_limited {
        None => (0..branches.len()).filter(|&i| branches[i].s_max.is_some()).collect(),
        Some(ids) => {
            let mut out = Vec::with_capacity(ids.len());
            for (k, id) in ids.iter().enumerate() {
                let pos = branches
                    .iter()
                    .position(|b| b.id == *id)
                    .ok_or_else(|| Error::parse(format!("flow_limited[{k}]"), format!("unknown branch {id}")))?;
                out.push(pos);
            }
            out.sort_unstable();
            out.dedup();
            out
        }
    };
    let reference_bus = match doc.reference_bus {
        Some(id) => lookup(id, "reference_bus".into())?,
        None => 0,
    };
    let net = Network {
        base_mva: doc.base_mva,
        buses,
        generators,
        branches,
        flow_limited,
        reference_bus,
    };
    net.validate()?;
    Ok(net)
}

/// Serialize to the native format with every optional field written out.
pub fn serialize_network_json(network: &Network) -> Result<String> {
    let doc = NetworkDoc {
        schema_version: NETWORK_SCHEMA_VERSION,
        base_mva: network.base_mva,
        reference_bus: network.buses.get(network.reference_bus).map(|b| b.id),
        buses: network
            .buses
            .iter()
            .map(|b| BusDoc {
                id: b.id,
                v_min: b.v_min,
                v_max: b.v_max,
                p_demand: b.p_demand,
                q_demand: b.q_demand,
                shunt_g: b.shunt_g,
                shunt_b: b.shunt_b,
            })
            .collect(),
        generators: network
            .generators
            .iter()
            .map(|g| GeneratorDoc {
                id: g.id,
                bus: network.buses[g.bus].id,
                p_min: g.p_min,
                p_max: g.p_max,
                q_min: g.q_min,
                q_max: g.q_max,
                alpha: g.alpha,
                beta: g.beta,
                cost_constant: g.cost_constant,
                kind: Some(g.kind),
            })
            .collect(),
        branches: network
            .branches
            .iter()
            .map(|b| BranchDoc {
                id: b.id,
                from: network.buses[b.from].id,
                to: network.buses[b.to].id,
                r: b.r,
                x: b.x,
                b_charging: b.b_charging,
                tap_ratio: b.tap_ratio,
                phase_shift: b.phase_shift,
                s_max: b.s_max,
            })
            .collect(),
        flow_limited: Some(network.flow_limited.iter().map(|&i| network.branches[i].id).collect()),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

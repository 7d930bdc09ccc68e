//! Seeded random networks with a known feasible operating point, used by
//! tests and benchmarks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_admittance, branch_flows, Branch, Bus, Generator, Network};

#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub network: Network,
    /// A voltage profile satisfying every constraint of the network.
    pub voltage: Vec<Complex64>,
}

/// Build a connected network on `n` buses: a random spanning tree plus
/// `extra_edges` random chords. Demands are chosen so that a random voltage
/// profile is feasible with generator bounds bracketing the required output;
/// every generator has `p_min ≥ 0`, so optimal costs are positive.
pub fn synthetic_network(n: usize, extra_edges: usize, seed: u64) -> SyntheticCase {
    assert!(n >= 2, "need at least two buses");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((rng.random_range(0..i), i));
    }
    for _ in 0..extra_edges {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    let branches: Vec<Branch> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(from, to))| Branch {
            id: k + 1,
            from,
            to,
            r: rng.random_range(0.005..0.05),
            x: rng.random_range(0.02..0.2),
            b_charging: rng.random_range(0.0..0.1),
            tap_ratio: if rng.random_bool(0.1) { rng.random_range(0.95..1.05) } else { 1.0 },
            phase_shift: 0.0,
            s_max: None,
        })
        .collect();
    let voltage: Vec<Complex64> = (0..n)
        .map(|k| {
            let mag = rng.random_range(0.95..1.05);
            let ang = if k == 0 { 0.0 } else { rng.random_range(-0.15..0.15) };
            Complex64::from_polar(mag, ang)
        })
        .collect();
    let mut network = Network {
        base_mva: 100.0,
        buses: (0..n)
            .map(|k| Bus {
                id: k + 1,
                v_min: 0.9,
                v_max: 1.1,
                p_demand: 0.0,
                q_demand: 0.0,
                shunt_g: 0.0,
                shunt_b: 0.0,
            })
            .collect(),
        generators: Vec::new(),
        branches,
        flow_limited: Vec::new(),
        reference_bus: 0,
    };
    let y = build_admittance(&network).expect("synthetic branches have nonzero impedance");
    let current = y.mul_vec(&voltage);
    for k in 0..n {
        let s = voltage[k] * current[k].conj();
        let has_gen = k == 0 || rng.random_bool(0.3);
        if has_gen {
            // Local load keeps the unit's output at least 0.5 so `p_min ≥ 0`.
            let p_load = (0.5 - s.re).max(0.0) + rng.random_range(0.0..0.3);
            let load = Complex64::new(p_load, rng.random_range(0.0..0.1));
            network.buses[k].p_demand = load.re;
            network.buses[k].q_demand = load.im;
            let out = s + load;
            let alpha = if rng.random_bool(0.7) { rng.random_range(0.5..2.0) } else { 0.0 };
            network.generators.push(Generator {
                id: network.generators.len() + 1,
                bus: k,
                p_min: out.re - rng.random_range(0.1..0.5),
                p_max: out.re + rng.random_range(0.1..0.5),
                q_min: out.im - rng.random_range(0.1..0.5),
                q_max: out.im + rng.random_range(0.1..0.5),
                alpha,
                beta: rng.random_range(1.0..10.0),
                cost_constant: 0.0,
                kind: Generator::classify_cost(alpha),
            });
        } else {
            network.buses[k].p_demand = -s.re;
            network.buses[k].q_demand = -s.im;
        }
    }
    for br in network.branches.iter_mut() {
        if rng.random_bool(0.5) {
            let (sf, st) = branch_flows(br, &voltage).expect("nonzero impedance");
            br.s_max = Some(1.3 * sf.norm().max(st.norm()));
        }
    }
    network.flow_limited = (0..network.branches.len())
        .filter(|&i| network.branches[i].s_max.is_some())
        .collect();
    SyntheticCase { network, voltage }
}

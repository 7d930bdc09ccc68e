use super::{GeneratorKind, Network};

pub const DEFAULT_FIXING_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MIN_RESISTANCE: f64 = 1e-4;

/// Pin every generator whose real power range is narrower than `tol` to the
/// midpoint of its bounds.
pub fn fix_tight_generators(network: &Network, tol: f64) -> Network {
    let mut out = network.clone();
    for g in &mut out.generators {
        if g.kind == GeneratorKind::Fixed || g.p_max - g.p_min < tol {
            let mid = 0.5 * (g.p_min + g.p_max);
            g.p_min = mid;
            g.p_max = mid;
            g.kind = GeneratorKind::Fixed;
        }
    }
    out
}

/// Raise every branch resistance to at least `r_min`.
pub fn apply_min_resistance(network: &Network, r_min: f64) -> Network {
    assert!(r_min >= 0.0, "minimum resistance must be nonnegative");
    let mut out = network.clone();
    for br in &mut out.branches {
        br.r = br.r.max(r_min);
    }
    out
}

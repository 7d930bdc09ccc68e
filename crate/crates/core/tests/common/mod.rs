#![allow(dead_code)]

pub mod cbf;

use csdr_core::netmodel::{
    apply_min_resistance, fix_tight_generators, parse_matpower_case, Network, DEFAULT_FIXING_TOLERANCE,
    DEFAULT_MIN_RESISTANCE,
};

pub fn data_case(name: &str) -> Network {
    let path = format!("{}/../../data/{name}.m", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_matpower_case(&text).unwrap()
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// A data case after the standard preprocessing (fixed generators and the
/// minimum branch resistance).
pub fn preprocessed_case(name: &str) -> Network {
    let net = fix_tight_generators(&data_case(name), DEFAULT_FIXING_TOLERANCE);
    apply_min_resistance(&net, DEFAULT_MIN_RESISTANCE)
}

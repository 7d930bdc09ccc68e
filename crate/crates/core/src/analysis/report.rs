use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of a strategy comparison: constraint ratio, smallest eigenvalue
/// ratio and normalized objective, mirroring the published tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case: String,
    pub strategy: String,
    /// Rows of the unconverted relaxation.
    pub constraints: usize,
    /// Consistency rows added by the conversion.
    pub consistency: usize,
    /// `(r + s) / r`.
    pub constraint_ratio: f64,
    pub blocks: usize,
    pub max_block_order: usize,
    pub status: String,
    pub iterations: usize,
    pub objective: Option<f64>,
    pub normalized_objective: Option<f64>,
    pub min_eigenvalue_ratio: Option<f64>,
    pub solve_seconds: f64,
}

/// CSV with a header row; missing values are empty fields.
pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_bench_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let row = BenchRow {
            case: "case9".into(),
            strategy: "band1".into(),
            constraints: 105,
            consistency: 15,
            constraint_ratio: 120.0 / 105.0,
            blocks: 7,
            max_block_order: 3,
            status: "optimal".into(),
            iterations: 23,
            objective: Some(5296.68),
            normalized_objective: Some(1.0),
            min_eigenvalue_ratio: None,
            solve_seconds: 0.01,
        };
        let text = bench_csv(std::slice::from_ref(&row)).unwrap();
        assert!(text.starts_with("case,strategy,constraints,consistency,constraint_ratio,"));
        assert_eq!(read_bench_csv(&text).unwrap(), vec![row]);
    }
}

//! Rank diagnostics, voltage recovery, feasibility checks and comparison
//! reports.

mod feasibility;
mod rank;
mod recovery;
mod report;

pub use feasibility::{bus_injections, check_feasibility, infer_dispatch, FeasibilityReport};
pub use rank::{block_rank, eigenvalue_ratio, rank_report, top_eigenvalues, BlockRank, RankReport, DEFAULT_RANK_THRESHOLD};
pub use recovery::{
    recover_unconverted, recover_voltage, slack_dispatch, stitch_fragments, stitch_voltages, RecoveredSolution,
    RecoveryOptions,
};
pub use report::{bench_csv, read_bench_csv, BenchRow};

use crate::error::{Error, Result};

/// `csdr_value / sdr_value`, the objective of a weakened relaxation relative
/// to the full one.
pub fn normalized_objective(csdr_value: f64, sdr_value: f64) -> Result<f64> {
    if !(sdr_value > 0.0) {
        return Err(Error::NonpositiveBase(sdr_value));
    }
    Ok(csdr_value / sdr_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalized_objective(5.0, 5.0).unwrap(), 1.0);
        assert!(matches!(normalized_objective(1.0, 0.0), Err(Error::NonpositiveBase(_))));
        assert!(matches!(normalized_objective(1.0, -2.0), Err(Error::NonpositiveBase(_))));
    }
}

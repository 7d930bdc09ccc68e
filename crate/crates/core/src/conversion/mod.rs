//! Clique-tree conversion of the relaxation into coupled per-clique blocks,
//! consistency strategies and the real embedding used by the solver.

mod convert;
mod embedding;
mod strategy;

pub use convert::{
    aggregate_pattern, assign_entries, convert, count_report, ConvertedProblem, CountReport, EntryAssignment, RowTag,
};
pub use embedding::{real_embedding, RealEmbedding};
pub use strategy::{
    consistency_constraints, consistency_count, naive_real_count, ConsistencyConstraint, ConsistencyStrategy, Part,
};

//! Sparsity patterns, chordal embeddings, cliques and clique trees.

mod embedding;
mod pattern;
mod tree;

pub use embedding::{
    chordal_embedding, is_perfect_elimination, maximum_cardinality_search, verify_chordal, Ordering,
};
pub use pattern::{pattern_union, SparsityPattern};
pub use tree::{
    amalgamate, build_clique_tree, find_cliques, verify_running_intersection, CliqueTree, DEFAULT_T_FILL,
    DEFAULT_T_SIZE,
};

use crate::error::Result;

/// Embed, find cliques and build the clique tree in one step.
pub fn clique_tree_of(pattern: &SparsityPattern, ordering: &Ordering) -> Result<(SparsityPattern, CliqueTree)> {
    let (filled, order) = chordal_embedding(pattern, ordering)?;
    let cliques = find_cliques(&filled, &order)?;
    Ok((filled, build_clique_tree(&cliques)))
}

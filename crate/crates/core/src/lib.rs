//! Semidefinite relaxations of AC optimal power flow with chordal conversion.
//!
//! The pipeline is split into independent stages:
//!
//! 1. [`netmodel`] parses MATPOWER or native JSON networks, applies the
//!    preprocessing rules and assembles the admittance and flow matrices.
//! 2. [`formulation`] builds the complex cone LP of the relaxation, with
//!    second-order cone epigraphs for quadratic costs and flow limits.
//! 3. [`chordal`] computes a chordal embedding of the aggregate sparsity
//!    pattern, its cliques, a clique tree and optional clique amalgamation.
//! 4. [`conversion`] replaces the Hermitian matrix variable by one block per
//!    clique, keeping all or a subset of the consistency equalities, and
//!    realizes Hermitian blocks as real symmetric blocks.
//! 5. [`solver`] is a primal-dual interior-point method for products of
//!    nonnegative, second-order and positive semidefinite cones.
//! 6. [`analysis`] computes eigenvalue ratios, recovers voltages from rank-one
//!    blocks and checks them against the original power flow constraints.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod chordal;
pub mod conversion;
pub mod error;
pub mod formulation;
pub mod netmodel;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::netmodel::ComplexSparseMatrix;

/// Symmetric off-diagonal sparsity pattern; the diagonal is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    adj: Vec<Vec<usize>>,
}

impl SparsityPattern {
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    /// Build from undirected edges; self loops are ignored and duplicates
    /// merged.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, j) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) outside order {n}");
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Self { adj }
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (i, a) in self.adj.iter().enumerate() {
            out.extend(a.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn is_subset_of(&self, other: &SparsityPattern) -> bool {
        self.order() == other.order() && self.edges().iter().all(|&(i, j)| other.has_edge(i, j))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.order();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// DOT graph for debugging.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph pattern {\n");
        for v in 0..self.order() {
            s.push_str(&format!("  {v};\n"));
        }
        for (i, j) in self.edges() {
            s.push_str(&format!("  {i} -- {j};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Aggregate off-diagonal pattern of a set of matrices of equal order.
pub fn pattern_union<'a>(matrices: impl IntoIterator<Item = &'a ComplexSparseMatrix>) -> Result<SparsityPattern> {
    let mut order = None;
    let mut edges = Vec::new();
    for m in matrices {
        match order {
            None => order = Some(m.order()),
            Some(n) if n != m.order() => {
                return Err(Error::OrderMismatch {
                    expected: n,
                    found: m.order(),
                })
            }
            _ => {}
        }
        edges.extend(m.entries().iter().filter(|e| e.0 != e.1).map(|e| (e.0, e.1)));
    }
    Ok(SparsityPattern::from_edges(order.unwrap_or(0), edges))
}

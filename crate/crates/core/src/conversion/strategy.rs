use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chordal::CliqueTree;
use crate::error::{Error, Result};

/// Which separator entries are forced to agree between a clique and its
/// parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "rho")]
pub enum ConsistencyStrategy {
    /// Every separator entry.
    Full,
    /// Entries within half-bandwidth `ρ` of the diagonal, on separator-local
    /// indices sorted by bus index.
    Band(usize),
    /// The diagonal plus the first `ρ` rows.
    Arrow(usize),
    /// The diagonal plus separator pairs joined by a network branch.
    Sparse,
    /// The diagonal only.
    Diagonal,
}

impl ConsistencyStrategy {
    /// Whether matching entries couple phases across cliques.
    pub fn couples_phases(&self) -> bool {
        match self {
            ConsistencyStrategy::Full | ConsistencyStrategy::Sparse => true,
            ConsistencyStrategy::Band(r) | ConsistencyStrategy::Arrow(r) => *r >= 1,
            ConsistencyStrategy::Diagonal => false,
        }
    }
}

impl fmt::Display for ConsistencyStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyStrategy::Full => write!(f, "full"),
            ConsistencyStrategy::Band(r) => write!(f, "band{r}"),
            ConsistencyStrategy::Arrow(r) => write!(f, "arrow{r}"),
            ConsistencyStrategy::Sparse => write!(f, "sparse"),
            ConsistencyStrategy::Diagonal => write!(f, "diagonal"),
        }
    }
}

impl FromStr for ConsistencyStrategy {
    type Err = Error;

    /// Accepts `full`, `sparse`, `diagonal`, `bandN` and `arrowN`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let rho = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::Strategy(format!("invalid bandwidth in '{s}'")))
        };
        match s.as_str() {
            "full" => Ok(Self::Full),
            "sparse" => Ok(Self::Sparse),
            "diagonal" => Ok(Self::Diagonal),
            _ => {
                if let Some(rest) = s.strip_prefix("band") {
                    Ok(Self::Band(rho(rest)?))
                } else if let Some(rest) = s.strip_prefix("arrow") {
                    Ok(Self::Arrow(rho(rest)?))
                } else {
                    Err(Error::Strategy(format!("unknown strategy '{s}'")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Real,
    Imag,
}

/// `W_child[a, b] = W_parent[a, b]` for one part of one separator entry;
/// `a ≤ b` are global indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConsistencyConstraint {
    pub child: usize,
    pub parent: usize,
    pub a: usize,
    pub b: usize,
    pub part: Part,
}

/// Local index pairs `(p, q)`, `p ≤ q`, of a separator of size `e` kept by a
/// strategy. For `Sparse`, `edge` reports whether two local indices are
/// joined by a network branch.
fn kept_pairs(strategy: ConsistencyStrategy, e: usize, edge: &dyn Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let cap = |r: usize| r.min(e.saturating_sub(1));
    for p in 0..e {
        for q in p..e {
            let keep = p == q
                || match strategy {
                    ConsistencyStrategy::Full => true,
                    ConsistencyStrategy::Band(r) => q - p <= cap(r),
                    ConsistencyStrategy::Arrow(r) => p < cap(r),
                    ConsistencyStrategy::Sparse => edge(p, q),
                    ConsistencyStrategy::Diagonal => false,
                };
            if keep {
                out.push((p, q));
            }
        }
    }
    out
}

fn edge_set(strategy: ConsistencyStrategy, edges: Option<&[(usize, usize)]>) -> Result<HashSet<(usize, usize)>> {
    match (strategy, edges) {
        (ConsistencyStrategy::Sparse, None) => Err(Error::Strategy("sparse strategy requires the network edge list".into())),
        (_, Some(e)) => Ok(e.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect()),
        (_, None) => Ok(HashSet::new()),
    }
}

/// Enumerate the consistency equalities of a clique tree, child by child in
/// tree order, separator pairs in lexicographic local order, real part before
/// imaginary part.
pub fn consistency_constraints(
    tree: &CliqueTree,
    strategy: ConsistencyStrategy,
    edges: Option<&[(usize, usize)]>,
) -> Result<Vec<ConsistencyConstraint>> {
    let edges = edge_set(strategy, edges)?;
    let mut out = Vec::new();
    for j in 0..tree.len() {
        let Some(k) = tree.parent[j] else { continue };
        let eta = tree.separator(j);
        let is_edge = |p: usize, q: usize| edges.contains(&(eta[p], eta[q]));
        for (p, q) in kept_pairs(strategy, eta.len(), &is_edge) {
            let (a, b) = (eta[p], eta[q]);
            out.push(ConsistencyConstraint { child: j, parent: k, a, b, part: Part::Real });
            if a != b {
                out.push(ConsistencyConstraint { child: j, parent: k, a, b, part: Part::Imag });
            }
        }
    }
    Ok(out)
}

/// Closed-form constraint count:
/// Full `Σ|η_j|²`, Band `Σ(|η_j| + 2Σ_{l=1}^{ρ_j}(|η_j| − l))`,
/// Arrow `Σ(|η_j| + 2Σ_{l=1}^{ρ_j}(|η_j| − l))` (same arithmetic on rows),
/// Sparse `Σ(|η_j| + 2|L_j|)`, Diagonal `Σ|η_j|`, with `ρ_j = min(ρ, |η_j| − 1)`.
pub fn consistency_count(tree: &CliqueTree, strategy: ConsistencyStrategy, edges: Option<&[(usize, usize)]>) -> Result<usize> {
    let edges = edge_set(strategy, edges)?;
    let mut s = 0;
    for j in 0..tree.len() {
        if tree.parent[j].is_none() {
            continue;
        }
        let eta = tree.separator(j);
        let e = eta.len();
        let rho_j = |r: usize| r.min(e.saturating_sub(1));
        s += match strategy {
            ConsistencyStrategy::Full => e * e,
            ConsistencyStrategy::Band(r) | ConsistencyStrategy::Arrow(r) => {
                e + 2 * (1..=rho_j(r)).map(|l| e - l).sum::<usize>()
            }
            ConsistencyStrategy::Sparse => {
                let mut l = 0;
                for p in 0..e {
                    for q in p + 1..e {
                        if edges.contains(&(eta[p], eta[q])) {
                            l += 1;
                        }
                    }
                }
                e + 2 * l
            }
            ConsistencyStrategy::Diagonal => e,
        };
    }
    Ok(s)
}

/// Count of the naive real-side coupling, `Σ |η_j|(2|η_j| + 1)`, that
/// converting the real embedding directly would produce.
pub fn naive_real_count(tree: &CliqueTree) -> usize {
    (0..tree.len())
        .filter(|&j| tree.parent[j].is_some())
        .map(|j| {
            let e = tree.separator(j).len();
            e * (2 * e + 1)
        })
        .sum()
}

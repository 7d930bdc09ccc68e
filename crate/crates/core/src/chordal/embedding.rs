use super::SparsityPattern;
use crate::error::{Error, Result};

/// Elimination ordering used to build a chordal embedding.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Ordering {
    /// Approximate minimum degree.
    #[default]
    Amd,
    /// `perm[k]` is the vertex eliminated at step `k`.
    Given(Vec<usize>),
}

fn amd_order(pattern: &SparsityPattern) -> Vec<usize> {
    let n = pattern.order();
    let mut ap = Vec::with_capacity(n + 1);
    let mut ai = Vec::new();
    ap.push(0usize);
    for v in 0..n {
        ai.push(v);
        ai.extend_from_slice(pattern.neighbors(v));
        ap.push(ai.len());
    }
    match amd::order(n, &ap, &ai, &amd::Control::default()) {
        Ok((p, _, _)) => p,
        // The input is a valid symmetric pattern, so this is unreachable in
        // practice; fall back to the natural order.
        Err(_) => (0..n).collect(),
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!("permutation of length {} for order {n}", perm.len())));
    }
    for &v in perm {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::DimensionMismatch("ordering is not a permutation".into()));
        }
    }
    Ok(())
}

/// Higher-ordered neighbour sets of the filled graph (in positions) and the
/// elimination tree parent of every position.
pub(crate) fn symbolic_factorization(pattern: &SparsityPattern, perm: &[usize]) -> (Vec<Vec<usize>>, Vec<Option<usize>>) {
    let n = pattern.order();
    let mut pos = vec![0; n];
    for (k, &v) in perm.iter().enumerate() {
        pos[v] = k;
    }
    let mut higher: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut parent = vec![None; n];
    let mut mark = vec![usize::MAX; n];
    for k in 0..n {
        let mut s = Vec::new();
        mark[k] = k;
        for &w in pattern.neighbors(perm[k]) {
            let pw = pos[w];
            if pw > k && mark[pw] != k {
                mark[pw] = k;
                s.push(pw);
            }
        }
        for &c in &children[k] {
            for &u in &higher[c] {
                if u != k && mark[u] != k {
                    mark[u] = k;
                    s.push(u);
                }
            }
        }
        s.sort_unstable();
        if let Some(&p) = s.first() {
            parent[k] = Some(p);
            children[p].push(k);
        }
        higher[k] = s;
    }
    (higher, parent)
}

/// Chordal supergraph from a symbolic Cholesky factorization under the chosen
/// ordering. Returns the filled pattern and the elimination order, which is a
/// perfect elimination ordering of the result.
pub fn chordal_embedding(pattern: &SparsityPattern, ordering: &Ordering) -> Result<(SparsityPattern, Vec<usize>)> {
    let n = pattern.order();
    if !pattern.is_connected() {
        return Err(Error::Disconnected);
    }
    let perm = match ordering {
        Ordering::Amd => amd_order(pattern),
        Ordering::Given(p) => {
            check_permutation(p, n)?;
            p.clone()
        }
    };
    let (higher, _) = symbolic_factorization(pattern, &perm);
    let edges = higher
        .iter()
        .enumerate()
        .flat_map(|(k, h)| h.iter().map(move |&u| (k, u)))
        .map(|(k, u)| (perm[k], perm[u]));
    Ok((SparsityPattern::from_edges(n, edges), perm))
}

/// True if eliminating vertices in `order` creates no fill.
pub fn is_perfect_elimination(pattern: &SparsityPattern, order: &[usize]) -> bool {
    let n = pattern.order();
    if check_permutation(order, n).is_err() {
        return false;
    }
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    for &v in order {
        let later: Vec<usize> = pattern.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        if let Some(&u) = later.iter().min_by_key(|&&w| pos[w]) {
            if later.iter().any(|&w| w != u && !pattern.has_edge(u, w)) {
                return false;
            }
        }
    }
    true
}

/// Maximum cardinality search visit order.
pub fn maximum_cardinality_search(pattern: &SparsityPattern) -> Vec<usize> {
    let n = pattern.order();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unvisited vertex");
        done[v] = true;
        visit.push(v);
        for &w in pattern.neighbors(v) {
            if !done[w] {
                weight[w] += 1;
            }
        }
    }
    visit
}

/// Chordality test: the reverse of a maximum cardinality search order is a
/// perfect elimination ordering exactly when the graph is chordal.
pub fn verify_chordal(pattern: &SparsityPattern) -> bool {
    let mut order = maximum_cardinality_search(pattern);
    order.reverse();
    is_perfect_elimination(pattern, &order)
}

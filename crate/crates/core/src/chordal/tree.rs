use serde::{Deserialize, Serialize};

use super::embedding::{is_perfect_elimination, symbolic_factorization};
use super::SparsityPattern;
use crate::error::{Error, Result};

/// Clique tree stored in postorder: every child precedes its parent and the
/// root is the last clique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueTree {
    pub cliques: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

impl CliqueTree {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn root(&self) -> usize {
        self.cliques.len() - 1
    }

    pub fn children(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.parent[j] == Some(k)).collect()
    }

    /// `η_j = γ_j ∩ γ_parent(j)`, empty for the root.
    pub fn separator(&self, j: usize) -> Vec<usize> {
        match self.parent[j] {
            Some(k) => intersect(&self.cliques[j], &self.cliques[k]),
            None => Vec::new(),
        }
    }

    pub fn separators(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|j| self.separator(j)).collect()
    }

    /// `γ_j \ η_j`.
    pub fn supernode(&self, j: usize) -> Vec<usize> {
        let sep = self.separator(j);
        self.cliques[j].iter().copied().filter(|v| sep.binary_search(v).is_err()).collect()
    }

    /// Indices of the cliques containing `v`.
    pub fn cliques_containing(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.cliques[k].binary_search(&v).is_ok()).collect()
    }

    pub fn order(&self) -> usize {
        self.cliques.iter().flatten().max().map_or(0, |&v| v + 1)
    }

    /// Renumber nodes so children precede parents, visiting children in
    /// increasing index order from the single root.
    fn into_postorder(cliques: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> CliqueTree {
        let m = cliques.len();
        let mut children = vec![Vec::new(); m];
        let mut roots = Vec::new();
        for (j, p) in parent.iter().enumerate() {
            match p {
                Some(k) => children[*k].push(j),
                None => roots.push(j),
            }
        }
        let mut post = Vec::with_capacity(m);
        for &r in &roots {
            let mut stack = vec![(r, 0usize)];
            while let Some((v, i)) = stack.pop() {
                if i < children[v].len() {
                    stack.push((v, i + 1));
                    stack.push((children[v][i], 0));
                } else {
                    post.push(v);
                }
            }
        }
        let mut new_index = vec![0; m];
        for (i, &v) in post.iter().enumerate() {
            new_index[v] = i;
        }
        CliqueTree {
            cliques: post.iter().map(|&v| cliques[v].clone()).collect(),
            parent: post.iter().map(|&v| parent[v].map(|p| new_index[p])).collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph clique_tree {\n");
        for (k, c) in self.cliques.iter().enumerate() {
            let members: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
            s.push_str(&format!("  c{k} [label=\"{k}: {{{}}}\"];\n", members.join(",")));
        }
        for (j, p) in self.parent.iter().enumerate() {
            if let Some(k) = p {
                let sep: Vec<String> = self.separator(j).iter().map(|v| (v + 1).to_string()).collect();
                s.push_str(&format!("  c{j} -> c{k} [label=\"{{{}}}\"];\n", sep.join(",")));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Maximal cliques of a chordal pattern, given a perfect elimination
/// ordering. Cliques are sorted vertex sets listed by their first eliminated
/// vertex, so the last one contains the last vertex of `order`.
pub fn find_cliques(pattern: &SparsityPattern, order: &[usize]) -> Result<Vec<Vec<usize>>> {
    if !is_perfect_elimination(pattern, order) {
        return Err(Error::NotChordal);
    }
    let n = pattern.order();
    let (higher, parent) = symbolic_factorization(pattern, order);
    // C_k = {k} ∪ higher(k) is contained in C_c for a child c exactly when
    // |higher(c)| = |higher(k)| + 1.
    let mut absorbed = vec![false; n];
    for c in 0..n {
        if let Some(k) = parent[c] {
            if higher[c].len() == higher[k].len() + 1 {
                absorbed[k] = true;
            }
        }
    }
    let mut cliques = Vec::new();
    for k in 0..n {
        if !absorbed[k] {
            let mut c: Vec<usize> = std::iter::once(order[k]).chain(higher[k].iter().map(|&u| order[u])).collect();
            c.sort_unstable();
            cliques.push(c);
        }
    }
    Ok(cliques)
}

/// Maximum-weight spanning tree of the clique intersection graph, weights
/// `|γ_i ∩ γ_j|`, ties broken by `(i, j)`. The last input clique is the root;
/// the result is renumbered in postorder.
pub fn build_clique_tree(cliques: &[Vec<usize>]) -> CliqueTree {
    let m = cliques.len();
    let mut sorted: Vec<Vec<usize>> = cliques.to_vec();
    for c in &mut sorted {
        c.sort_unstable();
        c.dedup();
    }
    let n = sorted.iter().flatten().max().map_or(0, |&v| v + 1);
    let mut containing = vec![Vec::new(); n];
    for (k, c) in sorted.iter().enumerate() {
        for &v in c {
            containing[v].push(k);
        }
    }
    let mut weight = std::collections::BTreeMap::new();
    for list in &containing {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                *weight.entry((i, j)).or_insert(0usize) += 1;
            }
        }
    }
    let mut edges: Vec<(usize, usize, usize)> = weight.into_iter().map(|((i, j), w)| (w, i, j)).collect();
    edges.sort_by_key(|&(w, i, j)| (std::cmp::Reverse(w), i, j));
    // Zero-weight edges join any remaining components deterministically.
    edges.extend((1..m).map(|j| (0, 0, j)));

    let mut uf: Vec<usize> = (0..m).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut adj = vec![Vec::new(); m];
    for (_, i, j) in edges {
        let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
        if ri != rj {
            uf[ri] = rj;
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut parent = vec![None; m];
    if m > 0 {
        let root = m - 1;
        let mut seen = vec![false; m];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    stack.push(w);
                }
            }
        }
    }
    CliqueTree::into_postorder(sorted, parent)
}

/// True if for every vertex the cliques containing it induce a connected
/// subtree.
pub fn verify_running_intersection(tree: &CliqueTree) -> bool {
    let n = tree.order();
    let mut count = vec![0usize; n];
    let mut links = vec![0usize; n];
    for (j, c) in tree.cliques.iter().enumerate() {
        for &v in c {
            count[v] += 1;
        }
        if let Some(k) = tree.parent[j] {
            if k >= tree.len() {
                return false;
            }
            for v in intersect(c, &tree.cliques[k]) {
                links[v] += 1;
            }
        }
    }
    let roots = tree.parent.iter().filter(|p| p.is_none()).count();
    roots <= 1 && (0..n).all(|v| count[v] == 0 || links[v] + 1 == count[v])
}

pub const DEFAULT_T_FILL: usize = 16;
pub const DEFAULT_T_SIZE: usize = 16;

/// Greedy clique merging in a single bottom-up pass. Each non-root clique
/// `j` is compared once with its current parent `k` and merged into it if
/// `(|γ_k| − |η_j|)(|γ_j| − |η_j|) ≤ t_fill` or
/// `max(|γ_j| − |η_j|, |γ_k| − |η_k|) ≤ t_size`.
pub fn amalgamate(tree: &CliqueTree, t_fill: usize, t_size: usize) -> CliqueTree {
    let m = tree.len();
    let mut cliques = tree.cliques.clone();
    let mut merged_into: Vec<Option<usize>> = vec![None; m];
    let find = |merged_into: &[Option<usize>], mut x: usize| {
        while let Some(y) = merged_into[x] {
            x = y;
        }
        x
    };
    for j in 0..m {
        let Some(p) = tree.parent[j] else { continue };
        let k = find(&merged_into, p);
        let eta_j = intersect(&cliques[j], &cliques[k]).len();
        let eta_k = match tree.parent[k] {
            Some(pk) => intersect(&cliques[k], &cliques[find(&merged_into, pk)]).len(),
            None => 0,
        };
        let (gj, gk) = (cliques[j].len(), cliques[k].len());
        let fill = (gk - eta_j) * (gj - eta_j);
        let size = (gj - eta_j).max(gk - eta_k);
        if fill <= t_fill || size <= t_size {
            cliques[k] = union(&cliques[k], &cliques[j]);
            merged_into[j] = Some(k);
        }
    }
    let survivors: Vec<usize> = (0..m).filter(|&j| merged_into[j].is_none()).collect();
    let mut index = vec![usize::MAX; m];
    for (i, &j) in survivors.iter().enumerate() {
        index[j] = i;
    }
    let new_cliques = survivors.iter().map(|&j| std::mem::take(&mut cliques[j])).collect();
    let parent = survivors
        .iter()
        .map(|&j| tree.parent[j].map(|p| index[find(&merged_into, p)]))
        .collect();
    CliqueTree::into_postorder(new_cliques, parent)
}

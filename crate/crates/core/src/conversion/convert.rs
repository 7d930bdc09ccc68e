use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::strategy::{consistency_constraints, naive_real_count, ConsistencyConstraint, ConsistencyStrategy, Part};
use crate::chordal::{CliqueTree, SparsityPattern};
use crate::error::{Error, Result};
use crate::formulation::{hermitian_coord, pack_hermitian, ConeLp, ConeSegment, ConeSpec, LinearForm, VariableMap};

/// Owner clique of every matrix entry `(i, j)`, `i ≤ j`, diagonal included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<OwnedEntry>", into = "Vec<OwnedEntry>")]
pub struct EntryAssignment {
    owners: BTreeMap<(usize, usize), usize>,
}

/// Serialized form of one assignment: entry `(i, j)` owned by `clique`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct OwnedEntry {
    i: usize,
    j: usize,
    clique: usize,
}

impl From<Vec<OwnedEntry>> for EntryAssignment {
    fn from(v: Vec<OwnedEntry>) -> Self {
        EntryAssignment {
            owners: v.into_iter().map(|e| ((e.i, e.j), e.clique)).collect(),
        }
    }
}

impl From<EntryAssignment> for Vec<OwnedEntry> {
    fn from(a: EntryAssignment) -> Self {
        a.iter().map(|((i, j), clique)| OwnedEntry { i, j, clique }).collect()
    }
}

impl EntryAssignment {
    pub fn owner(&self, i: usize, j: usize) -> Option<usize> {
        self.owners.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.owners.iter().map(|(&e, &k)| (e, k))
    }
}

/// Give each entry of the pattern (and each diagonal entry) to the clique
/// with the smallest postorder index containing both endpoints.
pub fn assign_entries(pattern: &SparsityPattern, tree: &CliqueTree) -> Result<EntryAssignment> {
    let n = pattern.order();
    let mut first = vec![Vec::new(); n];
    for (k, c) in tree.cliques.iter().enumerate() {
        for &v in c {
            if v < n {
                first[v].push(k);
            }
        }
    }
    let mut owners = BTreeMap::new();
    for v in 0..n {
        let k = *first[v].first().ok_or(Error::UncoveredEntry(v, v))?;
        owners.insert((v, v), k);
    }
    for (i, j) in pattern.edges() {
        let k = first[i]
            .iter()
            .find(|&&k| tree.cliques[k].binary_search(&j).is_ok())
            .ok_or(Error::UncoveredEntry(i, j))?;
        owners.insert((i, j), *k);
    }
    Ok(EntryAssignment { owners })
}

/// Origin of one equality row of a converted problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowTag {
    Original { row: usize },
    Consistency(ConsistencyConstraint),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvertedProblem {
    pub lp: ConeLp,
    pub tags: Vec<RowTag>,
    pub tree: CliqueTree,
    pub strategy: ConsistencyStrategy,
    pub assignment: EntryAssignment,
    /// First coordinate of each clique block in the converted variable.
    pub block_offsets: Vec<usize>,
    /// Coordinate range of the replaced matrix variable in the original.
    pub original_block: std::ops::Range<usize>,
    pub original_rows: usize,
    pub original_vars: usize,
}

impl ConvertedProblem {
    pub fn num_consistency(&self) -> usize {
        self.lp.num_rows() - self.original_rows
    }

    /// Map an original coordinate that is not part of the matrix variable.
    pub fn map_plain(&self, k: usize) -> usize {
        let b = &self.original_block;
        if k < b.start {
            k
        } else {
            assert!(k >= b.end, "coordinate {k} belongs to the matrix block");
            k - b.len() + self.blocks_len()
        }
    }

    fn blocks_len(&self) -> usize {
        self.tree.cliques.iter().map(|c| c.len() * c.len()).sum()
    }

    /// Coordinate of `(Re, Im)` of entry `(i, j)` of clique block `k`.
    pub fn block_coord(&self, k: usize, i: usize, j: usize) -> Option<(usize, Option<usize>)> {
        let c = &self.tree.cliques[k];
        let li = c.binary_search(&i.min(j)).ok()?;
        let lj = c.binary_search(&i.max(j)).ok()?;
        let (re, im) = hermitian_coord(li, lj);
        let off = self.block_offsets[k];
        Some((off + re, im.map(|x| off + x)))
    }

    /// Block `k` of a converted point as a Hermitian matrix.
    pub fn block(&self, z: &[f64], k: usize) -> DMatrix<Complex64> {
        let p = self.tree.cliques[k].len();
        crate::formulation::unpack_hermitian(&z[self.block_offsets[k]..self.block_offsets[k] + p * p], p)
    }

    pub fn blocks(&self, z: &[f64]) -> Vec<DMatrix<Complex64>> {
        (0..self.tree.len()).map(|k| self.block(z, k)).collect()
    }

    /// Converted point induced by an original point: every block is the
    /// principal submatrix of `X` on its clique.
    pub fn lift(&self, z: &[f64], vm: &VariableMap) -> Vec<f64> {
        let mut out = vec![0.0; self.lp.num_vars()];
        for k in 0..self.original_vars {
            if !self.original_block.contains(&k) {
                out[self.map_plain(k)] = z[k];
            }
        }
        let x = vm.x_matrix(z);
        for (k, c) in self.tree.cliques.iter().enumerate() {
            let sub = DMatrix::from_fn(c.len(), c.len(), |a, b| x[(c[a], c[b])]);
            let packed = pack_hermitian(&sub);
            out[self.block_offsets[k]..self.block_offsets[k] + packed.len()].copy_from_slice(&packed);
        }
        out
    }

    /// Partial matrix of the owned entries of a converted point.
    pub fn owned_entries(&self, z: &[f64]) -> BTreeMap<(usize, usize), Complex64> {
        self.assignment
            .iter()
            .map(|((i, j), k)| {
                let (re, im) = self.block_coord(k, i, j).expect("owner contains entry");
                ((i, j), Complex64::new(z[re], im.map_or(0.0, |x| z[x])))
            })
            .collect()
    }

    /// Values of the non-matrix coordinates in the original layout.
    pub fn plain_values(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.original_vars];
        for (k, v) in out.iter_mut().enumerate() {
            if !self.original_block.contains(&k) {
                *v = z[self.map_plain(k)];
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Pattern of the matrix entries referenced by the rows and objective.
pub fn aggregate_pattern(lp: &ConeLp, vm: &VariableMap) -> SparsityPattern {
    let n = vm.order;
    let coords = coord_table(n);
    let mut edges = Vec::new();
    let mut visit = |k: usize| {
        if vm.x_block.contains(&k) {
            let (i, j) = coords[k - vm.x_block.start];
            if i != j {
                edges.push((i, j));
            }
        }
    };
    for row in &lp.rows {
        for &(k, _) in &row.terms {
            visit(k);
        }
    }
    for (k, &h) in lp.objective.iter().enumerate() {
        if h != 0.0 {
            visit(k);
        }
    }
    SparsityPattern::from_edges(n, edges)
}

/// Entry `(i, j)` of each coordinate of a Hermitian block of order `n`.
fn coord_table(n: usize) -> Vec<(usize, usize)> {
    let mut t = vec![(0, 0); n * n];
    for j in 0..n {
        for i in 0..=j {
            let (re, im) = hermitian_coord(i, j);
            t[re] = (i, j);
            if let Some(im) = im {
                t[im] = (i, j);
            }
        }
    }
    t
}

/// Replace the matrix variable by one Hermitian block per clique, route
/// every data entry to its owner clique and append consistency rows.
pub fn convert(
    lp: &ConeLp,
    vm: &VariableMap,
    tree: &CliqueTree,
    strategy: ConsistencyStrategy,
    edges: Option<&[(usize, usize)]>,
) -> Result<ConvertedProblem> {
    let n = vm.order;
    let block = vm.x_block.clone();
    let mut segments = Vec::new();
    let mut found = false;
    for (off, seg) in lp.cone.with_offsets() {
        if off == block.start && seg == ConeSegment::HermitianPsd(n) {
            segments.extend(tree.cliques.iter().map(|c| ConeSegment::HermitianPsd(c.len())));
            found = true;
        } else {
            segments.push(seg);
        }
    }
    if !found {
        return Err(Error::Formulation("matrix variable not found in cone".into()));
    }
    if tree.cliques.iter().flatten().any(|&v| v >= n) {
        return Err(Error::DimensionMismatch("clique tree exceeds matrix order".into()));
    }
    let pattern = aggregate_pattern(lp, vm);
    let assignment = assign_entries(&pattern, tree)?;
    let mut block_offsets = Vec::with_capacity(tree.len());
    let mut at = block.start;
    for c in &tree.cliques {
        block_offsets.push(at);
        at += c.len() * c.len();
    }
    let blocks_len = at - block.start;
    let coords = coord_table(n);
    let mut out = ConvertedProblem {
        lp: ConeLp {
            cone: ConeSpec::new(segments),
            objective: Vec::new(),
            objective_offset: lp.objective_offset,
            rows: Vec::with_capacity(lp.rows.len()),
        },
        tags: Vec::new(),
        tree: tree.clone(),
        strategy,
        assignment,
        block_offsets,
        original_block: block.clone(),
        original_rows: lp.num_rows(),
        original_vars: lp.num_vars(),
    };
    let remap = |k: usize| -> usize {
        if k < block.start {
            k
        } else if k >= block.end {
            k - block.len() + blocks_len
        } else {
            let local = k - block.start;
            let (i, j) = coords[local];
            let owner = out.assignment.owner(i, j).expect("aggregate pattern is assigned");
            let (re, im) = out.block_coord(owner, i, j).expect("owner contains entry");
            if hermitian_coord(i, j).0 == local {
                re
            } else {
                im.expect("imaginary slot")
            }
        }
    };
    let mut objective = vec![0.0; out.lp.cone.dim()];
    for (k, &h) in lp.objective.iter().enumerate() {
        if h != 0.0 {
            objective[remap(k)] += h;
        }
    }
    let mut rows = Vec::with_capacity(lp.rows.len());
    for row in &lp.rows {
        rows.push(LinearForm::new(row.terms.iter().map(|&(k, v)| (remap(k), v)).collect(), row.constant));
    }
    let mut tags: Vec<RowTag> = (0..lp.rows.len()).map(|row| RowTag::Original { row }).collect();
    for c in consistency_constraints(tree, strategy, edges)? {
        let (cre, cim) = out.block_coord(c.child, c.a, c.b).expect("separator in child");
        let (pre, pim) = out.block_coord(c.parent, c.a, c.b).expect("separator in parent");
        let (x, y) = match c.part {
            Part::Real => (cre, pre),
            Part::Imag => (cim.expect("off-diagonal"), pim.expect("off-diagonal")),
        };
        rows.push(LinearForm::new(vec![(x, 1.0), (y, -1.0)], 0.0));
        tags.push(RowTag::Consistency(c));
    }
    out.lp.objective = objective;
    out.lp.rows = rows;
    out.tags = tags;
    out.lp.validate()?;
    Ok(out)
}

/// Constraint and block statistics of a converted problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub r: usize,
    pub s: usize,
    pub ratio: f64,
    pub block_orders: Vec<usize>,
    pub sum_squared_orders: usize,
    /// Coupling count had the real embedding been converted directly.
    pub naive_real_s: usize,
}

impl CountReport {
    pub fn ratio_display(&self) -> String {
        format!("{:.2}", self.ratio)
    }
}

pub fn count_report(converted: &ConvertedProblem) -> CountReport {
    let r = converted.original_rows;
    let s = converted.num_consistency();
    let block_orders: Vec<usize> = converted.tree.cliques.iter().map(Vec::len).collect();
    CountReport {
        r,
        s,
        ratio: (r + s) as f64 / r as f64,
        sum_squared_orders: block_orders.iter().map(|p| p * p).sum(),
        block_orders,
        naive_real_s: naive_real_count(&converted.tree),
    }
}

use num_complex::Complex64;

/// Square complex sparse matrix in canonical form: entries sorted by
/// `(row, col)`, no duplicates and no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSparseMatrix {
    order: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl ComplexSparseMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            entries: Vec::new(),
        }
    }

    /// Build from triplets, summing duplicates and dropping exact zeros.
    pub fn from_triplets(order: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut t: Vec<_> = triplets.into_iter().collect();
        for &(i, j, _) in &t {
            assert!(i < order && j < order, "triplet ({i}, {j}) outside order {order}");
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut entries: Vec<(usize, usize, Complex64)> = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        entries.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        Self { order, entries }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_triplets(order, (0..order).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.entries.binary_search_by_key(&(i, j), |&(r, c, _)| (r, c)) {
            Ok(pos) => self.entries[pos].2,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Entries on or above the diagonal.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().copied().filter(|&(i, j, _)| i <= j)
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_triplets(self.order, self.entries.iter().map(|&(i, j, v)| (j, i, v.conj())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.order, self.entries.iter().map(|&(i, j, v)| (j, i, v)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_triplets(self.order, self.entries.iter().map(|&(i, j, v)| (i, j, v * factor)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        Self::from_triplets(self.order, self.entries.iter().chain(other.entries.iter()).copied())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.order);
        let mut out = vec![Complex64::new(0.0, 0.0); self.order];
        for &(i, j, a) in &self.entries {
            out[i] += a * v[j];
        }
        out
    }

    /// `vᴴ A v`.
    pub fn quad_form(&self, v: &[Complex64]) -> Complex64 {
        self.entries
            .iter()
            .map(|&(i, j, a)| v[i].conj() * a * v[j])
            .sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|&(i, j, a)| (a - self.get(j, i).conj()).norm() <= tol)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|&(i, j, a)| (a - self.get(j, i)).norm() <= tol)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.order, self.order);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    /// Hermitian and skew parts of `B`: returns `((B + Bᴴ)/2, (B − Bᴴ)/(2j))`,
    /// both Hermitian, so that `vᴴBv = vᴴPv + j·vᴴQv`.
    pub fn hermitian_split(&self) -> (Self, Self) {
        let bh = self.conj_transpose();
        let half = Complex64::new(0.5, 0.0);
        let p = self.add(&bh).scale(half);
        let q = self.add(&bh.scale(Complex64::new(-1.0, 0.0))).scale(Complex64::new(0.0, -0.5));
        (p, q)
    }
}

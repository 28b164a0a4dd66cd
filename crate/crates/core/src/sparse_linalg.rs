//! Sparse matrix storage, permutations, pseudoinverse solves and null spaces.
//!
//! Matrices are handed around as compressed-column [`SparseMatrix`] values.
//! Factorizations densify through nalgebra; the problem sizes this crate
//! targets keep that cheap.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Entries with magnitude at or below this are not stored.
pub const DROP_TOL: f64 = 1e-12;
/// Relative singular-value (or pivot) threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate entry at ({0}, {1})")]
    Duplicate(usize, usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Compressed-column sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, col_ptr: vec![0; cols + 1], row_idx: vec![], vals: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t).expect("identity triplets are valid")
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicate positions are
    /// rejected and tiny values are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(LinalgError::OutOfRange { row: r, col: c, rows, cols });
            }
            t.push((r, c, v));
        }
        t.sort_by_key(|e| (e.1, e.0));
        for w in t.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(LinalgError::Duplicate(w[0].0, w[0].1));
            }
        }
        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        for &(r, c, v) in &t {
            if v.abs() > DROP_TOL {
                col_ptr[c + 1] += 1;
                row_idx.push(r);
                vals.push(v);
            }
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(SparseMatrix { rows, cols, col_ptr, row_idx, vals })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v.abs() > DROP_TOL {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t).expect("dense entries are unique")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for c in 0..self.cols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out.push((self.row_idx[k], c, self.vals[k]));
            }
        }
        out
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        for k in self.col_ptr[c]..self.col_ptr[c + 1] {
            if self.row_idx[k] == r {
                return self.vals[k];
            }
        }
        0.0
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for c in 0..self.cols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[k], c)] = self.vals[k];
            }
        }
        m
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], self.vals[k]))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let t: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &t).expect("transpose of valid matrix")
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            if xc != 0.0 {
                for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                    y[self.row_idx[k]] += self.vals[k] * xc;
                }
            }
        }
        y
    }

    /// Computes `selfᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        (0..self.cols).map(|c| self.column(c).map(|(r, v)| v * y[r]).sum()).collect()
    }

    /// Submatrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> SparseMatrix {
        let mut t = Vec::new();
        for (new_c, &c) in idx.iter().enumerate() {
            for (r, v) in self.column(c) {
                t.push((r, new_c, v));
            }
        }
        Self::from_triplets(self.rows, idx.len(), &t).expect("selected columns are valid")
    }

    pub fn dense_columns(&self, idx: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, idx.len());
        for (j, &c) in idx.iter().enumerate() {
            for (r, v) in self.column(c) {
                m[(r, j)] = v;
            }
        }
        m
    }
}

/// A column permutation: `forward[k]` is the original index placed at position `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { forward: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn size(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// Dense 0/1 matrix `P` with `A P` equal to the permuted columns of `A`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut p = DMatrix::zeros(n, n);
        for (k, &j) in self.forward.iter().enumerate() {
            p[(j, k)] = 1.0;
        }
        p
    }

    pub fn apply_columns(&self, a: &SparseMatrix) -> SparseMatrix {
        a.select_columns(&self.forward)
    }
}

/// Permutation putting `nonzero` first (in the given order) and the remaining
/// indices after it in ascending order.
pub fn permutation_from_partition(nonzero: &[usize], n: usize) -> Result<Permutation, LinalgError> {
    let mut seen = vec![false; n];
    for &j in nonzero {
        if j >= n {
            return Err(LinalgError::InvalidPartition(format!("index {j} out of range for n={n}")));
        }
        if seen[j] {
            return Err(LinalgError::InvalidPartition(format!("index {j} listed twice")));
        }
        seen[j] = true;
    }
    let mut forward: Vec<usize> = nonzero.to_vec();
    forward.extend((0..n).filter(|&j| !seen[j]));
    let mut inverse = vec![0; n];
    for (k, &j) in forward.iter().enumerate() {
        inverse[j] = k;
    }
    Ok(Permutation { forward, inverse })
}

/// Orthonormal basis of a null space, stored as the columns of `basis`.
#[derive(Debug, Clone)]
pub struct NullspaceBasis {
    pub basis: DMatrix<f64>,
}

impl NullspaceBasis {
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn len(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.ncols() == 0
    }
}

/// Numerical rank under the relative singular-value threshold.
pub fn dense_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Orthonormal null-space basis of a dense matrix via SVD.
pub fn dense_nullspace(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if r == 0 {
        return DMatrix::identity(c, c);
    }
    // Pad to a square system so the SVD returns a full V.
    let mut sq = DMatrix::zeros(r.max(c), c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = if smax == 0.0 { f64::INFINITY } else { RANK_TOL * smax };
    let null_rows: Vec<usize> = (0..sv.len()).filter(|&i| !(sv[i] > tol)).collect();
    let mut z = DMatrix::zeros(c, null_rows.len());
    for (k, &i) in null_rows.iter().enumerate() {
        for j in 0..c {
            z[(j, k)] = vt[(i, j)];
        }
    }
    z
}

/// Moore–Penrose pseudoinverse via SVD with the rank threshold.
pub fn dense_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = RANK_TOL * smax;
    svd.pseudo_inverse(tol.max(f64::MIN_POSITIVE)).expect("svd computed with u and v")
}

pub fn nullspace_basis(m: &SparseMatrix) -> NullspaceBasis {
    NullspaceBasis { basis: dense_nullspace(&m.to_dense()) }
}

pub fn check_full_column_rank(m: &SparseMatrix) -> bool {
    dense_rank(&m.to_dense()) == m.cols()
}

/// Cholesky factor of a symmetric positive definite Gram matrix, with the
/// pivot-ratio test used to flag rank deficiency.
fn gram_cholesky(g: DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>, LinalgError> {
    let dmax = g.diagonal().iter().cloned().fold(0.0, f64::max);
    let chol = g.cholesky().ok_or(LinalgError::RankDeficient)?;
    let l = chol.l_dirty();
    for i in 0..l.nrows() {
        let piv = l[(i, i)] * l[(i, i)];
        if !(piv > RANK_TOL * dmax) {
            return Err(LinalgError::RankDeficient);
        }
    }
    Ok(chol)
}

/// Least-squares solution `(AᵀA)⁻¹Aᵀb` for a full-column-rank `a`.
pub fn dense_left_pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
    if a.nrows() != b.len() {
        return Err(LinalgError::Dimension(format!("{} rows vs rhs of length {}", a.nrows(), b.len())));
    }
    if a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    if a.nrows() < a.ncols() {
        return Err(LinalgError::RankDeficient);
    }
    let chol = gram_cholesky(a.transpose() * a)?;
    Ok(chol.solve(&(a.transpose() * b)))
}

/// Minimum-norm solution `Aᵀ(AAᵀ)⁻¹b` for a full-row-rank `a`.
pub fn dense_right_pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
    if a.nrows() != b.len() {
        return Err(LinalgError::Dimension(format!("{} rows vs rhs of length {}", a.nrows(), b.len())));
    }
    if a.nrows() == 0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    let chol = gram_cholesky(a * a.transpose())?;
    Ok(a.transpose() * chol.solve(b))
}

/// Dense left pseudoinverse `(AᵀA)⁻¹Aᵀ`.
pub fn dense_left_pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    if a.ncols() == 0 {
        return Ok(DMatrix::zeros(0, a.nrows()));
    }
    if a.nrows() < a.ncols() {
        return Err(LinalgError::RankDeficient);
    }
    let chol = gram_cholesky(a.transpose() * a)?;
    Ok(chol.solve(&a.transpose()))
}

/// Dense right pseudoinverse `Aᵀ(AAᵀ)⁻¹`.
pub fn dense_right_pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    Ok(dense_left_pinv(&a.transpose())?.transpose())
}

pub fn left_pinv_solve(a1: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let x = dense_left_pinv_solve(&a1.to_dense(), &DVector::from_column_slice(b))?;
    Ok(x.iter().cloned().collect())
}

/// `λ = −A₁(A₁ᵀA₁)⁻¹c₁`, the least-norm solution of `c₁ + A₁ᵀλ = 0`.
pub fn min_norm_dual(a1: &SparseMatrix, c1: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if c1.len() != a1.cols() {
        return Err(LinalgError::Dimension(format!("cost of length {} for {} columns", c1.len(), a1.cols())));
    }
    let a = a1.to_dense();
    if a.ncols() == 0 {
        return Ok(vec![0.0; a.nrows()]);
    }
    if a.nrows() < a.ncols() {
        return Err(LinalgError::RankDeficient);
    }
    let chol = gram_cholesky(a.transpose() * &a)?;
    let y = chol.solve(&DVector::from_column_slice(c1));
    Ok((-(&a * y)).iter().cloned().collect())
}

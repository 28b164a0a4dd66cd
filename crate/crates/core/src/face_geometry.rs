//! Polyhedra in parameter space and optimal faces in decision space.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lp_engine::simplex::{solve_inequality, SimplexOptions, SimplexStatus};
use crate::lp_engine::{LpError, StandardFormLP};
use crate::sparse_linalg::{dense_nullspace, dense_pinv, dense_right_pinv_solve, LinalgError};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("face is empty")]
    EmptyFace,
    #[error("G Gᵀ is singular; the face is ill-conditioned")]
    IllConditionedFace,
    #[error("projection exceeded {0} rows")]
    ProjectionOverflow(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl From<LinalgError> for GeomError {
    fn from(e: LinalgError) -> Self {
        GeomError::Lp(LpError::Linalg(e))
    }
}

/// Threshold below which a normalized coefficient counts as zero.
const COEF_EPS: f64 = 1e-11;

/// `{θ : Mθ ≤ t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    pub m: DMatrix<f64>,
    pub t: Vec<f64>,
    pub minimal: bool,
    pub empty: bool,
}

impl HPolyhedron {
    pub fn new(m: DMatrix<f64>, t: Vec<f64>) -> Self {
        assert_eq!(m.nrows(), t.len());
        HPolyhedron { m, t, minimal: false, empty: false }
    }

    pub fn whole(dim: usize) -> Self {
        Self::new(DMatrix::zeros(0, dim), vec![])
    }

    pub fn empty(dim: usize) -> Self {
        HPolyhedron { m: DMatrix::zeros(0, dim), t: vec![], minimal: true, empty: true }
    }

    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let q = lo.len();
        let mut m = DMatrix::zeros(2 * q, q);
        let mut t = vec![0.0; 2 * q];
        for k in 0..q {
            m[(2 * k, k)] = -1.0;
            t[2 * k] = -lo[k];
            m[(2 * k + 1, k)] = 1.0;
            t[2 * k + 1] = hi[k];
        }
        HPolyhedron { m, t, minimal: true, empty: false }
    }

    pub fn dim(&self) -> usize {
        self.m.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.t.len()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.m.row(i).iter().cloned().collect()
    }

    pub fn slack(&self, i: usize, theta: &[f64]) -> f64 {
        self.t[i] - (0..self.dim()).map(|k| self.m[(i, k)] * theta[k]).sum::<f64>()
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        !self.empty && (0..self.n_rows()).all(|i| self.slack(i, theta) >= -tol)
    }

    /// Largest violation of any row (0 inside).
    pub fn violation(&self, theta: &[f64]) -> f64 {
        if self.empty {
            return f64::INFINITY;
        }
        (0..self.n_rows()).map(|i| -self.slack(i, theta)).fold(0.0, f64::max)
    }

    pub fn push_row(&mut self, a: &[f64], t: f64) {
        let r = self.n_rows();
        self.m = self.m.clone().insert_row(r, 0.0);
        for k in 0..a.len() {
            self.m[(r, k)] = a[k];
        }
        self.t.push(t);
        self.minimal = false;
    }

    pub fn intersect(&self, other: &HPolyhedron) -> HPolyhedron {
        let mut out = self.clone();
        for i in 0..other.n_rows() {
            out.push_row(&other.row(i), other.t[i]);
        }
        out.empty = self.empty || other.empty;
        out
    }

    /// Scales rows to unit length and drops all-zero rows that hold trivially.
    /// A zero row with negative right-hand side marks the set empty.
    pub fn normalized(&self) -> HPolyhedron {
        let q = self.dim();
        let mut rows = Vec::new();
        let mut empty = self.empty;
        for i in 0..self.n_rows() {
            let a = self.row(i);
            let nrm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm <= 1e-12 {
                if self.t[i] < -1e-9 {
                    empty = true;
                }
                continue;
            }
            rows.push((a.iter().map(|v| v / nrm).collect::<Vec<_>>(), self.t[i] / nrm));
        }
        let mut m = DMatrix::zeros(rows.len(), q);
        let mut t = Vec::with_capacity(rows.len());
        for (i, (a, ti)) in rows.into_iter().enumerate() {
            for k in 0..q {
                m[(i, k)] = if a[k].abs() < 1e-15 { 0.0 } else { a[k] };
            }
            t.push(ti);
        }
        HPolyhedron { m, t, minimal: false, empty }
    }

    fn select(&self, keep: &[usize]) -> HPolyhedron {
        let q = self.dim();
        let m = DMatrix::from_fn(keep.len(), q, |i, k| self.m[(keep[i], k)]);
        let t = keep.iter().map(|&i| self.t[i]).collect();
        HPolyhedron { m, t, minimal: false, empty: self.empty }
    }
}

fn opts(tol: &Tolerances) -> SimplexOptions {
    SimplexOptions { max_iter: tol.max_iter, tol_feas: tol.feas, tol_dual: tol.dual }
}

/// Chebyshev center and radius, or `None` when the set is empty.
pub fn chebyshev_center_region(p: &HPolyhedron, tol: &Tolerances) -> Result<Option<(Vec<f64>, f64)>, LpError> {
    if p.empty {
        return Ok(None);
    }
    let q = p.dim();
    let mut mm = DMatrix::zeros(p.n_rows(), q);
    let mut norms = vec![0.0; p.n_rows()];
    for i in 0..p.n_rows() {
        for k in 0..q {
            mm[(i, k)] = p.m[(i, k)];
            norms[i] += p.m[(i, k)] * p.m[(i, k)];
        }
        norms[i] = norms[i].sqrt();
    }
    chebyshev_lp(&mm, &norms, &p.t, tol)
}

/// `max r  s.t.  M_i u + ‖M_i‖ r ≤ t_i, r ≥ 0`. The radius is only capped
/// when the first solve is unbounded, so the cap never skews the
/// feasibility scale of the emptiness test.
fn chebyshev_lp(mm: &DMatrix<f64>, norms: &[f64], t: &[f64], tol: &Tolerances) -> Result<Option<(Vec<f64>, f64)>, LpError> {
    let (r, q) = mm.shape();
    let build = |cap: Option<f64>| {
        let extra = if cap.is_some() { 2 } else { 1 };
        let mut a = DMatrix::zeros(r + extra, q + 1);
        let mut rhs = vec![0.0; r + extra];
        for i in 0..r {
            for k in 0..q {
                a[(i, k)] = mm[(i, k)];
            }
            a[(i, q)] = norms[i];
            rhs[i] = t[i];
        }
        a[(r, q)] = -1.0;
        if let Some(c) = cap {
            a[(r + 1, q)] = 1.0;
            rhs[r + 1] = c;
        }
        (a, rhs)
    };
    let mut cost = vec![0.0; q + 1];
    cost[q] = -1.0;
    let (a, rhs) = build(None);
    let (mut st, mut u) = solve_inequality(&cost, &a, &rhs, &opts(tol))?;
    if st == SimplexStatus::Unbounded {
        let cap = t.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let (a, rhs) = build(Some(cap));
        (st, u) = solve_inequality(&cost, &a, &rhs, &opts(tol))?;
    }
    match st {
        SimplexStatus::Optimal => Ok(Some((u[..q].to_vec(), u[q].max(0.0)))),
        SimplexStatus::Infeasible => Ok(None),
        SimplexStatus::Unbounded => Err(LpError::SolverFailure("Chebyshev LP unbounded despite radius cap".into())),
    }
}

/// Drops rows implied by the others. Rows are normalized first.
pub fn remove_redundant(p: &HPolyhedron, tol: &Tolerances) -> Result<HPolyhedron, LpError> {
    let p = p.normalized();
    if p.empty || chebyshev_center_region(&p, tol)?.is_none() {
        return Ok(HPolyhedron::empty(p.dim()));
    }
    let q = p.dim();
    let mut keep: Vec<bool> = vec![true; p.n_rows()];
    for i in 0..p.n_rows() {
        let others: Vec<usize> = (0..p.n_rows()).filter(|&j| j != i && keep[j]).collect();
        if others.is_empty() {
            continue;
        }
        let sub = p.select(&others);
        let cost: Vec<f64> = (0..q).map(|k| -p.m[(i, k)]).collect();
        let (st, u) = solve_inequality(&cost, &sub.m, &sub.t, &opts(tol))?;
        if st == SimplexStatus::Optimal {
            let val: f64 = (0..q).map(|k| p.m[(i, k)] * u[k]).sum();
            if val <= p.t[i] + tol.zero {
                keep[i] = false;
            }
        }
    }
    let idx: Vec<usize> = (0..p.n_rows()).filter(|&i| keep[i]).collect();
    let mut out = p.select(&idx);
    out.minimal = true;
    Ok(out)
}

/// Projects onto the first `keep` coordinates by Fourier–Motzkin elimination,
/// pruning redundant rows after every step.
pub fn project_polyhedron(lifted: &HPolyhedron, keep: usize, tol: &Tolerances) -> Result<HPolyhedron, GeomError> {
    let mut cur = lifted.normalized();
    if cur.dim() == keep {
        return Ok(lifted.clone());
    }
    while cur.dim() > keep {
        if cur.empty {
            return Ok(HPolyhedron::empty(keep));
        }
        let k = cur.dim() - 1;
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut zero = Vec::new();
        for i in 0..cur.n_rows() {
            let a = cur.m[(i, k)];
            if a > COEF_EPS {
                pos.push(i);
            } else if a < -COEF_EPS {
                neg.push(i);
            } else {
                zero.push(i);
            }
        }
        let total = zero.len() + pos.len() * neg.len();
        if total > tol.fm_rows {
            return Err(GeomError::ProjectionOverflow(tol.fm_rows));
        }
        let mut m = DMatrix::zeros(total, k);
        let mut t = Vec::with_capacity(total);
        let mut r = 0;
        for &i in &zero {
            for c in 0..k {
                m[(r, c)] = cur.m[(i, c)];
            }
            t.push(cur.t[i]);
            r += 1;
        }
        for &i in &pos {
            let ai = cur.m[(i, k)];
            for &j in &neg {
                let aj = -cur.m[(j, k)];
                for c in 0..k {
                    m[(r, c)] = cur.m[(i, c)] / ai + cur.m[(j, c)] / aj;
                }
                t.push(cur.t[i] / ai + cur.t[j] / aj);
                r += 1;
            }
        }
        let next = HPolyhedron::new(m, t);
        cur = remove_redundant(&next, tol)?;
        if cur.empty {
            return Ok(HPolyhedron::empty(keep));
        }
    }
    Ok(cur)
}

/// The optimal face `{x ≥ 0 : Gx = v}` written as `x̃ = N(ℵu + y_p) + h`.
///
/// Split pairs are merged into one sign-free coordinate before the
/// geometry is built (`x̃_p = x_p − x_q`), so the face carries no artificial
/// ray and has the dimension of the face in the original variables.
#[derive(Debug, Clone)]
pub struct OptimalFace {
    pub g: DMatrix<f64>,
    pub v: Vec<f64>,
    /// Standard column behind each reduced coordinate.
    pub cols: Vec<usize>,
    /// Negative partner of a reduced coordinate, for sign-free ones.
    pub partner: Vec<Option<usize>>,
    /// Orthonormal basis of ker G̃ (ñ × n_N).
    pub n_basis: DMatrix<f64>,
    pub h: Vec<f64>,
    /// Standard indices that are positive somewhere on the face.
    pub explicit: Vec<usize>,
    /// Standard indices that vanish on the whole face.
    pub implicit: Vec<usize>,
    /// Basis of ker N_im (n_N × n_X).
    pub aleph: DMatrix<f64>,
    pub y_p: Vec<f64>,
    pub n_x: usize,
    n_std: usize,
}

impl OptimalFace {
    fn reduced_point(&self, u: &[f64]) -> DVector<f64> {
        let y = &self.aleph * DVector::from_column_slice(u) + DVector::from_column_slice(&self.y_p);
        &self.n_basis * y + DVector::from_column_slice(&self.h)
    }

    /// Standard-form point for face coordinates `u`, split pairs canonical.
    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        self.expand(self.reduced_point(u).as_slice())
    }

    fn expand(&self, xr: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_std];
        for (k, &j) in self.cols.iter().enumerate() {
            match self.partner[k] {
                Some(q) if xr[k] < 0.0 => x[q] = -xr[k],
                _ => x[j] = xr[k],
            }
        }
        x
    }
}

/// Splits the rows of `{y : Ny + h ≥ 0}` into explicit and implicit ones.
/// `hint` is a known member of the set; rows with slack above `tz` there are
/// explicit without an LP.
pub fn find_implicit_inequalities(
    nmat: &DMatrix<f64>,
    h: &[f64],
    hint: Option<&[f64]>,
    tz: f64,
    tol: &Tolerances,
) -> Result<(Vec<usize>, Vec<usize>), GeomError> {
    let (rows, k) = nmat.shape();
    let mut explicit = Vec::new();
    let mut implicit = Vec::new();
    let neg = -nmat;
    for i in 0..rows {
        if let Some(y) = hint {
            let val: f64 = (0..k).map(|c| nmat[(i, c)] * y[c]).sum::<f64>() + h[i];
            if val > tz {
                explicit.push(i);
                continue;
            }
        }
        let cost: Vec<f64> = (0..k).map(|c| -nmat[(i, c)]).collect();
        let (st, y) = solve_inequality(&cost, &neg, h, &opts(tol))?;
        match st {
            SimplexStatus::Infeasible => return Err(GeomError::EmptyFace),
            SimplexStatus::Unbounded => explicit.push(i),
            SimplexStatus::Optimal => {
                let val: f64 = (0..k).map(|c| nmat[(i, c)] * y[c]).sum::<f64>() + h[i];
                if val > tz {
                    explicit.push(i);
                } else {
                    implicit.push(i);
                }
            }
        }
    }
    Ok((explicit, implicit))
}

/// Builds the optimal face at `theta` from the optimal value `z_max` (max
/// sense) and an optimal point `x_star`, which serves as the membership hint.
pub fn build_optimal_face(
    lp: &StandardFormLP,
    theta: &[f64],
    z_max: f64,
    x_star: &[f64],
    tol: &Tolerances,
) -> Result<OptimalFace, GeomError> {
    let (m, n) = (lp.m(), lp.n());
    let negatives: Vec<usize> = lp.split_pairs.iter().map(|&(_, q)| q).collect();
    let cols: Vec<usize> = (0..n).filter(|j| !negatives.contains(j)).collect();
    let partner: Vec<Option<usize>> = cols.iter().map(|&j| lp.split_pairs.iter().find(|&&(p, _)| p == j).map(|&(_, q)| q)).collect();
    let nr = cols.len();

    let mut g = DMatrix::zeros(m + 1, nr);
    for (k, &j) in cols.iter().enumerate() {
        for i in 0..m {
            g[(i, k)] = lp.a_dense()[(i, j)];
        }
        g[(m, k)] = -lp.c[j];
    }
    let mut v = lp.rhs(theta);
    let tz = tol.zero_for(&v);
    v.push(-z_max);
    let h = dense_right_pinv_solve(&g, &DVector::from_column_slice(&v)).map_err(|_| GeomError::IllConditionedFace)?;
    let nb = dense_nullspace(&g);
    let kdim = nb.ncols();

    let xr: Vec<f64> = cols.iter().zip(&partner).map(|(&j, p)| x_star[j] - p.map_or(0.0, |q| x_star[q])).collect();
    let hint: Vec<f64> = (nb.transpose() * (DVector::from_column_slice(&xr) - &h)).iter().cloned().collect();

    // Sign rows exist only for coordinates that are not sign-free.
    let signed: Vec<usize> = (0..nr).filter(|&k| partner[k].is_none()).collect();
    let n_rows = DMatrix::from_fn(signed.len(), kdim, |i, c| nb[(signed[i], c)]);
    let h_rows: Vec<f64> = signed.iter().map(|&k| h[k]).collect();
    let (ex, im) = find_implicit_inequalities(&n_rows, &h_rows, Some(&hint), tz, tol)?;
    let im_red: Vec<usize> = im.iter().map(|&i| signed[i]).collect();

    // Coordinates already fixed by G̃ have a zero row in N and add nothing;
    // keeping them would let the relative rank cut-off drop a real direction.
    let binding: Vec<usize> =
        im_red.iter().copied().filter(|&k| (0..kdim).map(|c| nb[(k, c)] * nb[(k, c)]).sum::<f64>().sqrt() > 1e-9).collect();
    let n_im = DMatrix::from_fn(binding.len(), kdim, |i, c| nb[(binding[i], c)]);
    let h_im = DVector::from_iterator(binding.len(), binding.iter().map(|&k| h[k]));
    let (aleph, y_p) = if binding.is_empty() {
        (DMatrix::identity(kdim, kdim), DVector::zeros(kdim))
    } else {
        (dense_nullspace(&n_im), -(dense_pinv(&n_im) * h_im))
    };
    let mut explicit: Vec<usize> = ex.iter().map(|&i| cols[signed[i]]).collect();
    let mut implicit: Vec<usize> = im_red.iter().map(|&k| cols[k]).collect();
    // Both parts of a split pair can be positive somewhere (by shifting along
    // the pair), so they count as explicit.
    for &(p, q) in &lp.split_pairs {
        explicit.push(p);
        explicit.push(q);
    }
    explicit.sort_unstable();
    implicit.sort_unstable();
    let n_x = aleph.ncols();
    Ok(OptimalFace {
        g,
        v,
        cols,
        partner,
        n_basis: nb,
        h: h.iter().cloned().collect(),
        explicit,
        implicit,
        aleph,
        y_p: y_p.iter().cloned().collect(),
        n_x,
        n_std: n,
    })
}

/// Chebyshev center of the face with its inscribed radius, as a standard
/// point. Implicit coordinates are exactly zero and at most one part of each
/// split pair is positive.
pub fn chebyshev_center_face(face: &OptimalFace, tol: &Tolerances) -> Result<(Vec<f64>, f64), GeomError> {
    let nx = face.n_x;
    let base = face.reduced_point(&vec![0.0; nx]);
    let (mut xr, radius) = if nx == 0 {
        (base, 0.0)
    } else {
        // x̃_k ≥ 0 becomes  −(Nℵ)_k u ≤ x̃_base_k.
        let na = &face.n_basis * &face.aleph;
        let rows: Vec<usize> = (0..face.cols.len())
            .filter(|&k| face.partner[k].is_none() && !face.implicit.contains(&face.cols[k]))
            .filter(|&k| (0..nx).any(|c| na[(k, c)].abs() > 1e-12))
            .collect();
        let mut mm = DMatrix::zeros(rows.len(), nx);
        let mut norms = vec![0.0; rows.len()];
        let mut t = vec![0.0; rows.len()];
        for (r, &k) in rows.iter().enumerate() {
            for c in 0..nx {
                mm[(r, c)] = -na[(k, c)];
                norms[r] += na[(k, c)] * na[(k, c)];
            }
            norms[r] = norms[r].sqrt();
            t[r] = base[k];
        }
        let Some((u, rad)) = chebyshev_lp(&mm, &norms, &t, tol)? else {
            return Err(GeomError::EmptyFace);
        };
        (face.reduced_point(&u), rad)
    };
    for k in 0..face.cols.len() {
        if face.partner[k].is_none() && (xr[k] < 0.0 || face.implicit.contains(&face.cols[k])) {
            xr[k] = 0.0;
        }
    }
    Ok((face.expand(xr.as_slice()), radius))
}

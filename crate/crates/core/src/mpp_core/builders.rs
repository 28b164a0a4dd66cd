//! Critical-region construction for the unique and the multiple-optimum cases.

use nalgebra::{DMatrix, DVector};

use crate::face_geometry::{project_polyhedron, remove_redundant, GeomError, HPolyhedron};
use crate::lp_engine::StandardFormLP;
use crate::sparse_linalg::{dense_left_pinv, dense_nullspace, dense_pinv, dense_rank};
use crate::tol::Tolerances;

use super::{AffineMap, Case, IndexPartition, MppError, SolutionTriple};

/// Weights of the auxiliary QP `min ½xᵀHx + g(θ)ᵀx` over standard variables.
#[derive(Debug, Clone)]
pub struct QpObjective {
    pub h: DMatrix<f64>,
    pub g0: Vec<f64>,
    pub g_theta: DMatrix<f64>,
}

impl QpObjective {
    /// `½‖x_orig‖²` through the recovery map, so slacks carry no weight.
    pub fn original_norm(lp: &StandardFormLP) -> Self {
        let r = lp.recovery.r.to_dense();
        let rt = r.transpose();
        QpObjective {
            h: &rt * &r,
            g0: (&rt * DVector::from_column_slice(&lp.recovery.r0)).iter().cloned().collect(),
            g_theta: &rt * &lp.recovery.r_theta,
        }
    }

    /// `½‖x‖²` over every standard variable.
    pub fn standard_norm(lp: &StandardFormLP) -> Self {
        let n = lp.n();
        QpObjective { h: DMatrix::identity(n, n), g0: vec![0.0; n], g_theta: DMatrix::zeros(n, lp.q()) }
    }

    pub fn g_at(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.g0.len()).map(|i| self.g0[i] + (0..theta.len()).map(|k| self.g_theta[(i, k)] * theta[k]).sum::<f64>()).collect()
    }
}

pub(crate) struct Built {
    pub region: HPolyhedron,
    pub case: Case,
    pub solution: SolutionTriple,
}

fn columns(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])])
}

fn scale_of(w: &[f64], f: &DMatrix<f64>) -> f64 {
    let wm = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    wm.max(f.amax()).max(1.0)
}

/// Residual test that `Ā x = w + Fθ` is solvable for every θ once `x` is the
/// least-squares map. A failure means the probe sat on a lower-dimensional
/// set and picked up an accidental zero.
fn check_consistent(a1: &DMatrix<f64>, pinv: &DMatrix<f64>, w: &DVector<f64>, f: &DMatrix<f64>) -> Result<(), MppError> {
    let scale = scale_of(w.as_slice(), f);
    let proj = a1 * pinv;
    let rw = w - &proj * w;
    let rf = f - &proj * f;
    let res = rw.amax().max(rf.amax());
    if res > 1e-8 * scale {
        return Err(MppError::Misclassified(format!("support system inconsistent away from the probe (residual {res:.3e})")));
    }
    Ok(())
}

/// Adds `−E_k θ ≤ e_k` for each listed map row (the map must stay ≥ 0).
fn push_nonneg_rows(poly: &mut HPolyhedron, e_mat: &DMatrix<f64>, e: &[f64], rows: &[usize], extra: usize) {
    let q = e_mat.ncols();
    for &k in rows {
        let mut a = vec![0.0; q + extra];
        for c in 0..q {
            a[c] = -e_mat[(k, c)];
        }
        poly.push_row(&a, e[k]);
    }
}

fn minimize(poly: &HPolyhedron, tol: &Tolerances) -> Result<HPolyhedron, MppError> {
    Ok(remove_redundant(poly, tol)?)
}

/// Critical region of a unique (vertex) solution with support `J1`.
///
/// The primal map is `Ā₁⁺(w + Fθ)` (the inverse when `n₁ = m`); the region is
/// primal feasibility of that map. Duals are the least-norm solution of
/// `Ā₁ᵀλ = −c₁`, with the null-space basis of `Ā₁ᵀ` kept alongside.
pub fn build_cr_unique(
    lp: &StandardFormLP,
    part: &IndexPartition,
    r: &HPolyhedron,
    tol: &Tolerances,
) -> Result<(HPolyhedron, SolutionTriple, Case), MppError> {
    let b = build_unique(lp, part, r, tol)?;
    Ok((b.region, b.solution, b.case))
}

pub(crate) fn build_unique(lp: &StandardFormLP, part: &IndexPartition, r: &HPolyhedron, tol: &Tolerances) -> Result<Built, MppError> {
    let (m, n, q) = (lp.m(), lp.n(), lp.q());
    let a = lp.a_dense();
    let f = lp.f_dense();
    let w = DVector::from_column_slice(&lp.w);
    let j1 = &part.j1;
    let n1 = j1.len();
    let a1 = columns(a, j1);
    if n1 > m || dense_rank(&a1) < n1 {
        return Err(MppError::Misclassified(format!("support of size {n1} is not linearly independent")));
    }
    let pinv = dense_left_pinv(&a1).map_err(|_| MppError::Misclassified("Ā₁ is rank deficient".into()))?;
    check_consistent(&a1, &pinv, &w, &f)?;
    let e1 = &pinv * &f;
    let e0 = &pinv * &w;

    let mut x_mat = DMatrix::zeros(n, q);
    let mut x0 = vec![0.0; n];
    for (k, &j) in j1.iter().enumerate() {
        for c in 0..q {
            x_mat[(j, c)] = e1[(k, c)];
        }
        x0[j] = e0[k];
    }
    let c1 = DVector::from_iterator(n1, j1.iter().map(|&j| lp.c[j]));
    let lambda = -(pinv.transpose() * c1);
    let z = dense_nullspace(&a1.transpose());
    let mu_vec = -(DVector::from_column_slice(&lp.c) + a.transpose() * &lambda);
    let mut mu0: Vec<f64> = mu_vec.iter().cloned().collect();
    for &j in j1 {
        mu0[j] = 0.0;
    }

    let mut poly = r.clone();
    let all: Vec<usize> = (0..n1).collect();
    push_nonneg_rows(&mut poly, &e1, e0.as_slice(), &all, 0);
    let region = minimize(&poly, tol)?;
    let case = if n1 == m { Case::UniqueNondegenerate } else { Case::UniqueDegenerate };
    Ok(Built {
        region,
        case,
        solution: SolutionTriple {
            x: AffineMap { e_mat: x_mat, e: x0 },
            lambda_p: AffineMap { e_mat: DMatrix::zeros(m, q), e: lambda.iter().cloned().collect() },
            z,
            mu: AffineMap { e_mat: DMatrix::zeros(n, q), e: mu0 },
        },
    })
}

/// Critical region of the minimum-norm optimum on a multiple-optimum face.
///
/// `part` carries the two-level split `J1 = J11 ∪ J10`. With `Ā₁₁` of full
/// row rank the QP's KKT system is solved for affine primal and dual maps and
/// the region holds both primal and multiplier rows. Otherwise `x₁₁` is
/// pinned by the left pseudoinverse, the duals keep a free null-space part
/// `λ_z`, and the region is the projection of the lifted `(θ, λ_z)` set.
pub fn build_cr_multiple(
    lp: &StandardFormLP,
    part: &IndexPartition,
    obj: &QpObjective,
    r: &HPolyhedron,
    tol: &Tolerances,
) -> Result<(HPolyhedron, SolutionTriple, Case), MppError> {
    let b = build_multiple(lp, part, obj, r, tol)?;
    Ok((b.region, b.solution, b.case))
}

pub(crate) fn build_multiple(
    lp: &StandardFormLP,
    part: &IndexPartition,
    obj: &QpObjective,
    r: &HPolyhedron,
    tol: &Tolerances,
) -> Result<Built, MppError> {
    let (m, n, q) = (lp.m(), lp.n(), lp.q());
    let a = lp.a_dense();
    let f = lp.f_dense();
    let w = DVector::from_column_slice(&lp.w);
    let kk = part.j11.as_ref().ok_or_else(|| MppError::Misclassified("missing second-level partition".into()))?;
    let ll = part.j10.as_ref().unwrap();
    let n11 = kk.len();
    let a11 = columns(a, kk);
    let a10 = columns(a, ll);
    let rank = dense_rank(&a11);
    let h_kk = DMatrix::from_fn(n11, n11, |i, j| obj.h[(kk[i], kk[j])]);
    let h_lk = DMatrix::from_fn(ll.len(), n11, |i, j| obj.h[(ll[i], kk[j])]);
    let gk0 = DVector::from_iterator(n11, kk.iter().map(|&j| obj.g0[j]));
    let gkt = DMatrix::from_fn(n11, q, |i, c| obj.g_theta[(kk[i], c)]);
    let gl0 = DVector::from_iterator(ll.len(), ll.iter().map(|&j| obj.g0[j]));
    let glt = DMatrix::from_fn(ll.len(), q, |i, c| obj.g_theta[(ll[i], c)]);

    // x₁₁ = X θ + x0,  λ_p = Λ θ + l0,  λ = λ_p + 𝒵 λ_z
    let (xm, x0, lm, l0, zz, case) = if rank == m {
        let size = n11 + m;
        let mut kkt = DMatrix::zeros(size, size);
        kkt.view_mut((0, 0), (n11, n11)).copy_from(&h_kk);
        kkt.view_mut((0, n11), (n11, m)).copy_from(&(-a11.transpose()));
        kkt.view_mut((n11, 0), (m, n11)).copy_from(&a11);
        if dense_rank(&kkt) < size {
            return Err(MppError::Misclassified("KKT matrix of the auxiliary QP is singular".into()));
        }
        let lu = kkt.lu();
        let mut rhs_t = DMatrix::zeros(size, q);
        rhs_t.view_mut((0, 0), (n11, q)).copy_from(&(-&gkt));
        rhs_t.view_mut((n11, 0), (m, q)).copy_from(&f);
        let mut rhs_0 = DVector::zeros(size);
        rhs_0.rows_mut(0, n11).copy_from(&(-&gk0));
        rhs_0.rows_mut(n11, m).copy_from(&w);
        let st = lu.solve(&rhs_t).ok_or_else(|| MppError::Misclassified("KKT solve failed".into()))?;
        let s0 = lu.solve(&rhs_0).ok_or_else(|| MppError::Misclassified("KKT solve failed".into()))?;
        (
            st.rows(0, n11).into_owned(),
            s0.rows(0, n11).into_owned(),
            st.rows(n11, m).into_owned(),
            s0.rows(n11, m).into_owned(),
            DMatrix::zeros(m, 0),
            Case::MultipleNondegenerate,
        )
    } else if rank == n11 {
        let pinv = dense_left_pinv(&a11).map_err(|_| MppError::Misclassified("Ā₁₁ is rank deficient".into()))?;
        check_consistent(&a11, &pinv, &w, &f)?;
        let xm = &pinv * &f;
        let x0 = &pinv * &w;
        // Ā₁₁ᵀλ = H₁₁x₁₁ + g₁₁, least-norm part through (Ā₁₁ᵀ)⁺ = pinvᵀ
        let pt = pinv.transpose();
        let lm = &pt * (&h_kk * &xm + &gkt);
        let l0 = &pt * (&h_kk * &x0 + &gk0);
        let zz = dense_nullspace(&a11.transpose());
        (xm, x0, lm, l0, zz, Case::MultipleDegenerate)
    } else {
        return Err(MppError::Misclassified(format!("Ā₁₁ has rank {rank} with {n11} columns and {m} rows")));
    };

    // ν₁₀ = H₁₀,₁₁ x₁₁ + g₁₀ − Ā₁₀ᵀ λ   (≥ 0)
    let nu_m = &h_lk * &xm + &glt - a10.transpose() * &lm;
    let nu_0 = &h_lk * &x0 + &gl0 - a10.transpose() * &l0;
    let nu_z = -(a10.transpose() * &zz);
    let kz = zz.ncols();

    let lifted = kz > 0 && !ll.is_empty();
    let extra = if lifted { kz } else { 0 };
    let mut poly = if lifted {
        let mut p = HPolyhedron::new(DMatrix::zeros(0, q + kz), vec![]);
        for i in 0..r.n_rows() {
            let mut a = r.row(i);
            a.resize(q + kz, 0.0);
            p.push_row(&a, r.t[i]);
        }
        p
    } else {
        r.clone()
    };
    let all: Vec<usize> = (0..n11).collect();
    push_nonneg_rows(&mut poly, &xm, x0.as_slice(), &all, extra);
    for i in 0..ll.len() {
        let mut a = vec![0.0; q + extra];
        for c in 0..q {
            a[c] = -nu_m[(i, c)];
        }
        if lifted {
            for c in 0..kz {
                a[q + c] = -nu_z[(i, c)];
            }
        }
        poly.push_row(&a, nu_0[i]);
    }
    let region = if lifted {
        match project_polyhedron(&poly, q, tol) {
            Ok(p) => minimize(&p, tol)?,
            Err(GeomError::ProjectionOverflow(k)) => return Err(MppError::ProjectionOverflow(k)),
            Err(e) => return Err(e.into()),
        }
    } else {
        minimize(&poly, tol)?
    };

    // Standard-space maps
    let mut x_mat = DMatrix::zeros(n, q);
    let mut xv = vec![0.0; n];
    for (k, &j) in kk.iter().enumerate() {
        for c in 0..q {
            x_mat[(j, c)] = xm[(k, c)];
        }
        xv[j] = x0[k];
    }
    // Bound duals: QP multipliers on J10 (λ_z = 0), LP reduced costs on J0.
    let mut mu_mat = DMatrix::zeros(n, q);
    let mut mu0 = vec![0.0; n];
    for (i, &j) in ll.iter().enumerate() {
        for c in 0..q {
            mu_mat[(j, c)] = nu_m[(i, c)];
        }
        mu0[j] = nu_0[i];
    }
    let a1 = columns(a, &part.j1);
    let c1 = DVector::from_iterator(part.j1.len(), part.j1.iter().map(|&j| lp.c[j]));
    let lam_lp = -(dense_pinv(&a1.transpose()) * c1);
    let mu_lp = -(DVector::from_column_slice(&lp.c) + a.transpose() * &lam_lp);
    for &j in &part.j0 {
        mu0[j] = mu_lp[j];
    }
    Ok(Built {
        region,
        case,
        solution: SolutionTriple {
            x: AffineMap { e_mat: x_mat, e: xv },
            lambda_p: AffineMap { e_mat: lm, e: l0.iter().cloned().collect() },
            z: zz,
            mu: AffineMap { e_mat: mu_mat, e: mu0 },
        },
    })
}

//! Primal active-set solver for the small convex QPs used to pick the
//! minimum-norm optimum on an optimal face.

use nalgebra::{DMatrix, DVector};

use crate::sparse_linalg::{dense_nullspace, dense_pinv};

use super::MppError;

/// `min ½xᵀHx + gᵀx  s.t.  Ax = b, x ≥ 0`, started from the feasible `x0`.
/// `H` must be positive definite on `ker A`.
pub fn active_set_qp(h: &DMatrix<f64>, g: &[f64], a: &DMatrix<f64>, x0: &[f64], max_iter: usize) -> Result<Vec<f64>, MppError> {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let gv = DVector::from_column_slice(g);
    let scale = 1.0 + x.amax();
    let mut working: Vec<bool> = x.iter().map(|&v| v <= 0.0).collect();
    for j in 0..n {
        if working[j] {
            x[j] = 0.0;
        }
    }
    for _ in 0..max_iter {
        let fixed: Vec<usize> = (0..n).filter(|&j| working[j]).collect();
        let mut k = a.clone();
        for &j in &fixed {
            let r = k.nrows();
            k = k.insert_row(r, 0.0);
            k[(r, j)] = 1.0;
        }
        let grad = h * &x + &gv;
        let z = dense_nullspace(&k);
        let p = if z.ncols() == 0 {
            DVector::zeros(n)
        } else {
            let hr = z.transpose() * h * &z;
            let rhs = -(z.transpose() * &grad);
            let s = match hr.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => dense_pinv(&hr) * rhs,
            };
            &z * s
        };
        if p.amax() <= 1e-12 * scale {
            // grad = Aᵀλ + Σ ν_j e_j over the working set
            let cols = a.nrows() + fixed.len();
            let mut m = DMatrix::zeros(n, cols);
            m.view_mut((0, 0), (n, a.nrows())).copy_from(&a.transpose());
            for (t, &j) in fixed.iter().enumerate() {
                m[(j, a.nrows() + t)] = 1.0;
            }
            let mult = dense_pinv(&m) * &grad;
            let mut worst: Option<(usize, f64)> = None;
            for (t, &j) in fixed.iter().enumerate() {
                let nu = mult[a.nrows() + t];
                if nu < -1e-10 * (1.0 + grad.amax()) && worst.is_none_or(|(_, w)| nu < w) {
                    worst = Some((j, nu));
                }
            }
            match worst {
                None => return Ok(x.iter().cloned().collect()),
                Some((j, _)) => working[j] = false,
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut block = None;
        for j in 0..n {
            if !working[j] && p[j] < -1e-14 * scale {
                let aj = x[j] / -p[j];
                if aj < alpha {
                    alpha = aj;
                    block = Some(j);
                }
            }
        }
        x += alpha * p;
        if let Some(j) = block {
            working[j] = true;
            x[j] = 0.0;
        }
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    Err(MppError::Solver("active-set QP did not converge".into()))
}

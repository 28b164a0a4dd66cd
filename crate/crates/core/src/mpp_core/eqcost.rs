//! Randomized equivalent cost vectors: one auxiliary objective whose optimum
//! over the optimal face is unique.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::face_geometry::{chebyshev_center_region, HPolyhedron};
use crate::lp_engine::simplex::{solve_inequality, SimplexOptions, SimplexStatus};
use crate::lp_engine::{lexicographic_multiplicity, LpError, Multiplicity, StandardFormLP, Status};
use crate::tol::Tolerances;

use super::MppError;

/// Geometry of the admissible cost cone `{d : C d ≤ 0}` with `C = GᵀQ − I`.
#[derive(Debug, Clone)]
pub struct CostCone {
    pub c: DMatrix<f64>,
    /// Chebyshev center and radius inside `|d| ≤ 1` (scale-free form of the `U` box).
    pub center: Vec<f64>,
    pub radius: f64,
    /// Dual bound rows kept after the redundancy test, as `(index, sign)`.
    pub kept_bounds: Vec<(usize, f64)>,
}

fn opts(tol: &Tolerances) -> SimplexOptions {
    SimplexOptions { max_iter: tol.max_iter, tol_feas: tol.feas, tol_dual: tol.dual }
}

/// `G = [A; −cᵀ]` with `c` in the maximization sense.
fn g_matrix(lp: &StandardFormLP) -> DMatrix<f64> {
    let (m, n) = (lp.m(), lp.n());
    let mut g = DMatrix::zeros(m + 1, n);
    g.view_mut((0, 0), (m, n)).copy_from(lp.a_dense());
    for j in 0..n {
        g[(m, j)] = -lp.c[j];
    }
    g
}

/// Builds the cone rows and its Chebyshev center.
///
/// The dual box `|λ| ≤ U` is tested for redundancy at `d = 0`, where the
/// test is scale-free, so `U` only sets the overall size of the cost box and
/// drops out after normalization.
pub fn cost_cone(lp: &StandardFormLP, tol: &Tolerances) -> Result<CostCone, MppError> {
    let g = g_matrix(lp);
    let (k, n) = g.shape();
    let gt = g.transpose();
    // {λ : Gᵀλ ≤ 0, ±λ_i ≤ 1}
    let mut kept: Vec<(usize, f64)> = (0..k).flat_map(|i| [(i, 1.0), (i, -1.0)]).collect();
    let mut idx = 0;
    while idx < kept.len() {
        let (i, s) = kept[idx];
        let others: Vec<(usize, f64)> = kept.iter().enumerate().filter(|&(t, _)| t != idx).map(|(_, &r)| r).collect();
        let rows = n + others.len();
        let mut mm = DMatrix::zeros(rows, k);
        let mut t = vec![0.0; rows];
        mm.view_mut((0, 0), (n, k)).copy_from(&gt);
        for (r, &(oi, os)) in others.iter().enumerate() {
            mm[(n + r, oi)] = os;
            t[n + r] = 1.0;
        }
        let mut cost = vec![0.0; k];
        cost[i] = -s;
        let (st, u) = solve_inequality(&cost, &mm, &t, &opts(tol))?;
        let redundant = st == SimplexStatus::Optimal && s * u[i] <= 1.0 + 1e-9;
        if redundant {
            kept.remove(idx);
        } else {
            idx += 1;
        }
    }
    let mut gp = DMatrix::zeros(k, n + kept.len());
    gp.view_mut((0, 0), (k, n)).copy_from(&g);
    for (r, &(i, s)) in kept.iter().enumerate() {
        gp[(i, n + r)] = s;
    }
    let gram = &gp * gp.transpose();
    let q = gram.clone().cholesky().map(|ch| ch.solve(&g)).ok_or_else(|| MppError::Solver("G′G′ᵀ is singular".into()))?;
    let c = &gt * q - DMatrix::identity(n, n);

    // Chebyshev center of {C d ≤ 0, |d| ≤ 1}
    let mut poly = HPolyhedron::from_box(&vec![-1.0; n], &vec![1.0; n]);
    for i in 0..n {
        let row: Vec<f64> = c.row(i).iter().cloned().collect();
        if row.iter().any(|v| v.abs() > 1e-12) {
            poly.push_row(&row, 0.0);
        }
    }
    let (center, radius) = chebyshev_center_region(&poly, tol)?.ok_or_else(|| MppError::Solver("cost cone is empty".into()))?;
    Ok(CostCone { c, center, radius, kept_bounds: kept })
}

/// Largest entry of `C d`; the cone contract requires it to be ≤ 0.
pub fn cone_violation(cone: &CostCone, d: &[f64]) -> f64 {
    let v = &cone.c * DVector::from_column_slice(d);
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Result of [`equivalent_cost_vector`].
#[derive(Debug, Clone)]
pub struct EquivalentCost {
    /// Minimized standard-form cost, scaled to unit max-norm.
    pub d: Vec<f64>,
    pub attempts: usize,
    pub cone: CostCone,
}

/// Draws `d = d_c + A t` and checks it at `theta`: the auxiliary LP must be
/// bounded with a unique optimum and `d` must satisfy the cone rows.
pub fn equivalent_cost_vector(
    lp: &StandardFormLP,
    theta: &[f64],
    u_bound: f64,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<EquivalentCost, MppError> {
    let cone = cost_cone(lp, tol)?;
    let n = lp.n();
    // In units of U: d_c and r_c scale with U, the floor term does too.
    let dc_inf = cone.center.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let amp = (cone.radius / u_bound).max(1e-3 * dc_inf);
    for attempt in 1..=5 {
        let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut d: Vec<f64> = (0..n).map(|j| cone.center[j] + amp * t[j]).collect();
        let norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            continue;
        }
        for v in d.iter_mut() {
            *v /= norm;
        }
        if cone_violation(&cone, &d) > 1e-8 {
            continue;
        }
        match lexicographic_multiplicity(lp, &[d.clone()], theta, tol) {
            Ok((sol, Multiplicity::Unique)) if sol.status == Status::Optimal => {
                return Ok(EquivalentCost { d, attempts: attempt, cone });
            }
            Ok(_) | Err(LpError::UnboundedAuxiliary(_)) | Err(LpError::IllPosed(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(MppError::EquivalentCostFailure)
}

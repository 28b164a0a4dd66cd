//! Dense revised simplex for `min cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Two phases with artificial columns, Dantzig pricing, and a switch to
//! Bland's rule once an phase has run `3(m+n)` iterations.

use nalgebra::DMatrix;

use super::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iter: usize,
    pub tol_feas: f64,
    pub tol_dual: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_iter: 50_000, tol_feas: 1e-8, tol_dual: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub status: SimplexStatus,
    pub x: Vec<f64>,
    /// Basic column per row; `None` marks a redundant row kept by an artificial.
    pub basis: Vec<Option<usize>>,
    /// Row duals: `cost − Aᵀy` are the reduced costs.
    pub y: Vec<f64>,
    pub reduced: Vec<f64>,
    pub iterations: usize,
}

const PIV_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;

struct Work<'a> {
    a: &'a DMatrix<f64>,
    sign: Vec<f64>,
    b: Vec<f64>,
    m: usize,
    n: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    xb: Vec<f64>,
    iterations: usize,
    max_iter: usize,
}

impl<'a> Work<'a> {
    /// Column `j` of the row-signed matrix; indices `n..n+m` are artificials.
    fn col(&self, j: usize) -> Vec<f64> {
        if j < self.n {
            (0..self.m).map(|i| self.sign[i] * self.a[(i, j)]).collect()
        } else {
            let mut e = vec![0.0; self.m];
            e[j - self.n] = 1.0;
            e
        }
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            (0..self.m).map(|i| self.sign[i] * self.a[(i, j)] * y[i]).sum()
        } else {
            y[j - self.n]
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut bm = DMatrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            let c = self.col(j);
            for i in 0..m {
                bm[(i, k)] = c[i];
            }
        }
        self.binv = bm.try_inverse().ok_or_else(|| LpError::SolverFailure("singular basis".into()))?;
        self.xb = (0..m).map(|i| (0..m).map(|k| self.binv[(i, k)] * self.b[k]).sum()).collect();
        Ok(())
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m).map(|k| (0..m).map(|i| self.binv[(i, k)] * cost[self.basis[i]]).sum()).collect()
    }

    fn ftran(&self, col: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m).map(|i| (0..m).map(|k| self.binv[(i, k)] * col[k]).sum()).collect()
    }

    fn pivot(&mut self, r: usize, q: usize, d: &[f64]) {
        let m = self.m;
        let t = self.xb[r] / d[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= t * d[i];
            }
        }
        self.xb[r] = t;
        let piv = d[r];
        for k in 0..m {
            self.binv[(r, k)] /= piv;
        }
        for i in 0..m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for k in 0..m {
                    let v = self.binv[(r, k)];
                    self.binv[(i, k)] -= f * v;
                }
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = q;
        self.is_basic[q] = true;
    }

    /// Runs simplex iterations for `cost` over columns allowed by `enter_ok`.
    fn run(&mut self, cost: &[f64], enter_ok: &dyn Fn(usize) -> bool, tol_dual: f64) -> Result<SimplexStatus, LpError> {
        let bland_after = 3 * (self.m + self.n);
        let mut phase_iter = 0usize;
        loop {
            if self.iterations >= self.max_iter {
                return Err(LpError::SolverFailure(format!("iteration cap {} reached", self.max_iter)));
            }
            let bland = phase_iter >= bland_after;
            let y = self.duals(cost);
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                if self.is_basic[j] || !enter_ok(j) {
                    continue;
                }
                let rc = cost[j] - self.col_dot(j, &y);
                if rc < -tol_dual {
                    match enter {
                        None => enter = Some((j, rc)),
                        Some((_, best)) if !bland && rc < best => enter = Some((j, rc)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, _)) = enter else {
                return Ok(SimplexStatus::Optimal);
            };
            let d = self.ftran(&self.col(q));
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if d[i] > PIV_TOL {
                    let t = self.xb[i].max(0.0) / d[i];
                    leave = match leave {
                        None => Some((i, t)),
                        Some((r, best)) => {
                            let tie = (t - best).abs() <= 1e-12 * (1.0 + best.abs());
                            let better = if tie {
                                let ai = self.basis[i] >= self.n;
                                let ar = self.basis[r] >= self.n;
                                if ai != ar {
                                    ai
                                } else if bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    d[i] > d[r]
                                }
                            } else {
                                t < best
                            };
                            if better {
                                Some((i, t))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(SimplexStatus::Unbounded);
            };
            if self.xb[r] < 0.0 {
                self.xb[r] = 0.0;
            }
            self.pivot(r, q, &d);
            self.iterations += 1;
            phase_iter += 1;
            if self.iterations.is_multiple_of(REFACTOR_EVERY) {
                self.refactor()?;
            }
        }
    }
}

/// Solves `min costᵀx  s.t.  a x = b, x ≥ 0`.
pub fn solve_standard(a: &DMatrix<f64>, b: &[f64], cost: &[f64], opts: &SimplexOptions) -> Result<SimplexOutcome, LpError> {
    let (m, n) = a.shape();
    if b.len() != m || cost.len() != n {
        return Err(LpError::Format(format!("simplex data {}x{} with rhs {} and cost {}", m, n, b.len(), cost.len())));
    }
    if m == 0 {
        // Only sign constraints remain.
        if cost.iter().any(|&c| c < -opts.tol_dual) {
            return Ok(SimplexOutcome {
                status: SimplexStatus::Unbounded,
                x: vec![0.0; n],
                basis: vec![],
                y: vec![],
                reduced: cost.to_vec(),
                iterations: 0,
            });
        }
        return Ok(SimplexOutcome {
            status: SimplexStatus::Optimal,
            x: vec![0.0; n],
            basis: vec![],
            y: vec![],
            reduced: cost.to_vec(),
            iterations: 0,
        });
    }
    let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let bs: Vec<f64> = b.iter().map(|v| v.abs()).collect();
    let bscale = bs.iter().cloned().fold(1.0, f64::max);
    let feas_tol = opts.tol_feas * bscale;

    // Crash basis: reuse positive unit columns where possible.
    let mut basis = vec![usize::MAX; m];
    let mut is_basic = vec![false; n + m];
    let mut binv = DMatrix::identity(m, m);
    let mut xb = bs.clone();
    for j in 0..n {
        let mut nz = None;
        let mut count = 0;
        for i in 0..m {
            if a[(i, j)] != 0.0 {
                count += 1;
                nz = Some(i);
            }
        }
        if count == 1 {
            let i = nz.unwrap();
            let v = sign[i] * a[(i, j)];
            if v > 0.0 && basis[i] == usize::MAX {
                basis[i] = j;
                is_basic[j] = true;
                binv[(i, i)] = 1.0 / v;
                xb[i] = bs[i] / v;
            }
        }
    }
    for i in 0..m {
        if basis[i] == usize::MAX {
            basis[i] = n + i;
            is_basic[n + i] = true;
        }
    }
    let mut w = Work { a, sign, b: bs, m, n, basis, is_basic, binv, xb, iterations: 0, max_iter: opts.max_iter };

    let needs_phase1 = w.basis.iter().any(|&j| j >= n);
    if needs_phase1 {
        let mut c1 = vec![0.0; n + m];
        for i in 0..m {
            c1[n + i] = 1.0;
        }
        // Artificials never re-enter.
        let st = w.run(&c1, &|j| j < n, 1e-11)?;
        debug_assert_ne!(st, SimplexStatus::Unbounded);
        w.refactor()?;
        let infeas: f64 = (0..m).filter(|&i| w.basis[i] >= n).map(|i| w.xb[i].max(0.0)).sum();
        if infeas > feas_tol {
            return Ok(SimplexOutcome {
                status: SimplexStatus::Infeasible,
                x: vec![0.0; n],
                basis: vec![],
                y: vec![0.0; m],
                reduced: vec![0.0; n],
                iterations: w.iterations,
            });
        }
        // Drive zero-level artificials out of the basis where a pivot exists.
        for r in 0..m {
            if w.basis[r] < n {
                continue;
            }
            let row: Vec<f64> = (0..m).map(|k| w.binv[(r, k)]).collect();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if w.is_basic[j] {
                    continue;
                }
                let v = w.col_dot(j, &row).abs();
                if v > 1e-7 && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                w.xb[r] = 0.0;
                let d = w.ftran(&w.col(j));
                w.pivot(r, j, &d);
            }
        }
        w.refactor()?;
    }

    let mut c2 = vec![0.0; n + m];
    c2[..n].copy_from_slice(cost);
    let status = w.run(&c2, &|j| j < n, opts.tol_dual)?;
    w.refactor()?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        let j = w.basis[i];
        if j < n {
            let v = w.xb[i];
            x[j] = if v < 0.0 && v > -feas_tol { 0.0 } else { v };
        }
    }
    let ys = w.duals(&c2);
    let y: Vec<f64> = (0..m).map(|i| w.sign[i] * ys[i]).collect();
    let reduced: Vec<f64> = (0..n).map(|j| cost[j] - (0..m).map(|i| a[(i, j)] * y[i]).sum::<f64>()).collect();
    let basis = w.basis.iter().map(|&j| if j < n { Some(j) } else { None }).collect();
    Ok(SimplexOutcome { status, x, basis, y, reduced, iterations: w.iterations })
}

/// Solves `min costᵀu  s.t.  M u ≤ t` with every `u` free. Returns the status and `u`.
pub fn solve_inequality(cost: &[f64], mm: &DMatrix<f64>, t: &[f64], opts: &SimplexOptions) -> Result<(SimplexStatus, Vec<f64>), LpError> {
    let (r, k) = mm.shape();
    let mut a = DMatrix::zeros(r, 2 * k + r);
    for i in 0..r {
        for j in 0..k {
            a[(i, j)] = mm[(i, j)];
            a[(i, k + j)] = -mm[(i, j)];
        }
        a[(i, 2 * k + i)] = 1.0;
    }
    let mut c = vec![0.0; 2 * k + r];
    for j in 0..k {
        c[j] = cost[j];
        c[k + j] = -cost[j];
    }
    let out = solve_standard(&a, t, &c, opts)?;
    let u = (0..k).map(|j| out.x[j] - out.x[k + j]).collect();
    Ok((out.status, u))
}

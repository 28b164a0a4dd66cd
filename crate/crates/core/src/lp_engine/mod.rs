//! Parametric LPs in general and standard form, plus the vertex solver and
//! the lexicographic, multiplicity and degeneracy utilities built on it.
//!
//! A [`StandardFormLP`] reads `max cᵀx  s.t.  Ax = w + Fθ, x ≥ 0`. The solver
//! minimizes `−cᵀx` internally; duals follow `c + Aᵀλ + μ = 0`, `μ ≥ 0`.

pub mod simplex;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse_linalg::{dense_rank, LinalgError, SparseMatrix};
use crate::tol::Tolerances;
use simplex::{solve_standard, SimplexOptions, SimplexStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("format error: {0}")]
    Format(String),
    #[error("[Aᵀ c] does not have full column rank")]
    IllConditioned,
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("auxiliary objective {0} is unbounded")]
    UnboundedAuxiliary(usize),
    #[error("auxiliary objective {0} is linearly dependent on the constraints and earlier objectives")]
    IllPosed(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

/// One constraint row `a·x (≤ or =) w + f·θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub a: Vec<f64>,
    pub w: f64,
    #[serde(default)]
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamLink {
    pub index: usize,
    pub scale: f64,
}

/// Bounds on one variable. With `lo_param` the lower bound is
/// `lo + scale·θ[index]` (with `lo` defaulting to 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarBound {
    pub var: usize,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub lo_param: Option<ParamLink>,
}

/// LP before standardization. Variables without a bound entry are free.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralLP {
    pub sense: Sense,
    pub c: Vec<f64>,
    pub ineq: Vec<ParamRow>,
    pub eq: Vec<ParamRow>,
    pub bounds: Vec<VarBound>,
    pub q: usize,
}

/// What a standard-form column stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    /// Shifted or sign-split part of original variable `var`, entering with `sign`.
    Structural { var: usize, sign: i8 },
    /// Slack of inequality row `row`.
    Slack { row: usize },
    /// Slack of the upper bound of variable `var`.
    BoundSlack { var: usize },
}

/// Affine map `x_orig = R x + r0 + Rθ θ`.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub r: SparseMatrix,
    pub r0: Vec<f64>,
    pub r_theta: DMatrix<f64>,
}

impl Recovery {
    pub fn identity(n: usize, q: usize) -> Self {
        Recovery { r: SparseMatrix::identity(n), r0: vec![0.0; n], r_theta: DMatrix::zeros(n, q) }
    }

    pub fn apply(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mut v = self.r.mul_vec(x);
        for i in 0..v.len() {
            v[i] += self.r0[i];
            for (k, t) in theta.iter().enumerate() {
                v[i] += self.r_theta[(i, k)] * t;
            }
        }
        v
    }

    pub fn n_orig(&self) -> usize {
        self.r.rows()
    }
}

#[derive(Debug, Clone)]
pub struct StandardFormLP {
    pub a: SparseMatrix,
    pub w: Vec<f64>,
    pub f: SparseMatrix,
    /// Maximization-sense cost.
    pub c: Vec<f64>,
    pub recovery: Recovery,
    pub columns: Vec<ColumnKind>,
    /// Column pairs `(positive part, negative part)` of split free variables.
    pub split_pairs: Vec<(usize, usize)>,
    /// Sense of the original objective; the original value is `±(cᵀx) + offset`.
    pub orig_sense: Sense,
    pub obj_offset0: f64,
    pub obj_offset_theta: Vec<f64>,
    a_dense: DMatrix<f64>,
}

impl StandardFormLP {
    /// Wraps data already in standard form; the recovery map is the identity.
    pub fn new(a: SparseMatrix, w: Vec<f64>, f: SparseMatrix, c: Vec<f64>) -> Result<Self, LpError> {
        let n = a.cols();
        let q = f.cols();
        let columns = (0..n).map(|j| ColumnKind::Structural { var: j, sign: 1 }).collect();
        Self::assemble(a, w, f, c, Recovery::identity(n, q), columns, vec![], Sense::Max, 0.0, vec![0.0; q])
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        a: SparseMatrix,
        w: Vec<f64>,
        f: SparseMatrix,
        c: Vec<f64>,
        recovery: Recovery,
        columns: Vec<ColumnKind>,
        split_pairs: Vec<(usize, usize)>,
        orig_sense: Sense,
        obj_offset0: f64,
        obj_offset_theta: Vec<f64>,
    ) -> Result<Self, LpError> {
        let (m, n) = (a.rows(), a.cols());
        if w.len() != m || f.rows() != m || c.len() != n {
            return Err(LpError::Format(format!("A is {}x{}, w has {}, F has {} rows, c has {}", m, n, w.len(), f.rows(), c.len())));
        }
        if m > n {
            return Err(LpError::Format(format!("more rows ({m}) than columns ({n})")));
        }
        let a_dense = a.to_dense();
        let mut g = DMatrix::zeros(m + 1, n);
        g.view_mut((0, 0), (m, n)).copy_from(&a_dense);
        for j in 0..n {
            g[(m, j)] = c[j];
        }
        if dense_rank(&g) != m + 1 {
            return Err(LpError::IllConditioned);
        }
        Ok(StandardFormLP { a, w, f, c, recovery, columns, split_pairs, orig_sense, obj_offset0, obj_offset_theta, a_dense })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn q(&self) -> usize {
        self.f.cols()
    }

    pub fn a_dense(&self) -> &DMatrix<f64> {
        &self.a_dense
    }

    pub fn f_dense(&self) -> DMatrix<f64> {
        self.f.to_dense()
    }

    /// `b = w + Fθ`.
    pub fn rhs(&self, theta: &[f64]) -> Vec<f64> {
        let ft = self.f.mul_vec(theta);
        self.w.iter().zip(ft).map(|(w, v)| w + v).collect()
    }

    /// Objective of the original problem at a standard-form point.
    pub fn original_objective(&self, x: &[f64], theta: &[f64]) -> f64 {
        let v: f64 = self.c.iter().zip(x).map(|(c, x)| c * x).sum();
        let s = if self.orig_sense == Sense::Max { v } else { -v };
        s + self.obj_offset0 + self.obj_offset_theta.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>()
    }

    /// Partner column of a split variable, if any.
    pub fn split_partner(&self, j: usize) -> Option<usize> {
        self.split_pairs.iter().find_map(|&(p, q)| {
            if p == j {
                Some(q)
            } else if q == j {
                Some(p)
            } else {
                None
            }
        })
    }

    /// Maps an auxiliary objective on original variables to the minimized
    /// standard-form cost used by [`lexicographic_solve`]. Like `c`, the
    /// original-space vector is maximized.
    pub fn auxiliary_from_original(&self, d: &[f64]) -> Vec<f64> {
        self.recovery.r.tr_mul_vec(d).into_iter().map(|v| -v).collect()
    }

    /// Inequality rows (of the general form) whose slacks are listed in `zero_set`.
    pub fn active_rows(&self, zero_set: &[usize]) -> Vec<usize> {
        let mut rows: Vec<usize> = zero_set
            .iter()
            .filter_map(|&j| match self.columns[j] {
                ColumnKind::Slack { row } => Some(row),
                _ => None,
            })
            .collect();
        rows.sort_unstable();
        rows
    }
}

pub fn to_standard_form(g: &GeneralLP) -> Result<StandardFormLP, LpError> {
    let n0 = g.c.len();
    let q = g.q;
    for (k, row) in g.ineq.iter().chain(g.eq.iter()).enumerate() {
        if row.a.len() != n0 {
            return Err(LpError::Format(format!("row {k} has {} coefficients, expected {n0}", row.a.len())));
        }
        if !row.f.is_empty() && row.f.len() != q {
            return Err(LpError::Format(format!("row {k} has {} parameter coefficients, expected {q}", row.f.len())));
        }
    }
    let mut lo: Vec<Option<f64>> = vec![None; n0];
    let mut hi: Vec<Option<f64>> = vec![None; n0];
    let mut lo_par: Vec<Option<ParamLink>> = vec![None; n0];
    let mut seen = vec![false; n0];
    for b in &g.bounds {
        if b.var >= n0 {
            return Err(LpError::Format(format!("bound on unknown variable {}", b.var)));
        }
        if seen[b.var] {
            return Err(LpError::Format(format!("variable {} has two bound entries", b.var)));
        }
        seen[b.var] = true;
        if let Some(p) = b.lo_param {
            if p.index >= q {
                return Err(LpError::Format(format!("parameter index {} out of range (q = {q})", p.index)));
            }
            lo[b.var] = Some(b.lo.unwrap_or(0.0));
            lo_par[b.var] = Some(p);
        } else {
            lo[b.var] = b.lo;
        }
        hi[b.var] = b.hi;
        if let (Some(l), Some(h), None) = (b.lo, b.hi, b.lo_param) {
            if l > h {
                return Err(LpError::Format(format!("variable {} has lo > hi", b.var)));
            }
        }
    }

    // Column layout: one primary column per variable, then the negative parts
    // of free variables, then inequality slacks, then upper-bound slacks.
    let free: Vec<usize> = (0..n0).filter(|&i| lo[i].is_none() && hi[i].is_none()).collect();
    let boxed: Vec<usize> = (0..n0).filter(|&i| lo[i].is_some() && hi[i].is_some()).collect();
    let n_ineq = g.ineq.len();
    let n_eq = g.eq.len();
    let n = n0 + free.len() + n_ineq + boxed.len();
    let m = n_ineq + n_eq + boxed.len();

    let mut r_trip = Vec::new();
    let mut r0 = vec![0.0; n0];
    let mut r_theta = DMatrix::zeros(n0, q);
    let mut columns = Vec::with_capacity(n);
    for i in 0..n0 {
        match (lo[i], hi[i]) {
            (None, Some(h)) => {
                r_trip.push((i, i, -1.0));
                r0[i] = h;
                columns.push(ColumnKind::Structural { var: i, sign: -1 });
            }
            (Some(l), _) => {
                r_trip.push((i, i, 1.0));
                r0[i] = l;
                if let Some(p) = lo_par[i] {
                    r_theta[(i, p.index)] = p.scale;
                }
                columns.push(ColumnKind::Structural { var: i, sign: 1 });
            }
            (None, None) => {
                r_trip.push((i, i, 1.0));
                columns.push(ColumnKind::Structural { var: i, sign: 1 });
            }
        }
    }
    let mut split_pairs = Vec::new();
    for (k, &i) in free.iter().enumerate() {
        let col = n0 + k;
        r_trip.push((i, col, -1.0));
        columns.push(ColumnKind::Structural { var: i, sign: -1 });
        split_pairs.push((i, col));
    }
    for row in 0..n_ineq {
        columns.push(ColumnKind::Slack { row });
    }
    for &i in &boxed {
        columns.push(ColumnKind::BoundSlack { var: i });
    }
    let r = SparseMatrix::from_triplets(n0, n, &r_trip)?;
    let rd = r.to_dense();

    let mut a = DMatrix::zeros(m, n);
    let mut w = vec![0.0; m];
    let mut f = DMatrix::zeros(m, q);
    let mut put_row = |ri: usize, row: &ParamRow| {
        for j in 0..n {
            let mut v = 0.0;
            for i in 0..n0 {
                v += row.a[i] * rd[(i, j)];
            }
            a[(ri, j)] = v;
        }
        let ar0: f64 = (0..n0).map(|i| row.a[i] * r0[i]).sum();
        w[ri] = row.w - ar0;
        for k in 0..q {
            let fk = row.f.get(k).copied().unwrap_or(0.0);
            let art: f64 = (0..n0).map(|i| row.a[i] * r_theta[(i, k)]).sum();
            f[(ri, k)] = fk - art;
        }
    };
    for (k, row) in g.ineq.iter().enumerate() {
        put_row(k, row);
    }
    for (k, row) in g.eq.iter().enumerate() {
        put_row(n_ineq + k, row);
    }
    for k in 0..n_ineq {
        a[(k, n0 + free.len() + k)] = 1.0;
    }
    // x = lo(θ) + y with y + s = hi − lo(θ).
    for (k, &i) in boxed.iter().enumerate() {
        let ri = n_ineq + n_eq + k;
        a[(ri, i)] = 1.0;
        a[(ri, n0 + free.len() + n_ineq + k)] = 1.0;
        w[ri] = hi[i].unwrap() - r0[i];
        for p in 0..q {
            f[(ri, p)] = -r_theta[(i, p)];
        }
    }

    let sgn = if g.sense == Sense::Max { 1.0 } else { -1.0 };
    let c: Vec<f64> = (0..n).map(|j| sgn * (0..n0).map(|i| g.c[i] * rd[(i, j)]).sum::<f64>()).collect();
    let off0: f64 = (0..n0).map(|i| g.c[i] * r0[i]).sum();
    let off_t: Vec<f64> = (0..q).map(|k| (0..n0).map(|i| g.c[i] * r_theta[(i, k)]).sum()).collect();

    StandardFormLP::assemble(
        SparseMatrix::from_dense(&a),
        w,
        SparseMatrix::from_dense(&f),
        c,
        Recovery { r, r0, r_theta },
        columns,
        split_pairs,
        g.sense,
        off0,
        off_t,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct VertexSolution {
    pub status: Status,
    pub x: Vec<f64>,
    pub basis: Vec<usize>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// `cᵀx` in the maximization sense.
    pub objective: f64,
}

fn options(tol: &Tolerances) -> SimplexOptions {
    SimplexOptions { max_iter: tol.max_iter, tol_feas: tol.feas, tol_dual: tol.dual }
}

fn to_status(s: SimplexStatus) -> Status {
    match s {
        SimplexStatus::Optimal => Status::Optimal,
        SimplexStatus::Infeasible => Status::Infeasible,
        SimplexStatus::Unbounded => Status::Unbounded,
    }
}

pub fn solve_lp(lp: &StandardFormLP, theta: &[f64], tol: &Tolerances) -> Result<VertexSolution, LpError> {
    if theta.len() != lp.q() {
        return Err(LpError::Format(format!("θ has {} entries, expected {}", theta.len(), lp.q())));
    }
    let b = lp.rhs(theta);
    let cost: Vec<f64> = lp.c.iter().map(|v| -v).collect();
    let out = solve_standard(lp.a_dense(), &b, &cost, &options(tol))?;
    let objective = lp.c.iter().zip(&out.x).map(|(c, x)| c * x).sum();
    Ok(VertexSolution {
        status: to_status(out.status),
        basis: out.basis.iter().flatten().copied().collect(),
        x: out.x,
        lambda: out.y,
        mu: out.reduced,
        objective,
    })
}

/// Solves the primary LP, then each auxiliary cost (minimized) over the
/// optimal set of the levels before it.
pub fn lexicographic_solve(lp: &StandardFormLP, aux: &[Vec<f64>], theta: &[f64], tol: &Tolerances) -> Result<VertexSolution, LpError> {
    Ok(lex_core(lp, aux, theta, tol)?.solution)
}

/// Lexicographic solve followed by a multiplicity check of the last level
/// over the optimal set of all levels.
pub fn lexicographic_multiplicity(
    lp: &StandardFormLP,
    aux: &[Vec<f64>],
    theta: &[f64],
    tol: &Tolerances,
) -> Result<(VertexSolution, Multiplicity), LpError> {
    if aux.is_empty() {
        let sol = solve_lp(lp, theta, tol)?;
        let mult = if sol.status == Status::Optimal { multiplicity_check(lp, &sol, theta, tol)? } else { Multiplicity::Unique };
        return Ok((sol, mult));
    }
    let out = lex_core(lp, aux, theta, tol)?;
    if out.solution.status != Status::Optimal {
        return Ok((out.solution, Multiplicity::Unique));
    }
    let mut rows = out.rows;
    let mut rhs = out.rhs;
    let last = aux.last().unwrap();
    let k = rows.nrows();
    rows = rows.insert_row(k, 0.0);
    for j in 0..lp.n() {
        rows[(k, j)] = last[j];
    }
    rhs.push(last.iter().zip(&out.solution.x).map(|(c, x)| c * x).sum());
    let tz = tol.zero_for(&lp.rhs(theta));
    let mult = face_multiplicity(lp, &rows, &rhs, &out.solution.x, &out.reduced, tz, tol)?;
    Ok((out.solution, mult))
}

struct LexOutcome {
    solution: VertexSolution,
    /// Constraint rows of the last level (objective rows of earlier levels included).
    rows: DMatrix<f64>,
    rhs: Vec<f64>,
    reduced: Vec<f64>,
}

fn lex_core(lp: &StandardFormLP, aux: &[Vec<f64>], theta: &[f64], tol: &Tolerances) -> Result<LexOutcome, LpError> {
    let primary = solve_lp(lp, theta, tol)?;
    if primary.status != Status::Optimal || aux.is_empty() {
        let reduced = primary.mu.clone();
        return Ok(LexOutcome { solution: primary, rows: lp.a_dense().clone(), rhs: lp.rhs(theta), reduced });
    }
    let (m, n) = (lp.m(), lp.n());
    let mut rows = lp.a_dense().clone();
    let mut rhs = lp.rhs(theta);
    let mut prev_cost = lp.c.clone();
    let mut prev_x = primary.x.clone();
    let mut basis = primary.basis.clone();
    let mut reduced = primary.mu.clone();
    let mut stack = rows.clone().insert_row(m, 0.0);
    for j in 0..n {
        stack[(m, j)] = lp.c[j];
    }
    let mut rank = dense_rank(&stack);
    for (level, d) in aux.iter().enumerate() {
        if d.len() != n {
            return Err(LpError::Format(format!("auxiliary cost {level} has length {}, expected {n}", d.len())));
        }
        let r = stack.nrows();
        let mut next = stack.clone().insert_row(r, 0.0);
        for j in 0..n {
            next[(r, j)] = d[j];
        }
        let next_rank = dense_rank(&next);
        if next_rank <= rank {
            return Err(LpError::IllPosed(level));
        }
        stack = next;
        rank = next_rank;

        let k = rows.nrows();
        rows = rows.insert_row(k, 0.0);
        for j in 0..n {
            rows[(k, j)] = prev_cost[j];
        }
        rhs.push(prev_cost.iter().zip(&prev_x).map(|(c, x)| c * x).sum());
        let out = solve_standard(&rows, &rhs, d, &options(tol))?;
        match out.status {
            SimplexStatus::Optimal => {}
            SimplexStatus::Unbounded => return Err(LpError::UnboundedAuxiliary(level)),
            SimplexStatus::Infeasible => return Err(LpError::SolverFailure(format!("auxiliary level {level} lost feasibility"))),
        }
        prev_x = out.x;
        basis = out.basis.iter().flatten().copied().collect();
        reduced = out.reduced;
        prev_cost = d.clone();
    }
    let objective = lp.c.iter().zip(&prev_x).map(|(c, x)| c * x).sum();
    Ok(LexOutcome {
        solution: VertexSolution { status: Status::Optimal, x: prev_x, basis, lambda: primary.lambda, mu: primary.mu, objective },
        rows,
        rhs,
        reduced,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    Unique,
    Multiple,
}

/// Decides whether the optimal face at `theta` holds more than one point of
/// the original variables.
///
/// Candidates are the zero variables with zero reduced cost. One auxiliary LP
/// maximizes their sum over the optimal face. Split free variables are
/// handled apart: moving both parts together never changes the original
/// point, so a split pair at zero is probed with the objectives `±(x⁺ − x⁻)`.
pub fn multiplicity_check(lp: &StandardFormLP, sol: &VertexSolution, theta: &[f64], tol: &Tolerances) -> Result<Multiplicity, LpError> {
    if sol.status != Status::Optimal {
        return Err(LpError::Format("multiplicity check needs an optimal solution".into()));
    }
    let b = lp.rhs(theta);
    let tz = tol.zero_for(&b);
    let m = lp.m();
    let mut rows = lp.a_dense().clone().insert_row(m, 0.0);
    for j in 0..lp.n() {
        rows[(m, j)] = lp.c[j];
    }
    let mut rhs = b;
    rhs.push(sol.objective);
    face_multiplicity(lp, &rows, &rhs, &sol.x, &sol.mu, tz, tol)
}

/// Multiplicity over `{x ≥ 0 : rows·x = rhs}` around the optimal point `x`
/// with reduced costs `reduced`.
fn face_multiplicity(
    lp: &StandardFormLP,
    rows: &DMatrix<f64>,
    rhs: &[f64],
    x: &[f64],
    reduced: &[f64],
    tz: f64,
    tol: &Tolerances,
) -> Result<Multiplicity, LpError> {
    let n = lp.n();
    let zero = |j: usize| x[j] <= tz;
    let z0: Vec<bool> = (0..n).map(|j| zero(j) && reduced[j].abs() <= tol.dual).collect();

    let mut plain = Vec::new();
    let mut pairs = Vec::new();
    for j in 0..n {
        if !z0[j] {
            continue;
        }
        match lp.split_partner(j) {
            None => plain.push(j),
            Some(p) => {
                if zero(p) && z0[p] && j < p {
                    pairs.push((j, p));
                }
            }
        }
    }
    if plain.is_empty() && pairs.is_empty() {
        return Ok(Multiplicity::Unique);
    }
    let opts = options(tol);

    let mut probes: Vec<Vec<f64>> = Vec::new();
    if !plain.is_empty() {
        let mut cst = vec![0.0; n];
        for &j in &plain {
            cst[j] = -1.0;
        }
        probes.push(cst);
    }
    for &(p, q) in &pairs {
        let mut cst = vec![0.0; n];
        cst[p] = -1.0;
        cst[q] = 1.0;
        probes.push(cst.clone());
        probes.push(cst.iter().map(|v| -v).collect());
    }
    for cst in probes {
        let out = solve_standard(rows, rhs, &cst, &opts)?;
        match out.status {
            SimplexStatus::Unbounded => return Ok(Multiplicity::Multiple),
            SimplexStatus::Infeasible => {
                return Err(LpError::SolverFailure("optimal face reported empty".into()));
            }
            SimplexStatus::Optimal => {
                let val: f64 = -cst.iter().zip(&out.x).map(|(c, x)| c * x).sum::<f64>();
                if val > tz {
                    return Ok(Multiplicity::Multiple);
                }
            }
        }
    }
    Ok(Multiplicity::Unique)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyInfo {
    pub bnd: usize,
    pub dim: usize,
    pub sigma: i64,
    pub degenerate: bool,
}

/// `σ = bnd + dim − n`.
pub fn degeneracy_degree(bnd: usize, dim: usize, n: usize) -> DegeneracyInfo {
    let sigma = bnd as i64 + dim as i64 - n as i64;
    DegeneracyInfo { bnd, dim, sigma, degenerate: sigma > 0 }
}

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Every basic feasible solution of `Ax = b, x ≥ 0`, deduplicated.
pub fn enumerate_vertices(a: &DMatrix<f64>, b: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = a.shape();
    let bv = DVector::from_column_slice(b);
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    if m > n {
        return out;
    }
    loop {
        let bm = DMatrix::from_fn(m, m, |i, k| a[(i, idx[k])]);
        if let Some(inv) = bm.clone().try_inverse() {
            if bm.determinant().abs() > 1e-10 {
                let xb = inv * &bv;
                if xb.iter().all(|&v| v >= -1e-9) {
                    let mut x = vec![0.0; n];
                    for k in 0..m {
                        x[idx[k]] = xb[k].max(0.0);
                    }
                    if !out.iter().any(|y| y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-8)) {
                        out.push(x);
                    }
                }
            }
        }
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - m + i {
                idx[i] += 1;
                for k in i + 1..m {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Vertices of `{θ ∈ ℝ² : Mθ ≤ t}` from pairwise row intersections.
pub fn polygon_vertices(mm: &DMatrix<f64>, t: &[f64]) -> Vec<[f64; 2]> {
    let r = mm.nrows();
    let mut out: Vec<[f64; 2]> = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let det = mm[(i, 0)] * mm[(j, 1)] - mm[(i, 1)] * mm[(j, 0)];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (t[i] * mm[(j, 1)] - mm[(i, 1)] * t[j]) / det;
            let y = (mm[(i, 0)] * t[j] - t[i] * mm[(j, 0)]) / det;
            if (0..r).all(|k| mm[(k, 0)] * x + mm[(k, 1)] * y <= t[k] + 1e-9)
                && !out.iter().any(|p| (p[0] - x).abs() < 1e-9 && (p[1] - y).abs() < 1e-9)
            {
                out.push([x, y]);
            }
        }
    }
    out
}

use mplp::face_geometry::HPolyhedron;
use mplp::lp_engine::simplex::{solve_inequality, SimplexOptions, SimplexStatus};
use mplp::lp_engine::{solve_lp, to_standard_form, GeneralLP, ParamRow, Sense, StandardFormLP, Status, VarBound};
use mplp::mpp_core::{CriticalRegion, Partition};
use mplp::sparse_linalg::SparseMatrix;
use mplp::Tolerances;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn uniform_in_box(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect()
}

/// Fraction of box samples outside every region, infeasible piece and
/// unresolved piece.
pub fn uncovered_fraction(p: &Partition, lo: &[f64], hi: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let tol = 1e-9;
    let mut miss = 0;
    for _ in 0..samples {
        let th = uniform_in_box(rng, lo, hi);
        let hit =
            p.regions.iter().any(|r| r.region.contains(&th, tol)) || p.infeasible.iter().chain(&p.unresolved).any(|h| h.contains(&th, tol));
        if !hit {
            miss += 1;
        }
    }
    miss as f64 / samples as f64
}

/// Rejection sample of interior points of `region`, drawn uniformly from its
/// bounding box clipped to `[lo, hi]`.
pub fn interior_samples(region: &HPolyhedron, lo: &[f64], hi: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let q = lo.len();
    let (mut blo, mut bhi) = (lo.to_vec(), hi.to_vec());
    for k in 0..q {
        for sign in [1.0, -1.0] {
            let mut cost = vec![0.0; q];
            cost[k] = sign;
            if let Ok((SimplexStatus::Optimal, u)) = solve_inequality(&cost, &region.m, &region.t, &SimplexOptions::default()) {
                if sign > 0.0 {
                    blo[k] = blo[k].max(u[k]);
                } else {
                    bhi[k] = bhi[k].min(u[k]);
                }
            }
        }
    }
    if (0..q).any(|k| !(blo[k] < bhi[k])) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count {
        tries += 1;
        let th = uniform_in_box(rng, &blo, &bhi);
        if region.contains(&th, -1e-9) {
            out.push(th);
        }
    }
    out
}

/// Worst objective gap and worst primal infeasibility of a region's map
/// against direct solves at interior samples.
pub fn optimality_gap(lp: &StandardFormLP, cr: &CriticalRegion, samples: &[Vec<f64>]) -> (f64, f64) {
    let tol = Tolerances::default();
    let mut gap: f64 = 0.0;
    let mut infeas: f64 = 0.0;
    for th in samples {
        let sol = solve_lp(lp, th, &tol).unwrap();
        assert_eq!(sol.status, Status::Optimal, "direct solve at {th:?}");
        let x = cr.primal(th);
        let z: f64 = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        gap = gap.max((z - sol.objective).abs() / (1.0 + sol.objective.abs()));
        let b = lp.rhs(th);
        let ax = lp.a_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..lp.m() {
            infeas = infeas.max((ax[i] - b[i]).abs());
        }
        for v in &x {
            infeas = infeas.max(-v);
        }
    }
    (gap, infeas)
}

/// Segments shared by two 2-D regions: a row of `a` whose reverse is a row
/// of `b`, clipped to both regions.
pub fn shared_facets(a: &HPolyhedron, b: &HPolyhedron) -> Vec<([f64; 2], [f64; 2])> {
    let an = a.normalized();
    let bn = b.normalized();
    let mut out = Vec::new();
    for i in 0..an.n_rows() {
        let n = an.row(i);
        let t = an.t[i];
        let opposite = (0..bn.n_rows()).any(|k| {
            let r = bn.row(k);
            (r[0] + n[0]).abs() < 1e-7 && (r[1] + n[1]).abs() < 1e-7 && (bn.t[k] + t).abs() < 1e-7
        });
        if !opposite {
            continue;
        }
        // points p0 + s·d on the line nᵀθ = t
        let p0 = [n[0] * t, n[1] * t];
        let d = [-n[1], n[0]];
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for poly in [&an, &bn] {
            for k in 0..poly.n_rows() {
                let r = poly.row(k);
                let rd = r[0] * d[0] + r[1] * d[1];
                let slack = poly.t[k] - (r[0] * p0[0] + r[1] * p0[1]);
                if rd.abs() < 1e-9 {
                    if slack < -1e-7 {
                        hi = lo - 1.0;
                    }
                    continue;
                }
                let s = slack / rd;
                if rd > 0.0 {
                    hi = hi.min(s);
                } else {
                    lo = lo.max(s);
                }
            }
        }
        if hi - lo > 1e-6 {
            out.push(([p0[0] + lo * d[0], p0[1] + lo * d[1]], [p0[0] + hi * d[0], p0[1] + hi * d[1]]));
        }
    }
    out
}

/// Largest difference of the two primal maps over `samples` points of every
/// shared facet, restricted to the `coords` of the original variables.
pub fn facet_jump(lp: &StandardFormLP, p: &Partition, samples: usize, coords: Option<&[usize]>) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut facets = 0;
    for (i, ra) in p.regions.iter().enumerate() {
        for rb in &p.regions[i + 1..] {
            for (s, e) in shared_facets(&ra.region, &rb.region) {
                facets += 1;
                for k in 0..samples {
                    let f = (k as f64 + 0.5) / samples as f64;
                    let th = [s[0] + f * (e[0] - s[0]), s[1] + f * (e[1] - s[1])];
                    worst = worst.max(map_gap(lp, ra, rb, &th, coords));
                }
            }
        }
    }
    (worst, facets)
}

fn map_gap(lp: &StandardFormLP, ra: &CriticalRegion, rb: &CriticalRegion, th: &[f64], coords: Option<&[usize]>) -> f64 {
    let xa = ra.primal_original(lp, th);
    let xb = rb.primal_original(lp, th);
    let idx: Vec<usize> = match coords {
        Some(c) => c.to_vec(),
        None => (0..xa.len()).collect(),
    };
    idx.iter().map(|&j| (xa[j] - xb[j]).abs()).fold(0.0, f64::max)
}

/// Walks `samples` points from `a` to `b`. At every change of containing
/// region the crossing is located by bisection and the two maps compared
/// there. Returns the largest jump and the number of crossings.
pub fn path_jump(lp: &StandardFormLP, p: &Partition, a: &[f64], b: &[f64], samples: usize, coords: Option<&[usize]>) -> (f64, usize) {
    let at = |s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect() };
    let owner = |th: &[f64]| -> Option<usize> { p.regions.iter().position(|r| r.region.contains(th, 1e-9)) };
    let mut worst: f64 = 0.0;
    let mut crossings = 0;
    let mut prev = 0.0;
    let mut cur = owner(&at(0.0)).expect("path start is covered");
    for k in 1..samples {
        let s = k as f64 / (samples - 1) as f64;
        let th = at(s);
        if p.regions[cur].region.contains(&th, 1e-9) {
            prev = s;
            continue;
        }
        let (mut lo, mut hi) = (prev, s);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if p.regions[cur].region.contains(&at(mid), 1e-12) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cross = at(lo);
        for r in &p.regions {
            if r.region.contains(&cross, 1e-7) {
                worst = worst.max(map_gap(lp, &p.regions[cur], r, &cross, coords));
            }
        }
        crossings += 1;
        cur = owner(&th).expect("path point is covered");
        prev = s;
    }
    (worst, crossings)
}

/// Random inequality LP with a few rows repeated verbatim, so every vertex
/// on a repeated row is primal degenerate.
pub fn planted_degenerate(rng: &mut ChaCha8Rng) -> GeneralLP {
    let k = rng.gen_range(2..=8);
    let base_rows = rng.gen_range(k..=14);
    let mut ineq = Vec::new();
    // a positive row keeps the feasible set bounded
    ineq.push(ParamRow { a: (0..k).map(|_| rng.gen_range(0.5..1.5)).collect(), w: rng.gen_range(2.0..4.0), f: vec![-0.5, 0.3] });
    for _ in 1..base_rows {
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        ineq.push(ParamRow { a, w: rng.gen_range(1.0..3.0), f });
    }
    let dups = rng.gen_range(1..=base_rows.min(30 - base_rows));
    for _ in 0..dups {
        let r = ineq[rng.gen_range(0..base_rows)].clone();
        ineq.push(r);
    }
    GeneralLP {
        sense: Sense::Max,
        c: (0..k).map(|_| rng.gen_range(-0.2..1.0)).collect(),
        ineq,
        eq: vec![],
        bounds: (0..k).map(|v| VarBound { var: v, lo: Some(0.0), hi: None, lo_param: None }).collect(),
        q: 2,
    }
}

/// Cost parallel to a random positive row, so that row's facet is optimal.
pub fn planted_multiple(rng: &mut ChaCha8Rng) -> (StandardFormLP, Vec<f64>) {
    let k = rng.gen_range(2..=6);
    let mut ineq = Vec::new();
    let top: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    ineq.push(ParamRow { a: top.clone(), w: 3.0, f: vec![0.2, -0.1] });
    for _ in 0..rng.gen_range(1..6) {
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ineq.push(ParamRow { a, w: rng.gen_range(3.0..6.0), f: vec![rng.gen_range(-0.3..0.3), 0.0] });
    }
    let g = GeneralLP {
        sense: Sense::Max,
        c: top,
        ineq,
        eq: vec![],
        bounds: (0..k).map(|v| VarBound { var: v, lo: Some(0.0), hi: None, lo_param: None }).collect(),
        q: 2,
    };
    (to_standard_form(&g).unwrap(), vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
}

pub fn existential_member(lifted: &HPolyhedron, theta: &[f64]) -> bool {
    let q = theta.len();
    let d = lifted.dim() - q;
    let mm = DMatrix::from_fn(lifted.n_rows(), d, |i, k| lifted.m[(i, q + k)]);
    let t: Vec<f64> = (0..lifted.n_rows()).map(|i| lifted.t[i] - (0..q).map(|k| lifted.m[(i, k)] * theta[k]).sum::<f64>()).collect();
    let (st, _) = solve_inequality(&vec![0.0; d], &mm, &t, &SimplexOptions::default()).unwrap();
    st == SimplexStatus::Optimal
}

/// Random polyhedron in (θ₁, θ₂, y) with d ≤ 2 boxed lifting coordinates.
pub fn random_lifted(rng: &mut ChaCha8Rng) -> HPolyhedron {
    let d = rng.gen_range(1..=2);
    let rows = rng.gen_range(4..=8);
    let mut m = DMatrix::zeros(rows + 2 * d, 2 + d);
    let mut t = vec![0.0; rows + 2 * d];
    for i in 0..rows {
        for k in 0..2 + d {
            m[(i, k)] = rng.gen_range(-1.0..1.0);
        }
        t[i] = rng.gen_range(0.2..1.0);
    }
    for k in 0..d {
        m[(rows + 2 * k, 2 + k)] = 1.0;
        t[rows + 2 * k] = 2.0;
        m[(rows + 2 * k + 1, 2 + k)] = -1.0;
        t[rows + 2 * k + 1] = 2.0;
    }
    HPolyhedron::new(m, t)
}

/// Sparse matrix with independent columns: a shuffled identity block keeps
/// the rank, random sparse fill adds the rest.
pub fn random_full_column_rank(rng: &mut ChaCha8Rng) -> SparseMatrix {
    let cols = rng.gen_range(1..=12);
    let rows = rng.gen_range(cols..=cols + 10);
    let mut dense = DMatrix::zeros(rows, cols);
    let mut perm: Vec<usize> = (0..rows).collect();
    for i in (1..rows).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    for j in 0..cols {
        dense[(perm[j], j)] = rng.gen_range(1.0..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    for i in 0..rows {
        for j in 0..cols {
            if dense[(i, j)] == 0.0 && rng.gen_bool(0.2) {
                dense[(i, j)] = rng.gen_range(-0.5..0.5);
            }
        }
    }
    SparseMatrix::from_dense(&dense)
}

/// Relative Frobenius residuals of the four Moore–Penrose identities.
pub fn penrose_residuals(a: &DMatrix<f64>, p: &DMatrix<f64>) -> [f64; 4] {
    let rel = |x: DMatrix<f64>, y: &DMatrix<f64>| (x - y).norm() / y.norm().max(1.0);
    let ap = a * p;
    let pa = p * a;
    [rel(&ap * a, a), rel(&pa * p, p), rel(ap.transpose(), &ap), rel(pa.transpose(), &pa)]
}

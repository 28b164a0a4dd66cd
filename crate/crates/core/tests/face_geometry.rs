mod common;

use mplp::face_geometry::*;
use mplp::fixtures;
use mplp::lp_engine::{solve_lp, to_standard_form};
use mplp::Tolerances;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn face_at(theta: &[f64]) -> (mplp::lp_engine::StandardFormLP, OptimalFace, Vec<f64>) {
    let lp = to_standard_form(&fixtures::two_by_five()).unwrap();
    let sol = solve_lp(&lp, theta, &tol()).unwrap();
    let face = build_optimal_face(&lp, theta, sol.objective, &sol.x, &tol()).unwrap();
    (lp, face, sol.x)
}

#[test]
fn segment_face_center() {
    let th = [0.25, 0.75];
    let (lp, face, _) = face_at(&th);
    assert_eq!(face.n_x, 1);
    let (xc, r) = chebyshev_center_face(&face, &tol()).unwrap();
    let orig = lp.recovery.apply(&xc, &th);
    assert!((orig[0] - 1.25).abs() < 1e-8 && (orig[1] - 1.5).abs() < 1e-8, "{orig:?}");
    assert!(r > 0.0);
    // The segment's end points are reachable along ℵ.
    let mut ends = Vec::new();
    for s in [-1.0, 1.0] {
        let mut u = vec![0.0; 1];
        let mut lo = 0.0f64;
        let mut hi = 100.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            u[0] = s * mid;
            if face.point(&u).iter().all(|&v| v >= -1e-12) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        u[0] = s * lo;
        ends.push(lp.recovery.apply(&face.point(&u), &th));
    }
    ends.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    assert!((ends[0][0] - 1.0).abs() < 1e-6 && (ends[0][1] - 1.75).abs() < 1e-6, "{ends:?}");
    assert!((ends[1][0] - 1.5).abs() < 1e-6 && (ends[1][1] - 1.25).abs() < 1e-6, "{ends:?}");
}

#[test]
fn unique_optimum_face_is_a_point() {
    let th = [0.25, 0.0];
    let (lp, face, x) = face_at(&th);
    assert_eq!(face.n_x, 0);
    let (xc, r) = chebyshev_center_face(&face, &tol()).unwrap();
    assert_eq!(r, 0.0);
    let a = lp.recovery.apply(&xc, &th);
    let b = lp.recovery.apply(&x, &th);
    assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
    assert!((a[0] - 1.0).abs() < 1e-9 && (a[1] - 1.25).abs() < 1e-9);
}

#[test]
fn face_center_has_canonical_split_pairs() {
    let th = [0.25, 0.75];
    let (lp, face, _) = face_at(&th);
    let (xc, _) = chebyshev_center_face(&face, &tol()).unwrap();
    for &(p, q) in &lp.split_pairs {
        assert!(xc[p] == 0.0 || xc[q] == 0.0);
    }
    for &i in &face.implicit {
        assert_eq!(xc[i], 0.0);
    }
}

fn grid_chebyshev(p: &HPolyhedron, lo: f64, hi: f64, steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            let th = [lo + (hi - lo) * i as f64 / steps as f64, lo + (hi - lo) * j as f64 / steps as f64];
            let d =
                (0..p.n_rows()).map(|r| p.slack(r, &th) / p.row(r).iter().map(|v| v * v).sum::<f64>().sqrt()).fold(f64::INFINITY, f64::min);
            best = best.max(d);
        }
    }
    best
}

#[test]
fn triangle_radius_matches_grid_search() {
    let p = HPolyhedron::new(DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]), vec![0.0, 0.0, 1.0]);
    let (c, r) = chebyshev_center_region(&p, &tol()).unwrap().unwrap();
    let exact = 1.0 / (2.0 + 2f64.sqrt());
    assert!((r - exact).abs() < 1e-10);
    assert!((c[0] - exact).abs() < 1e-10 && (c[1] - exact).abs() < 1e-10);
    let g = grid_chebyshev(&p, 0.0, 1.0, 400);
    assert!(g <= r + 1e-12 && r - g < 5e-3);
}

/// Polygon circumscribed about the unit circle plus rows tangent to a circle
/// of radius 2, which can never touch it.
fn planted_polygon(rng: &mut ChaCha8Rng) -> (HPolyhedron, usize) {
    let k = rng.gen_range(6..=10);
    let base = rng.gen_range(0.0..std::f64::consts::TAU);
    let step = std::f64::consts::TAU / k as f64;
    // gaps stay below 1.4·2π/6 < π/2, so every vertex lies within √2 of the origin
    let angles: Vec<f64> = (0..k).map(|i| base + i as f64 * step + rng.gen_range(-0.2..0.2) * step).collect();
    let facets = angles.len();
    let extra = rng.gen_range(1..=5);
    let mut rows = Vec::new();
    for &ang in &angles {
        rows.push((ang.cos(), ang.sin(), 1.0));
    }
    for _ in 0..extra {
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = rng.gen_range(0.5..3.0);
        rows.push((s * ang.cos(), s * ang.sin(), 2.0 * s));
    }
    // a scaled duplicate of a facet
    let d = rng.gen_range(0..facets);
    rows.push((3.0 * rows[d].0, 3.0 * rows[d].1, 3.0));
    let n = rows.len();
    let mut m = DMatrix::zeros(n, 2);
    let mut t = vec![0.0; n];
    for (i, (x, y, r)) in rows.into_iter().enumerate() {
        m[(i, 0)] = x;
        m[(i, 1)] = y;
        t[i] = r;
    }
    (HPolyhedron::new(m, t), facets)
}

#[test]
fn planted_redundant_rows_are_removed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (p, facets) = planted_polygon(&mut rng);
        let red = remove_redundant(&p, &tol()).unwrap();
        assert_eq!(red.n_rows(), facets);
        let verts = common::polygon_vertices(&red.m, &red.t);
        assert_eq!(verts.len(), facets);
        for _ in 0..1000 {
            let th = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let margin = (0..p.n_rows()).map(|i| p.slack(i, &th).abs()).fold(f64::INFINITY, f64::min);
            if margin < 1e-9 {
                continue;
            }
            assert_eq!(p.contains(&th, 0.0), red.contains(&th, 0.0));
        }
    }
}

#[test]
fn fourier_motzkin_matches_existential_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..8 {
        let lifted = common::random_lifted(&mut rng);
        let proj = project_polyhedron(&lifted, 2, &tol()).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let th = [-2.0 + 4.0 * i as f64 / 19.0, -2.0 + 4.0 * j as f64 / 19.0];
                let inside = common::existential_member(&lifted, &th);
                let viol = proj.violation(&th);
                if viol.abs() < 1e-7 {
                    continue;
                }
                assert_eq!(inside, viol <= 0.0, "θ = {th:?}");
            }
        }
    }
}

#[test]
fn projection_overflow_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows = 40;
    let mut m = DMatrix::zeros(rows, 3);
    for i in 0..rows {
        m[(i, 0)] = rng.gen_range(-1.0..1.0);
        m[(i, 1)] = rng.gen_range(-1.0..1.0);
        m[(i, 2)] = if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    let p = HPolyhedron::new(m, vec![1.0; rows]);
    let small = Tolerances { fm_rows: 100, ..Tolerances::default() };
    assert_eq!(project_polyhedron(&p, 2, &small), Err(GeomError::ProjectionOverflow(100)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn chebyshev_ball_fits(rows in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.1f64..2.0), 3..10)) {
        let mut p = HPolyhedron::from_box(&[-3.0, -3.0], &[3.0, 3.0]);
        for (a, b, t) in &rows {
            p.push_row(&[*a, *b], *t);
        }
        let (c, r) = chebyshev_center_region(&p, &tol()).unwrap().unwrap();
        prop_assert!(r > 0.0);
        for i in 0..p.n_rows() {
            let nrm = p.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm > 0.0 {
                prop_assert!(p.slack(i, &c) / nrm >= r - 1e-8);
            }
        }
    }
}

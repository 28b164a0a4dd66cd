//! Vertices of bounded 2-D polyhedra.

use mplp::face_geometry::HPolyhedron;

/// Vertices of `{θ : Mθ ≤ t}` in counterclockwise order.
pub fn polygon(p: &HPolyhedron) -> Vec<[f64; 2]> {
    let p = p.normalized();
    let r = p.n_rows();
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let (a, b) = (p.row(i), p.row(j));
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (p.t[i] * b[1] - a[1] * p.t[j]) / det;
            let y = (a[0] * p.t[j] - p.t[i] * b[0]) / det;
            if p.contains(&[x, y], 1e-9) && !pts.iter().any(|q| (q[0] - x).abs() < 1e-9 && (q[1] - y).abs() < 1e-9) {
                pts.push([x, y]);
            }
        }
    }
    if pts.len() < 3 {
        return pts;
    }
    let cx = pts.iter().map(|q| q[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|q| q[1]).sum::<f64>() / pts.len() as f64;
    pts.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.total_cmp(&tb)
    });
    pts
}

/// Signed shoelace area; positive for counterclockwise vertices.
pub fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>() / 2.0
}

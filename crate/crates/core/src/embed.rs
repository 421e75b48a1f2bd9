//! Sampled embeddedness: triangle/triangle intersection over a spatial hash.
//!
//! Broad phase: triangle AABBs are binned into a uniform grid; candidate
//! pairs are collected into an ordered set so the outcome is deterministic.
//! Narrow phase: the interval overlap test on the plane intersection line,
//! with a 2D overlap test in the coplanar case (coincident triangles count
//! as intersecting). Triangles sharing a vertex index within one sheet are
//! adjacent and skipped.

use std::collections::{BTreeSet, HashMap};

use crate::mesh::MeshGrid;
use crate::tol;

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    p: [V3; 3],
    grid: u32,
    verts: [u32; 3],
}

impl Tri {
    fn aabb(&self) -> (V3, V3) {
        let mut lo = self.p[0];
        let mut hi = self.p[0];
        for q in &self.p[1..] {
            for k in 0..3 {
                lo[k] = lo[k].min(q[k]);
                hi[k] = hi[k].max(q[k]);
            }
        }
        (lo, hi)
    }

    fn diameter(&self) -> f64 {
        let (lo, hi) = self.aabb();
        norm(sub(hi, lo))
    }
}

/// Outcome of the intersection scan.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddedReport {
    pub embedded: bool,
    /// Number of intersecting non-adjacent triangle pairs found.
    pub intersections: usize,
    pub pairs_tested: usize,
    pub degenerate_skipped: usize,
    pub triangles: usize,
}

use serde::Serialize;

/// Exact-arithmetic-style (epsilon-guarded) triangle/triangle test over all
/// grids, skipping same-sheet neighbours. True means no crossing was found.
pub fn check_embedded(grids: &[&MeshGrid]) -> EmbeddedReport {
    let mut tris: Vec<Tri> = Vec::new();
    let mut degenerate = 0usize;
    for (gi, grid) in grids.iter().enumerate() {
        for t in grid.triangle_indices() {
            let p = [
                grid.points[t[0]].position,
                grid.points[t[1]].position,
                grid.points[t[2]].position,
            ];
            let area = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
            let scale = norm(sub(p[1], p[0])).max(norm(sub(p[2], p[0])));
            if area < tol::DEGENERATE_AREA * scale.max(1.0).powi(2) {
                degenerate += 1;
                continue;
            }
            tris.push(Tri { p, grid: gi as u32, verts: [t[0] as u32, t[1] as u32, t[2] as u32] });
        }
    }

    // Uniform hash grid sized to the mean triangle diameter.
    let mean_diam =
        tris.iter().map(Tri::diameter).sum::<f64>() / tris.len().max(1) as f64;
    let cell = (1.5 * mean_diam).max(f64::MIN_POSITIVE);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut bins: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    for (idx, t) in tris.iter().enumerate() {
        let (lo, hi) = t.aabb();
        for ix in key(lo[0])..=key(hi[0]) {
            for iy in key(lo[1])..=key(hi[1]) {
                for iz in key(lo[2])..=key(hi[2]) {
                    bins.entry((ix, iy, iz)).or_default().push(idx as u32);
                }
            }
        }
    }
    let mut candidates: BTreeSet<(u32, u32)> = BTreeSet::new();
    for ids in bins.values() {
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                candidates.insert((a.min(b), a.max(b)));
            }
        }
    }

    let adjacent = |a: &Tri, b: &Tri| {
        a.grid == b.grid && a.verts.iter().any(|v| b.verts.contains(v))
    };
    let boxes_touch = |a: &Tri, b: &Tri| {
        let (alo, ahi) = a.aabb();
        let (blo, bhi) = b.aabb();
        (0..3).all(|k| ahi[k] >= blo[k] && bhi[k] >= alo[k])
    };

    let mut pairs_tested = 0usize;
    let mut intersections = 0usize;
    for (a, b) in candidates {
        let (ta, tb) = (&tris[a as usize], &tris[b as usize]);
        if adjacent(ta, tb) || !boxes_touch(ta, tb) {
            continue;
        }
        pairs_tested += 1;
        if tri_tri_overlap(&ta.p, &tb.p) {
            intersections += 1;
        }
    }
    EmbeddedReport {
        embedded: intersections == 0,
        intersections,
        pairs_tested,
        degenerate_skipped: degenerate,
        triangles: tris.len(),
    }
}

/// Interval-overlap triangle/triangle intersection test.
fn tri_tri_overlap(p: &[V3; 3], q: &[V3; 3]) -> bool {
    let nq = cross(sub(q[1], q[0]), sub(q[2], q[0]));
    let np = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let scale = norm(nq).max(norm(np));
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let dp: [f64; 3] = std::array::from_fn(|i| dot(sub(p[i], q[0]), nq) / norm(nq).max(1e-300));
    let dq: [f64; 3] = std::array::from_fn(|i| dot(sub(q[i], p[0]), np) / norm(np).max(1e-300));
    let diam = {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            d = d.max(norm(sub(p[i], q[0])));
        }
        d.max(1.0)
    };
    let deps = 1e-12 * diam;
    let _ = eps;

    let all_pos = |d: &[f64; 3]| d.iter().all(|&v| v > deps);
    let all_neg = |d: &[f64; 3]| d.iter().all(|&v| v < -deps);
    if all_pos(&dp) || all_neg(&dp) || all_pos(&dq) || all_neg(&dq) {
        return false;
    }
    let near_zero = |d: &[f64; 3]| d.iter().all(|&v| v.abs() <= deps);
    if near_zero(&dp) || near_zero(&dq) {
        return coplanar_overlap(p, q, nq);
    }

    // Intersection line direction; project on the dominant component.
    let dir = cross(np, nq);
    let axis = if dir[0].abs() >= dir[1].abs() && dir[0].abs() >= dir[2].abs() {
        0
    } else if dir[1].abs() >= dir[2].abs() {
        1
    } else {
        2
    };
    let interval = |t: &[V3; 3], d: &[f64; 3]| -> Option<(f64, f64)> {
        // Two edges cross the plane (mixed signs exist); collect crossings.
        let mut ts: Vec<f64> = Vec::with_capacity(2);
        for i in 0..3 {
            let j = (i + 1) % 3;
            let (di, dj) = (d[i], d[j]);
            if di == 0.0 && dj == 0.0 {
                continue;
            }
            if (di <= 0.0 && dj >= 0.0) || (di >= 0.0 && dj <= 0.0) {
                let denom = di - dj;
                let s = if denom.abs() < 1e-300 { 0.5 } else { di / denom };
                ts.push(t[i][axis] + s * (t[j][axis] - t[i][axis]));
            }
        }
        if ts.len() < 2 {
            return None;
        }
        let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    };
    let (Some((alo, ahi)), Some((blo, bhi))) = (interval(p, &dp), interval(q, &dq)) else {
        return false;
    };
    ahi >= blo && bhi >= alo
}

/// 2D overlap of coplanar triangles, projected onto the dominant axis plane.
fn coplanar_overlap(p: &[V3; 3], q: &[V3; 3], n: V3) -> bool {
    let axis = if n[0].abs() >= n[1].abs() && n[0].abs() >= n[2].abs() {
        0
    } else if n[1].abs() >= n[2].abs() {
        1
    } else {
        2
    };
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let flat = |t: &[V3; 3]| -> [[f64; 2]; 3] { std::array::from_fn(|i| [t[i][u], t[i][v]]) };
    let a = flat(p);
    let b = flat(q);

    let orient = |o: [f64; 2], p1: [f64; 2], p2: [f64; 2]| -> f64 {
        (p1[0] - o[0]) * (p2[1] - o[1]) - (p1[1] - o[1]) * (p2[0] - o[0])
    };
    let seg_cross = |a0: [f64; 2], a1: [f64; 2], b0: [f64; 2], b1: [f64; 2]| -> bool {
        let o1 = orient(a0, a1, b0);
        let o2 = orient(a0, a1, b1);
        let o3 = orient(b0, b1, a0);
        let o4 = orient(b0, b1, a1);
        if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
            && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
        {
            return true;
        }
        false
    };
    for i in 0..3 {
        for j in 0..3 {
            if seg_cross(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    let inside = |pt: [f64; 2], t: &[[f64; 2]; 3]| -> bool {
        let d1 = orient(t[0], t[1], pt);
        let d2 = orient(t[1], t[2], pt);
        let d3 = orient(t[2], t[0], pt);
        let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(has_neg && has_pos)
    };
    inside(a[0], &b) || inside(b[0], &a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::ImmersionPoint;
    use num_complex::Complex64;

    fn grid_from(positions: Vec<[f64; 3]>, nr: usize, nt: usize, sheet: u8) -> MeshGrid {
        MeshGrid {
            r_values: (0..nr).map(|i| 1.0 + i as f64).collect(),
            theta_values: (0..nt).map(|j| j as f64).collect(),
            points: positions
                .into_iter()
                .map(|p| ImmersionPoint { z: Complex64::new(0.0, 0.0), position: p })
                .collect(),
            sheet: Some(sheet),
        }
    }

    #[test]
    fn disjoint_sheets_are_embedded() {
        // Two flat 2x2 patches separated vertically.
        let flat = |h: f64| {
            grid_from(
                vec![
                    [0.0, 0.0, h],
                    [1.0, 0.0, h],
                    [0.0, 1.0, h],
                    [1.0, 1.0, h],
                ],
                2,
                2,
                1,
            )
        };
        let a = flat(0.0);
        let b = flat(1.0);
        let rep = check_embedded(&[&a, &b]);
        assert!(rep.embedded);
        assert_eq!(rep.intersections, 0);
    }

    #[test]
    fn identical_copies_intersect() {
        // The self-overlap sentinel: a grid against an unshifted copy.
        let g = grid_from(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.1], [0.0, 1.0, 0.2], [1.0, 1.0, 0.3]],
            2,
            2,
            1,
        );
        let copy = g.clone();
        let rep = check_embedded(&[&g, &copy]);
        assert!(!rep.embedded);
        assert!(rep.intersections > 0);
    }

    #[test]
    fn crossing_patches_detected() {
        let a = grid_from(
            vec![[-1.0, 0.0, -1.0], [1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [1.0, 0.0, 1.0]],
            2,
            2,
            1,
        );
        let b = grid_from(
            vec![[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            2,
            2,
            2,
        );
        let rep = check_embedded(&[&a, &b]);
        assert!(!rep.embedded);
    }

    #[test]
    fn adjacency_skips_shared_edges() {
        // A single smooth patch never reports its own neighbouring triangles.
        let g = grid_from(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                [0.0, 1.0, 0.1],
                [1.0, 1.0, 0.1],
                [2.0, 1.0, 0.1],
            ],
            2,
            3,
            1,
        );
        let rep = check_embedded(&[&g]);
        assert!(rep.embedded);
    }

    #[test]
    fn helicoid_double_sheet_embedded() {
        use crate::asymptotics::EndAsymptotics;
        use crate::wdata::WeierstrassFamily;
        let ctx = EndAsymptotics::new(&WeierstrassFamily::helicoid(), 400.0).unwrap();
        let rs: Vec<f64> = (0..8).map(|k| 30.0 * (10.0f64).powf(k as f64 / 7.0)).collect();
        let thetas = ctx.theta_window(&rs, 2.0, 48);
        let top = ctx.multigraph_mesh(&rs, &thetas, 1).unwrap();
        let bot = ctx.multigraph_mesh(&rs, &thetas, 2).unwrap();
        let rep = check_embedded(&[&top, &bot]);
        assert!(rep.embedded, "{rep:?}");
        assert!(rep.triangles > 0);
    }
}

//! Mesh container and ASCII OBJ/PLY export.
//!
//! Grids are row major: `points[i * ntheta + j]` is the sample at
//! `(r_values[i], theta_values[j])`. Between grid neighbours each cell is
//! split into two triangles. Output is ASCII so identical grids export to
//! byte-identical files.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::cplx::serde_complex;
use crate::{tol, Error, Result};

/// One sampled point: the domain point and its immersed position.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ImmersionPoint {
    #[serde(with = "serde_complex")]
    pub z: Complex64,
    pub position: [f64; 3],
}

/// A conformally sampled (or multigraph-extracted) grid of immersion points.
#[derive(Debug, Clone)]
pub struct MeshGrid {
    pub r_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    /// Row major, `r_values.len() * theta_values.len()` entries.
    pub points: Vec<ImmersionPoint>,
    /// Branch label 1 or 2 when built from multigraph extraction.
    pub sheet: Option<u8>,
}

impl MeshGrid {
    pub fn nr(&self) -> usize {
        self.r_values.len()
    }

    pub fn ntheta(&self) -> usize {
        self.theta_values.len()
    }

    pub fn point(&self, i: usize, j: usize) -> &ImmersionPoint {
        &self.points[i * self.ntheta() + j]
    }

    /// Vertex-index triples of the triangulation, row major, two per cell.
    pub fn triangle_indices(&self) -> Vec<[usize; 3]> {
        let nt = self.ntheta();
        let mut tris = Vec::with_capacity(2 * (self.nr() - 1) * (nt - 1));
        for i in 0..self.nr() - 1 {
            for j in 0..nt - 1 {
                let a = i * nt + j;
                let b = (i + 1) * nt + j;
                let c = (i + 1) * nt + j + 1;
                let d = i * nt + j + 1;
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
        tris
    }
}

impl Serialize for MeshGrid {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        // Verifier dump: grid axes plus flattened positions.
        let mut st = ser.serialize_struct("MeshGrid", 4)?;
        st.serialize_field("rValues", &self.r_values)?;
        st.serialize_field("thetaValues", &self.theta_values)?;
        st.serialize_field("sheet", &self.sheet)?;
        let positions: Vec<[f64; 3]> = self.points.iter().map(|p| p.position).collect();
        st.serialize_field("positions", &positions)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(Error::RejectedInput(format!("unknown mesh format {other:?}"))),
        }
    }
}

/// Result of an export: the file bytes plus counts for reporting.
#[derive(Debug, Clone)]
pub struct ExportedMesh {
    pub bytes: Vec<u8>,
    pub vertices: usize,
    pub triangles: usize,
    pub degenerate_skipped: usize,
}

fn triangle_area(p: &[f64; 3], q: &[f64; 3], r: &[f64; 3]) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
}

/// Serialize the grid triangulation as ASCII OBJ or PLY. Triangles with area
/// below [`tol::DEGENERATE_AREA`] are skipped and counted. `comments` lines
/// are embedded verbatim (OBJ `#`, PLY `comment`).
pub fn export_mesh(grid: &MeshGrid, format: MeshFormat, comments: &[String]) -> Result<ExportedMesh> {
    if grid.points.is_empty() {
        return Err(Error::RejectedInput("cannot export an empty grid".into()));
    }
    let tris = grid.triangle_indices();
    let mut kept = Vec::with_capacity(tris.len());
    let mut skipped = 0usize;
    for t in tris {
        let area = triangle_area(
            &grid.points[t[0]].position,
            &grid.points[t[1]].position,
            &grid.points[t[2]].position,
        );
        if area < tol::DEGENERATE_AREA {
            skipped += 1;
        } else {
            kept.push(t);
        }
    }

    let mut out = String::new();
    match format {
        MeshFormat::Obj => {
            for line in comments {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
            for p in &grid.points {
                let [x, y, z] = p.position;
                out.push_str(&format!("v {x} {y} {z}\n"));
            }
            for t in &kept {
                out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
            }
        }
        MeshFormat::Ply => {
            out.push_str("ply\nformat ascii 1.0\n");
            for line in comments {
                out.push_str("comment ");
                out.push_str(line);
                out.push('\n');
            }
            out.push_str(&format!("element vertex {}\n", grid.points.len()));
            out.push_str("property double x\nproperty double y\nproperty double z\n");
            out.push_str(&format!("element face {}\n", kept.len()));
            out.push_str("property list uchar int vertex_indices\nend_header\n");
            for p in &grid.points {
                let [x, y, z] = p.position;
                out.push_str(&format!("{x} {y} {z}\n"));
            }
            for t in &kept {
                out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
            }
        }
    }
    Ok(ExportedMesh {
        vertices: grid.points.len(),
        triangles: kept.len(),
        degenerate_skipped: skipped,
        bytes: out.into_bytes(),
    })
}

/// Largest discrete mean-curvature magnitude over interior vertices, via the
/// cotangent formula with barycentric vertex areas. Tends to zero under
/// refinement for meshes of a minimal surface.
pub fn mean_curvature_proxy(grid: &MeshGrid) -> f64 {
    let n = grid.points.len();
    let mut lap = vec![[0.0f64; 3]; n];
    let mut area = vec![0.0f64; n];
    let pos = |k: usize| grid.points[k].position;

    let cot = |a: &[f64; 3], b: &[f64; 3]| {
        // cot of the angle between edge vectors a, b.
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cx = a[1] * b[2] - a[2] * b[1];
        let cy = a[2] * b[0] - a[0] * b[2];
        let cz = a[0] * b[1] - a[1] * b[0];
        let cross = (cx * cx + cy * cy + cz * cz).sqrt();
        if cross <= f64::MIN_POSITIVE {
            0.0
        } else {
            dot / cross
        }
    };
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];

    for t in grid.triangle_indices() {
        let p = [pos(t[0]), pos(t[1]), pos(t[2])];
        let tri_area = triangle_area(&p[0], &p[1], &p[2]);
        for v in 0..3 {
            area[t[v]] += tri_area / 3.0;
            // Opposite edge (v+1, v+2) receives the cot at v.
            let (i, j) = ((v + 1) % 3, (v + 2) % 3);
            let w = 0.5 * cot(&sub(p[i], p[v]), &sub(p[j], p[v]));
            let e = sub(p[j], p[i]);
            for k in 0..3 {
                lap[t[i]][k] += w * e[k];
                lap[t[j]][k] -= w * e[k];
            }
        }
    }

    let nt = grid.ntheta();
    let mut worst = 0.0f64;
    for i in 1..grid.nr() - 1 {
        for j in 1..nt - 1 {
            let k = i * nt + j;
            if area[k] <= f64::MIN_POSITIVE {
                continue;
            }
            let l = lap[k];
            let mag = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt() / (2.0 * area[k]);
            worst = worst.max(mag);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{sample_mesh, MeshParams};
    use crate::wdata::WeierstrassFamily;
    use std::f64::consts::TAU;

    fn helicoid_grid(nr: usize, ntheta: usize) -> MeshGrid {
        let fam = WeierstrassFamily::helicoid();
        sample_mesh(
            &fam,
            &MeshParams { r_min: TAU, r_max: 4.0 * TAU, nr, ntheta, theta_span: TAU },
        )
        .unwrap()
    }

    #[test]
    fn export_counts() {
        let grid = helicoid_grid(4, 8);
        let out = export_mesh(&grid, MeshFormat::Obj, &[]).unwrap();
        assert_eq!(out.vertices, 32);
        assert_eq!(out.triangles, 42);
        assert_eq!(out.degenerate_skipped, 0);
    }

    #[test]
    fn export_deterministic_bytes() {
        let grid = helicoid_grid(4, 8);
        let a = export_mesh(&grid, MeshFormat::Obj, &[]).unwrap();
        let b = export_mesh(&grid, MeshFormat::Obj, &[]).unwrap();
        assert_eq!(a.bytes, b.bytes);
        let p = export_mesh(&grid, MeshFormat::Ply, &[]).unwrap();
        let q = export_mesh(&grid, MeshFormat::Ply, &[]).unwrap();
        assert_eq!(p.bytes, q.bytes);
    }

    #[test]
    fn obj_round_trip_exact() {
        let grid = helicoid_grid(3, 4);
        let out = export_mesh(&grid, MeshFormat::Obj, &[]).unwrap();
        let text = String::from_utf8(out.bytes).unwrap();
        let mut verts = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("v ") {
                let xs: Vec<f64> = rest.split(' ').map(|t| t.parse().unwrap()).collect();
                verts.push([xs[0], xs[1], xs[2]]);
            }
        }
        assert_eq!(verts.len(), grid.points.len());
        // Shortest round-trip float formatting reproduces the exact values.
        for (v, p) in verts.iter().zip(&grid.points) {
            assert_eq!(*v, p.position);
        }
    }

    #[test]
    fn degenerate_triangles_skipped() {
        let mut grid = helicoid_grid(2, 3);
        for p in &mut grid.points {
            p.position = [0.0, 0.0, 0.0];
        }
        let out = export_mesh(&grid, MeshFormat::Obj, &[]).unwrap();
        assert_eq!(out.triangles, 0);
        assert_eq!(out.degenerate_skipped, 4);
    }

    #[test]
    fn mean_curvature_decreases_under_refinement() {
        // A patch with moderate |Im z| keeps positions O(1); sinh-scale
        // vertices would drown the estimator in cancellation noise.
        let patch = |nr: usize, nt: usize| {
            let fam = WeierstrassFamily::helicoid();
            sample_mesh(
                &fam,
                &MeshParams { r_min: 6.0, r_max: 10.0, nr, ntheta: nt, theta_span: 0.25 },
            )
            .unwrap()
        };
        let coarse = mean_curvature_proxy(&patch(6, 6));
        let mid = mean_curvature_proxy(&patch(12, 12));
        let fine = mean_curvature_proxy(&patch(24, 24));
        assert!(mid < coarse, "{mid} !< {coarse}");
        assert!(fine < mid, "{fine} !< {mid}");
    }
}

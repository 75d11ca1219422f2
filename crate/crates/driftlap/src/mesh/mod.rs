//! Closed triangulated surfaces: generation, validation, and per-triangle
//! geometry.
//!
//! Two geometry backends exist. `Embedded3D` stores vertex positions in
//! 3-space (spheres, OFF files). `Periodic2D` stores parameter coordinates
//! on a flat rectangle with periodic identification: the flat torus has no
//! isometric embedding in 3-space, so its metric lives in the chart and
//! every triangle is unwrapped to the representative within half a period.

mod icosphere;
mod off;
mod torus;

pub use icosphere::generate_icosphere;
pub use off::{load_off, load_off_path, save_off, save_off_path};
pub use torus::generate_flat_torus;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::num::{real, Real};

/// Triangle areas below this (in squared mesh units) count as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Maximum icosphere subdivision depth accepted by the generator.
pub const MAX_SUBDIVISIONS: u32 = 8;

#[derive(Debug, Clone)]
pub enum MeshGeometry<T> {
    /// Vertex positions in 3-space.
    Embedded3D { positions: Vec<[T; 3]> },
    /// Parameter coordinates on a `[0, Lu) x [0, Lv)` rectangle with
    /// periodic identification and the flat metric.
    Periodic2D {
        params: Vec<[T; 2]>,
        period_u: T,
        period_v: T,
    },
}

impl<T: Real> MeshGeometry<T> {
    pub fn vertex_count(&self) -> usize {
        match self {
            MeshGeometry::Embedded3D { positions } => positions.len(),
            MeshGeometry::Periodic2D { params, .. } => params.len(),
        }
    }
}

/// Immutable closed-surface triangulation.
#[derive(Debug, Clone)]
pub struct TriangleMesh<T> {
    geometry: MeshGeometry<T>,
    triangles: Vec<[usize; 3]>,
}

/// Everything `validate` reports. Problems are reported, never thrown.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDiagnostics<T> {
    pub is_closed: bool,
    pub is_oriented: bool,
    pub euler_characteristic: i64,
    pub min_triangle_area: T,
    pub min_angle: T,
    /// Edges not shared by exactly two triangles.
    pub boundary_edge_count: usize,
}

/// Per-triangle metric data used by assembly and gradients.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry<T> {
    pub area: T,
    /// Cotangent of the interior angle at each corner, in corner order.
    pub cotangents: [T; 3],
    /// Isometric planar layout of the three corners.
    pub local_frame: [[T; 2]; 3],
}

impl<T: Real> TriangleMesh<T> {
    /// Structural construction checks only; topology and geometry quality
    /// are the business of [`TriangleMesh::validate`].
    pub fn new(geometry: MeshGeometry<T>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = geometry.vertex_count();
        if n < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        match &geometry {
            MeshGeometry::Embedded3D { positions } => {
                for (i, p) in positions.iter().enumerate() {
                    if !p.iter().all(|c| c.is_finite()) {
                        return Err(Error::InvalidMesh(format!(
                            "vertex {i} has non-finite coordinates"
                        )));
                    }
                }
            }
            MeshGeometry::Periodic2D {
                params,
                period_u,
                period_v,
            } => {
                if !(*period_u > T::zero() && *period_v > T::zero()) {
                    return Err(Error::InvalidMesh("periods must be positive".into()));
                }
                for (i, p) in params.iter().enumerate() {
                    if !p.iter().all(|c| c.is_finite()) {
                        return Err(Error::InvalidMesh(format!(
                            "vertex {i} has non-finite parameters"
                        )));
                    }
                }
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} repeats a vertex index"
                )));
            }
            for &v in tri {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references vertex {v} of {n}"
                    )));
                }
            }
        }
        Ok(TriangleMesh {
            geometry,
            triangles,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.geometry.vertex_count()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn geometry(&self) -> &MeshGeometry<T> {
        &self.geometry
    }

    /// Vertex position for embedded meshes.
    pub fn position(&self, i: usize) -> Option<[T; 3]> {
        match &self.geometry {
            MeshGeometry::Embedded3D { positions } => positions.get(i).copied(),
            MeshGeometry::Periodic2D { .. } => None,
        }
    }

    /// Parameter coordinates for periodic meshes.
    pub fn param(&self, i: usize) -> Option<[T; 2]> {
        match &self.geometry {
            MeshGeometry::Periodic2D { params, .. } => params.get(i).copied(),
            MeshGeometry::Embedded3D { .. } => None,
        }
    }

    /// Area, interior-angle cotangents, and an isometric planar layout of
    /// triangle `index`.
    pub fn triangle_geometry(&self, index: usize) -> Result<TriangleGeometry<T>> {
        if index >= self.triangles.len() {
            return Err(Error::TriangleIndexOutOfRange {
                index,
                count: self.triangles.len(),
            });
        }
        let frame = self.corner_frame(index);
        let geo = frame_geometry(&frame);
        if geo.area <= real(DEGENERATE_AREA) {
            return Err(Error::DegenerateTriangle {
                index,
                area: geo.area.to_f64().unwrap_or(f64::NAN),
                threshold: DEGENERATE_AREA,
            });
        }
        Ok(geo)
    }

    /// Planar corner layout; never fails, degenerate triangles collapse.
    fn corner_frame(&self, index: usize) -> [[T; 2]; 3] {
        let [a, b, c] = self.triangles[index];
        match &self.geometry {
            MeshGeometry::Embedded3D { positions } => {
                let (p0, p1, p2) = (positions[a], positions[b], positions[c]);
                let e1 = sub3(p1, p0);
                let e2 = sub3(p2, p0);
                let len1 = norm3(e1);
                if len1 <= T::zero() {
                    return [[T::zero(); 2]; 3];
                }
                let ex = [e1[0] / len1, e1[1] / len1, e1[2] / len1];
                let proj = dot3(e2, ex);
                let ortho = [
                    e2[0] - proj * ex[0],
                    e2[1] - proj * ex[1],
                    e2[2] - proj * ex[2],
                ];
                let h = norm3(ortho);
                [[T::zero(), T::zero()], [len1, T::zero()], [proj, h]]
            }
            MeshGeometry::Periodic2D {
                params,
                period_u,
                period_v,
            } => {
                let (p0, p1, p2) = (params[a], params[b], params[c]);
                let d1 = [
                    wrap_delta(p1[0] - p0[0], *period_u),
                    wrap_delta(p1[1] - p0[1], *period_v),
                ];
                let d2 = [
                    wrap_delta(p2[0] - p0[0], *period_u),
                    wrap_delta(p2[1] - p0[1], *period_v),
                ];
                [[T::zero(), T::zero()], d1, d2]
            }
        }
    }

    /// Sum of all triangle areas (degenerate triangles contribute their raw
    /// near-zero area).
    pub fn total_area(&self) -> T {
        (0..self.triangles.len())
            .map(|t| frame_geometry(&self.corner_frame(t)).area)
            .fold(T::zero(), |a, b| a + b)
    }

    /// Full diagnostic sweep; reports problems instead of failing.
    pub fn validate(&self) -> MeshDiagnostics<T> {
        // per undirected edge: traversal counts in each direction
        let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let from = tri[k];
                let to = tri[(k + 1) % 3];
                let entry = edges.entry((from.min(to), from.max(to))).or_insert((0, 0));
                if from < to {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        let boundary_edge_count = edges.values().filter(|&&(f, b)| f + b != 2).count();
        let is_oriented = edges.values().all(|&(f, b)| f <= 1 && b <= 1);
        let euler_characteristic =
            self.vertex_count() as i64 - edges.len() as i64 + self.triangles.len() as i64;

        let mut min_triangle_area = T::infinity();
        let mut min_angle = T::infinity();
        for t in 0..self.triangles.len() {
            let frame = self.corner_frame(t);
            let geo = frame_geometry(&frame);
            min_triangle_area = min_triangle_area.min(geo.area);
            for corner in 0..3 {
                min_angle = min_angle.min(corner_angle(&frame, corner));
            }
        }

        MeshDiagnostics {
            is_closed: boundary_edge_count == 0,
            is_oriented,
            euler_characteristic,
            min_triangle_area,
            min_angle,
            boundary_edge_count,
        }
    }
}

/// Signed displacement folded to the representative within half a period.
fn wrap_delta<T: Real>(dx: T, period: T) -> T {
    dx - period * (dx / period).round()
}

fn frame_geometry<T: Real>(frame: &[[T; 2]; 3]) -> TriangleGeometry<T> {
    let half = real::<T>(0.5);
    let e1 = sub2(frame[1], frame[0]);
    let e2 = sub2(frame[2], frame[0]);
    let cross = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let area = half * cross;
    let mut cotangents = [T::zero(); 3];
    if cross > T::zero() {
        for corner in 0..3 {
            let a = sub2(frame[(corner + 1) % 3], frame[corner]);
            let b = sub2(frame[(corner + 2) % 3], frame[corner]);
            cotangents[corner] = (a[0] * b[0] + a[1] * b[1]) / cross;
        }
    }
    TriangleGeometry {
        area,
        cotangents,
        local_frame: *frame,
    }
}

fn corner_angle<T: Real>(frame: &[[T; 2]; 3], corner: usize) -> T {
    let a = sub2(frame[(corner + 1) % 3], frame[corner]);
    let b = sub2(frame[(corner + 2) % 3], frame[corner]);
    let cross = (a[0] * b[1] - a[1] * b[0]).abs();
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.atan2(dot)
}

fn sub2<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3<T: Real>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}

/// A regular tetrahedron with unit-ish edge length; the smallest closed
/// triangulation, handy in tests.
pub fn tetrahedron<T: Real>() -> TriangleMesh<T> {
    let s = real::<T>(1.0);
    let positions = vec![
        [s, s, s],
        [s, -s, -s],
        [-s, s, -s],
        [-s, -s, s],
    ];
    let triangles = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
    TriangleMesh::new(MeshGeometry::Embedded3D { positions }, triangles)
        .expect("tetrahedron is structurally valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron_is_closed_and_oriented() {
        let mesh = tetrahedron::<f64>();
        let d = mesh.validate();
        assert!(d.is_closed);
        assert!(d.is_oriented);
        assert_eq!(d.euler_characteristic, 2);
        assert_eq!(d.boundary_edge_count, 0);
    }

    #[test]
    fn open_tetrahedron_reports_boundary() {
        let mesh = tetrahedron::<f64>();
        let open = TriangleMesh::new(mesh.geometry().clone(), mesh.triangles()[..3].to_vec())
            .unwrap();
        let d = open.validate();
        assert!(!d.is_closed);
        assert_eq!(d.boundary_edge_count, 3);
    }

    #[test]
    fn flipped_triangle_breaks_orientation() {
        let mesh = tetrahedron::<f64>();
        let mut tris = mesh.triangles().to_vec();
        tris[0].swap(1, 2);
        let flipped = TriangleMesh::new(mesh.geometry().clone(), tris).unwrap();
        let d = flipped.validate();
        assert!(d.is_closed);
        assert!(!d.is_oriented);
    }

    #[test]
    fn right_isoceles_geometry() {
        let positions = vec![
            [0.0f64, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [5.0, 5.0, 5.0],
        ];
        let mesh = TriangleMesh::new(
            MeshGeometry::Embedded3D { positions },
            vec![[0, 1, 2], [3, 1, 2]],
        )
        .unwrap();
        let g = mesh.triangle_geometry(0).unwrap();
        assert!((g.area - 0.5).abs() < 1e-15);
        // right angle at corner 0, 45 degrees at corners 1 and 2
        assert!(g.cotangents[0].abs() < 1e-15);
        assert!((g.cotangents[1] - 1.0).abs() < 1e-15);
        assert!((g.cotangents[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equilateral_geometry() {
        let h = 3.0f64.sqrt() / 2.0;
        let positions = vec![[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.5, h, 1.0], [9.0, 9.0, 9.0]];
        let mesh = TriangleMesh::new(
            MeshGeometry::Embedded3D { positions },
            vec![[0, 1, 2], [3, 1, 2]],
        )
        .unwrap();
        let g = mesh.triangle_geometry(0).unwrap();
        assert!((g.area - 3.0f64.sqrt() / 4.0).abs() < 1e-14);
        let expected = 1.0 / 3.0f64.sqrt();
        for c in g.cotangents {
            assert!((c - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_triangle_is_an_error() {
        let positions = vec![
            [0.0f64, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ];
        let mesh = TriangleMesh::new(
            MeshGeometry::Embedded3D { positions },
            vec![[0, 1, 2], [0, 1, 3]],
        )
        .unwrap();
        assert!(matches!(
            mesh.triangle_geometry(0),
            Err(Error::DegenerateTriangle { index: 0, .. })
        ));
        assert!(mesh.triangle_geometry(1).is_ok());
    }

    #[test]
    fn cotangent_identity_holds() {
        // cot a cot b + cot b cot c + cot c cot a = 1 for angles summing to pi
        let meshes = [
            tetrahedron::<f64>(),
            crate::mesh::generate_icosphere(2, 1.3).unwrap(),
            crate::mesh::generate_flat_torus(5, 6, 2.0, 3.0).unwrap(),
        ];
        for mesh in &meshes {
            for t in 0..mesh.triangle_count() {
                let g = mesh.triangle_geometry(t).unwrap();
                let [ca, cb, cc] = g.cotangents;
                assert!((ca * cb + cb * cc + cc * ca - 1.0).abs() < 1e-9);
            }
        }
    }
}

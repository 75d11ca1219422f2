//! Icosphere generation: midpoint subdivision of the icosahedron followed
//! by radial projection. Second-order accurate and keeps the icosahedral
//! symmetry group, so low spherical-harmonic eigenspaces stay exactly
//! degenerate on the discrete mesh.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{MeshGeometry, TriangleMesh, MAX_SUBDIVISIONS};
use crate::num::{real, Real};

/// Sphere of the given radius with `10 * 4^subdivisions + 2` vertices.
pub fn generate_icosphere<T: Real>(subdivisions: u32, radius: T) -> Result<TriangleMesh<T>> {
    if subdivisions > MAX_SUBDIVISIONS {
        return Err(Error::SubdivisionLimit {
            requested: subdivisions,
            limit: MAX_SUBDIVISIONS,
        });
    }
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "icosphere radius must be positive and finite, got {radius}"
        )));
    }

    let phi = (T::one() + real::<T>(5.0).sqrt()) / real(2.0);
    let one = T::one();
    let zero = T::zero();
    let mut positions: Vec<[T; 3]> = vec![
        [-one, phi, zero],
        [one, phi, zero],
        [-one, -phi, zero],
        [one, -phi, zero],
        [zero, -one, phi],
        [zero, one, phi],
        [zero, -one, -phi],
        [zero, one, -phi],
        [phi, zero, -one],
        [phi, zero, one],
        [-phi, zero, -one],
        [-phi, zero, one],
    ];
    for p in positions.iter_mut() {
        *p = project(*p, radius);
    }
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next: Vec<[usize; 3]> = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = edge_midpoint(a, b, &mut positions, &mut midpoint, radius);
            let bc = edge_midpoint(b, c, &mut positions, &mut midpoint, radius);
            let ca = edge_midpoint(c, a, &mut positions, &mut midpoint, radius);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }

    TriangleMesh::new(MeshGeometry::Embedded3D { positions }, triangles)
}

fn edge_midpoint<T: Real>(
    a: usize,
    b: usize,
    positions: &mut Vec<[T; 3]>,
    cache: &mut HashMap<(usize, usize), usize>,
    radius: T,
) -> usize {
    let key = (a.min(b), a.max(b));
    if let Some(&idx) = cache.get(&key) {
        return idx;
    }
    let half = real::<T>(0.5);
    let pa = positions[a];
    let pb = positions[b];
    let mid = [
        (pa[0] + pb[0]) * half,
        (pa[1] + pb[1]) * half,
        (pa[2] + pb[2]) * half,
    ];
    let idx = positions.len();
    positions.push(project(mid, radius));
    cache.insert(key, idx);
    idx
}

fn project<T: Real>(p: [T; 3], radius: T) -> [T; 3] {
    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let s = radius / norm;
    [p[0] * s, p[1] * s, p[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_counts() {
        let mesh = generate_icosphere::<f64>(0, 1.0).unwrap();
        assert_eq!(mesh.vertex_count(), 12);
        assert_eq!(mesh.triangle_count(), 20);
    }

    #[test]
    fn vertex_count_formula() {
        // V = 10 * 4^s + 2, checked by explicit subdivision
        for s in 0..=3u32 {
            let mesh = generate_icosphere::<f64>(s, 1.0).unwrap();
            assert_eq!(mesh.vertex_count(), 10 * 4usize.pow(s) + 2);
            assert_eq!(mesh.triangle_count(), 20 * 4usize.pow(s));
        }
        let mesh = generate_icosphere::<f64>(2, 1.0).unwrap();
        assert_eq!(mesh.vertex_count(), 162);
        assert_eq!(mesh.triangle_count(), 320);
    }

    #[test]
    fn radial_projection() {
        let mesh = generate_icosphere::<f64>(1, 2.0).unwrap();
        for i in 0..mesh.vertex_count() {
            let p = mesh.position(i).unwrap();
            let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((norm - 2.0).abs() < 1e-12, "vertex {i} norm {norm}");
        }
    }

    #[test]
    fn subdivision_guard() {
        assert!(matches!(
            generate_icosphere::<f64>(9, 1.0),
            Err(Error::SubdivisionLimit {
                requested: 9,
                limit: 8
            })
        ));
    }

    #[test]
    fn bad_radius_rejected() {
        assert!(generate_icosphere::<f64>(1, 0.0).is_err());
        assert!(generate_icosphere::<f64>(1, -2.0).is_err());
    }

    #[test]
    fn topology_is_spherical_up_to_the_guard() {
        for s in 0..=MAX_SUBDIVISIONS {
            let mesh = generate_icosphere::<f64>(s, 1.0).unwrap();
            let d = mesh.validate();
            assert!(d.is_closed, "subdivision {s}");
            assert!(d.is_oriented, "subdivision {s}");
            assert_eq!(d.euler_characteristic, 2, "subdivision {s}");
        }
    }

    #[test]
    fn area_converges_to_sphere_area_from_below() {
        let target = 4.0 * std::f64::consts::PI;
        let mut deficits = Vec::new();
        for s in 0..=5u32 {
            let mesh = generate_icosphere::<f64>(s, 1.0).unwrap();
            let area = mesh.total_area();
            assert!(area < target, "subdivision {s}: {area}");
            deficits.push(target - area);
        }
        for (i, w) in deficits.windows(2).enumerate() {
            assert!(w[0] > w[1]);
            // the icosahedron itself (level 0 -> 1) is pre-asymptotic
            if i >= 1 {
                let ratio = w[0] / w[1];
                assert!(
                    (3.5..=4.5).contains(&ratio),
                    "deficit ratio {ratio} outside second-order window"
                );
            }
        }
    }
}

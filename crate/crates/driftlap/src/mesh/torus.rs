//! Flat torus triangulation on a periodic parameter grid.

use crate::error::{Error, Result};
use crate::mesh::{MeshGeometry, TriangleMesh};
use crate::num::{real_from_usize, Real};

/// `nu x nv` periodic grid on a `Lu x Lv` rectangle, each quad split into
/// two triangles. Grids below 3x3 would wrap an edge onto itself.
pub fn generate_flat_torus<T: Real>(
    nu: usize,
    nv: usize,
    period_u: T,
    period_v: T,
) -> Result<TriangleMesh<T>> {
    if nu < 3 || nv < 3 {
        return Err(Error::InvalidGrid { nu, nv });
    }
    if !(period_u > T::zero() && period_v > T::zero())
        || !period_u.is_finite()
        || !period_v.is_finite()
    {
        return Err(Error::InvalidParameter(
            "torus periods must be positive and finite".into(),
        ));
    }

    let du = period_u / real_from_usize(nu);
    let dv = period_v / real_from_usize(nv);
    let mut params = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            params.push([du * real_from_usize(i), dv * real_from_usize(j)]);
        }
    }

    let idx = |i: usize, j: usize| (j % nv) * nu + (i % nu);
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    TriangleMesh::new(
        MeshGeometry::Periodic2D {
            params,
            period_u,
            period_v,
        },
        triangles,
    )
}

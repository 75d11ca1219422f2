//! Discrete drifting Laplacian under the weighted measure `e^{-f} dv`.
//!
//! Assembly produces the pair `(S, M)`: `S` is the cotangent stiffness with
//! each triangle's contribution scaled by the triangle weight
//! `w_T = (e^{-f(v1)} + e^{-f(v2)} + e^{-f(v3)}) / 3`, and `M` is the lumped
//! (diagonal) mass assigning each vertex a third of its incident weighted
//! areas. Then `x^T S y` approximates the weighted Dirichlet pairing and
//! `x^T M y` the weighted L2 pairing, and `S u = lambda M u` discretizes the
//! eigenvalue problem of the drifting Laplacian.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::vec_ops::{dot, dot_weighted};
use crate::linalg::CsrMatrix;
use crate::mesh::TriangleMesh;
use crate::num::{real, Real};

/// Per-vertex values of the drift function `f`.
#[derive(Debug, Clone)]
pub struct Potential<T> {
    values: Vec<T>,
    descriptor: Option<String>,
}

impl<T: Real> Potential<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("potential value at vertex {i}")));
        }
        Ok(Potential {
            values,
            descriptor: None,
        })
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.descriptor = Some(descriptor.into());
        self
    }

    pub fn zero(vertex_count: usize) -> Self {
        Potential {
            values: vec![T::zero(); vertex_count],
            descriptor: Some("zero".into()),
        }
    }

    pub fn constant(vertex_count: usize, c: T) -> Result<Self> {
        Potential::new(vec![c; vertex_count])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn descriptor(&self) -> Option<&str> {
        self.descriptor.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Assembled `(S, M)` pair together with the mesh and potential it came from.
#[derive(Debug, Clone)]
pub struct WeightedOperator<T> {
    stiffness: CsrMatrix<T>,
    mass: Vec<T>,
    mesh: Arc<TriangleMesh<T>>,
    potential: Potential<T>,
    /// Cached per-triangle weights `w_T`, reused by the energy quadrature.
    triangle_weights: Vec<T>,
    /// Cached `w_T * area_T` quadrature coefficients.
    weighted_areas: Vec<T>,
}

impl<T: Real> WeightedOperator<T> {
    /// Cotangent assembly under `e^{-f} dv`.
    ///
    /// Refuses meshes that are not closed and consistently oriented, and
    /// potentials whose exponential weights overflow or vanish.
    pub fn assemble(mesh: Arc<TriangleMesh<T>>, potential: Potential<T>) -> Result<Self> {
        let n = mesh.vertex_count();
        if potential.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: potential.len(),
            });
        }
        let diagnostics = mesh.validate();
        if !diagnostics.is_closed {
            return Err(Error::AssemblyRefused(format!(
                "mesh is not closed ({} boundary edges)",
                diagnostics.boundary_edge_count
            )));
        }
        if !diagnostics.is_oriented {
            return Err(Error::AssemblyRefused(
                "mesh orientation is not globally consistent".into(),
            ));
        }

        let weights: Vec<T> = potential.values().iter().map(|&f| (-f).exp()).collect();
        if let Some(i) = weights
            .iter()
            .position(|w| !w.is_finite() || *w <= T::zero())
        {
            return Err(Error::NonFinite(format!(
                "weight e^(-f) at vertex {i} (potential {})",
                potential.values()[i]
            )));
        }

        let third = T::one() / real(3.0);
        let half = real::<T>(0.5);
        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(mesh.triangle_count() * 9);
        let mut mass = vec![T::zero(); n];
        let mut triangle_weights = Vec::with_capacity(mesh.triangle_count());
        let mut weighted_areas = Vec::with_capacity(mesh.triangle_count());

        for t in 0..mesh.triangle_count() {
            let tri = mesh.triangles()[t];
            let geo = mesh.triangle_geometry(t)?;
            let w_t = (weights[tri[0]] + weights[tri[1]] + weights[tri[2]]) * third;
            triangle_weights.push(w_t);
            weighted_areas.push(w_t * geo.area);

            // cotangent element: edge (i,j) opposite corner k gets -cot(k)/2
            for corner in 0..3 {
                let i = tri[(corner + 1) % 3];
                let j = tri[(corner + 2) % 3];
                let coeff = w_t * half * geo.cotangents[corner];
                triplets.push((i, j, -coeff));
                triplets.push((j, i, -coeff));
                triplets.push((i, i, coeff));
                triplets.push((j, j, coeff));
            }

            let share = w_t * geo.area * third;
            for &v in &tri {
                mass[v] += share;
            }
        }

        let stiffness = CsrMatrix::from_triplets(n, n, &triplets);
        if mass.iter().any(|&m| !(m > T::zero()) || !m.is_finite()) {
            return Err(Error::NonFinite("lumped mass entry".into()));
        }

        Ok(WeightedOperator {
            stiffness,
            mass,
            mesh,
            potential,
            triangle_weights,
            weighted_areas,
        })
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    /// Diagonal of the lumped mass matrix.
    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh<T>> {
        &self.mesh
    }

    pub fn potential(&self) -> &Potential<T> {
        &self.potential
    }

    pub fn vertex_count(&self) -> usize {
        self.mass.len()
    }

    pub fn triangle_weights(&self) -> &[T] {
        &self.triangle_weights
    }

    /// Total weighted area, equal to the trace of `M`.
    pub fn total_weighted_area(&self) -> T {
        self.mass.iter().fold(T::zero(), |a, &b| a + b)
    }

    fn check_len(&self, u: &[T]) -> Result<()> {
        if u.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `L_f u = -M^{-1} S u`, the discrete drifting Laplacian applied to `u`.
    pub fn apply_drifting_laplacian(&self, u: &[T]) -> Result<Vec<T>> {
        self.check_len(u)?;
        let mut y = self.stiffness.matvec(u);
        for (yi, &mi) in y.iter_mut().zip(&self.mass) {
            *yi = -*yi / mi;
        }
        Ok(y)
    }

    /// Weighted gradient energy `E_p(u) = sum_T w_T area_T |grad u|_T^p`.
    ///
    /// The piecewise-linear gradient is constant per triangle, so this
    /// quadrature is exact for the discrete solution; for `p = 2` it agrees
    /// with `u^T S u` to roundoff.
    pub fn energy(&self, u: &[T], p: T) -> Result<T> {
        let norms = gradient_norms(&self.mesh, u)?;
        self.energy_from_norms(&norms, p)
    }

    /// Several exponents from one gradient evaluation.
    pub fn energies(&self, u: &[T], p_list: &[T]) -> Result<Vec<T>> {
        let norms = gradient_norms(&self.mesh, u)?;
        p_list
            .iter()
            .map(|&p| self.energy_from_norms(&norms, p))
            .collect()
    }

    fn energy_from_norms(&self, norms: &[T], p: T) -> Result<T> {
        if !(p >= T::one()) {
            return Err(Error::InvalidExponent {
                p: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        let two = real::<T>(2.0);
        let mut total = T::zero();
        for (t, &g) in norms.iter().enumerate() {
            let pw = if p == two { g * g } else { g.powf(p) };
            total += self.weighted_areas[t] * pw;
        }
        Ok(total)
    }

    /// `(1^T M u) / (1^T M 1)`.
    pub fn weighted_mean(&self, u: &[T]) -> Result<T> {
        self.check_len(u)?;
        let num = dot(&self.mass, u);
        Ok(num / self.total_weighted_area())
    }

    /// `u^T M u`.
    pub fn weighted_l2_sq(&self, u: &[T]) -> Result<T> {
        self.check_len(u)?;
        Ok(dot_weighted(u, &self.mass, u))
    }

    /// `u` minus its weighted mean.
    pub fn remove_weighted_mean(&self, u: &[T]) -> Result<Vec<T>> {
        let mean = self.weighted_mean(u)?;
        Ok(u.iter().map(|&x| x - mean).collect())
    }
}

/// Norm of the piecewise-linear gradient on each triangle, computed in the
/// triangle's isometric local frame; exact for the linear interpolant.
pub fn gradient_norms<T: Real>(mesh: &TriangleMesh<T>, u: &[T]) -> Result<Vec<T>> {
    if u.len() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertex_count(),
            got: u.len(),
        });
    }
    let mut out = Vec::with_capacity(mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let geo = mesh.triangle_geometry(t)?;
        let c = geo.local_frame;
        let e1 = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
        let e2 = [c[2][0] - c[0][0], c[2][1] - c[0][1]];
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        let du1 = u[tri[1]] - u[tri[0]];
        let du2 = u[tri[2]] - u[tri[0]];
        // solve [e1; e2] g = (du1, du2)
        let gx = (du1 * e2[1] - du2 * e1[1]) / det;
        let gy = (du2 * e1[0] - du1 * e2[0]) / det;
        out.push((gx * gx + gy * gy).sqrt());
    }
    Ok(out)
}

/// One value per line, vertex order.
pub fn read_values_csv<T: Real, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: "<stream>".into(),
            source: e,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: T = trimmed.parse().map_err(|_| {
            Error::NonFinite(format!("line {}: cannot parse {trimmed:?}", i + 1))
        })?;
        values.push(v);
    }
    Ok(values)
}

pub fn write_values_csv<T: Real, W: Write>(values: &[T], mut writer: W) -> Result<()> {
    for v in values {
        writeln!(writer, "{v}").map_err(|e| Error::Io {
            path: "<stream>".into(),
            source: e,
        })?;
    }
    Ok(())
}

pub fn read_values_csv_path<T: Real, P: AsRef<Path>>(path: P) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_values_csv(std::io::BufReader::new(file))
}

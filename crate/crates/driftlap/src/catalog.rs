//! Analytic test surfaces with closed-form curvature data, the pointwise
//! curvature conditions, and the eigenvalue lower bound they imply.
//!
//! Each catalog entry provides the smallest eigenvalue of the quadratic form
//! `Ric + D^2 f` and the squared gradient `|grad f|^2` in closed form, both
//! reduced to a single scan parameter. No curvature is ever estimated from
//! meshes: discrete curvature estimation would contaminate verification.
//!
//! Derivations (surfaces have dimension n = 2):
//!
//! * Sphere of radius `r` with `f = a * x3` (ambient coordinate restricted
//!   to the sphere): `Ric = ((n-1)/r^2) g`, and for an ambient-linear
//!   function `l` the restricted Hessian is `Hess(l) = -(l/r^2) g` (check:
//!   `x3 = r cos(theta)` has `Laplacian x3 = -(2/r^2) x3`, the trace). With
//!   `s = x3 / r` in `[-1, 1]` this gives
//!   `min_eig(s) = ((n-1) - a r s) / r^2` and, since
//!   `|grad x3|^2 = 1 - s^2`, `|grad f|^2 = a^2 (1 - s^2)`.
//! * Flat torus with `f = beta * cos(2 pi u / Lu)`: `Ric = 0` and the
//!   Hessian is the coordinate Hessian `diag(f_uu, 0)`, so
//!   `min_eig(u) = min(-beta w^2 cos(w u), 0)` with `w = 2 pi / Lu`, and
//!   `|grad f|^2 = beta^2 w^2 sin^2(w u)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{generate_flat_torus, generate_icosphere, MeshGeometry, TriangleMesh};
use crate::num::{real, real_from_usize, Real};
use crate::operator::Potential;

/// Default number of scan points for the pointwise conditions.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Scans refuse to run on fewer points than this.
pub const MIN_SAMPLES: usize = 1_000;

/// Catalog surface with closed-form `Ric + D^2 f` and `|grad f|^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticSurface<T> {
    /// Sphere of radius `r` carrying `f = slope * x3`.
    SphereLinear { radius: T, slope: T },
    /// Flat `Lu x Lv` torus carrying `f = amplitude * cos(2 pi u / Lu)`.
    TorusCosine {
        period_u: T,
        period_v: T,
        amplitude: T,
    },
}

/// Mesh resolution request matching the surface family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshResolution {
    Subdivision(u32),
    Grid { nu: usize, nv: usize },
}

impl<T: Real> AnalyticSurface<T> {
    pub fn sphere_linear(radius: T, slope: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() || !slope.is_finite() {
            return Err(Error::InvalidParameter(
                "sphere needs a positive finite radius and finite slope".into(),
            ));
        }
        Ok(AnalyticSurface::SphereLinear { radius, slope })
    }

    pub fn torus_cosine(period_u: T, period_v: T, amplitude: T) -> Result<Self> {
        if !(period_u > T::zero() && period_v > T::zero()) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(
                "torus needs positive periods and a finite amplitude".into(),
            ));
        }
        Ok(AnalyticSurface::TorusCosine {
            period_u,
            period_v,
            amplitude,
        })
    }

    /// Intrinsic dimension of every catalog surface.
    pub fn dimension(&self) -> u32 {
        2
    }

    /// Smallest eigenvalue of `Ric + D^2 f` at scan parameter `x`
    /// (`s` on the sphere, `u` on the torus).
    pub fn min_eig(&self, x: T) -> T {
        let n1 = real::<T>(1.0); // n - 1 with n = 2
        match *self {
            AnalyticSurface::SphereLinear { radius, slope } => {
                (n1 - slope * radius * x) / (radius * radius)
            }
            AnalyticSurface::TorusCosine {
                period_u,
                amplitude,
                ..
            } => {
                let w = real::<T>(2.0) * T::PI() / period_u;
                (-amplitude * w * w * (w * x).cos()).min(T::zero())
            }
        }
    }

    /// `|grad f|^2` at scan parameter `x`.
    pub fn grad_f_sq(&self, x: T) -> T {
        match *self {
            AnalyticSurface::SphereLinear { slope, .. } => {
                slope * slope * (T::one() - x * x)
            }
            AnalyticSurface::TorusCosine {
                period_u,
                amplitude,
                ..
            } => {
                let w = real::<T>(2.0) * T::PI() / period_u;
                let s = (w * x).sin();
                amplitude * amplitude * w * w * s * s
            }
        }
    }

    /// Uniform scan grid over the surface's one-parameter reduction:
    /// `s` over the closed interval `[-1, 1]` for the sphere, `u` over the
    /// half-open period `[0, Lu)` for the torus.
    fn scan_points(&self, samples: usize) -> Vec<T> {
        match *self {
            AnalyticSurface::SphereLinear { .. } => {
                let last = real_from_usize::<T>(samples - 1);
                (0..samples)
                    .map(|i| -T::one() + real::<T>(2.0) * real_from_usize::<T>(i) / last)
                    .collect()
            }
            AnalyticSurface::TorusCosine { period_u, .. } => {
                let count = real_from_usize::<T>(samples);
                (0..samples)
                    .map(|i| period_u * real_from_usize::<T>(i) / count)
                    .collect()
            }
        }
    }

    /// Closed-form potential evaluated at mesh vertices. The mesh must be
    /// the matching discretization (embedded sphere of the right radius,
    /// periodic grid with the right period).
    pub fn potential(&self, mesh: &TriangleMesh<T>) -> Result<Potential<T>> {
        match *self {
            AnalyticSurface::SphereLinear { radius, slope } => {
                let values = (0..mesh.vertex_count())
                    .map(|i| {
                        mesh.position(i).ok_or_else(|| {
                            Error::GeometryMismatch(
                                "sphere potential needs an embedded 3D mesh".into(),
                            )
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let rel_tol = radius * real::<T>(1e-9).max(T::epsilon() * real(100.0));
                for (i, p) in values.iter().enumerate() {
                    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    if (norm - radius).abs() > rel_tol {
                        return Err(Error::GeometryMismatch(format!(
                            "vertex {i} sits at radius {norm}, expected {radius}"
                        )));
                    }
                }
                Potential::new(values.iter().map(|p| slope * p[2]).collect())
                    .map(|p| p.with_descriptor(self.descriptor()))
            }
            AnalyticSurface::TorusCosine {
                period_u,
                period_v,
                amplitude,
            } => {
                let (mesh_pu, mesh_pv) = match mesh.geometry() {
                    MeshGeometry::Periodic2D {
                        period_u, period_v, ..
                    } => (*period_u, *period_v),
                    MeshGeometry::Embedded3D { .. } => {
                        return Err(Error::GeometryMismatch(
                            "torus potential needs a periodic 2D mesh".into(),
                        ))
                    }
                };
                let period_tol = real::<T>(1e-12).max(T::epsilon() * real(10.0));
                let tol_u = period_tol * period_u;
                let tol_v = period_tol * period_v;
                if (mesh_pu - period_u).abs() > tol_u || (mesh_pv - period_v).abs() > tol_v {
                    return Err(Error::GeometryMismatch(format!(
                        "mesh periods ({mesh_pu}, {mesh_pv}) do not match surface \
                         periods ({period_u}, {period_v})"
                    )));
                }
                let w = real::<T>(2.0) * T::PI() / period_u;
                let values = (0..mesh.vertex_count())
                    .map(|i| {
                        let p = mesh.param(i).expect("periodic mesh has params");
                        amplitude * (w * p[0]).cos()
                    })
                    .collect();
                Potential::new(values).map(|p| p.with_descriptor(self.descriptor()))
            }
        }
    }

    /// Generate the discretization this surface verifies against.
    pub fn generate_mesh(&self, resolution: MeshResolution) -> Result<TriangleMesh<T>> {
        match (self, resolution) {
            (AnalyticSurface::SphereLinear { radius, .. }, MeshResolution::Subdivision(s)) => {
                generate_icosphere(s, *radius)
            }
            (
                AnalyticSurface::TorusCosine {
                    period_u, period_v, ..
                },
                MeshResolution::Grid { nu, nv },
            ) => generate_flat_torus(nu, nv, *period_u, *period_v),
            (AnalyticSurface::SphereLinear { .. }, MeshResolution::Grid { .. }) => Err(
                Error::InvalidParameter("sphere surfaces take a subdivision level".into()),
            ),
            (AnalyticSurface::TorusCosine { .. }, MeshResolution::Subdivision(_)) => Err(
                Error::InvalidParameter("torus surfaces take grid sizes".into()),
            ),
        }
    }

    /// Mesh + potential in one call.
    pub fn realize(
        &self,
        resolution: MeshResolution,
    ) -> Result<(Arc<TriangleMesh<T>>, Potential<T>)> {
        let mesh = Arc::new(self.generate_mesh(resolution)?);
        let potential = self.potential(&mesh)?;
        Ok((mesh, potential))
    }

    pub fn descriptor(&self) -> String {
        match *self {
            AnalyticSurface::SphereLinear { radius, slope } => {
                format!("sphere-linear(r={radius}, a={slope})")
            }
            AnalyticSurface::TorusCosine {
                period_u,
                period_v,
                amplitude,
            } => format!("torus-cosine(Lu={period_u}, Lv={period_v}, beta={amplitude})"),
        }
    }
}

/// One z entry of a condition sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub z: T,
    /// Largest admissible constant in the pointwise condition
    /// `Ric + D^2 f >= |grad f|^2 / (n z) + A` on the scan grid.
    pub a: T,
    /// Tight constant with `Ric + D^2 f >= -K`; negative K encodes decay.
    pub k: T,
    /// Eigenvalue lower bound, present exactly when `a > 0`.
    pub bound: Option<T>,
    pub satisfiable: bool,
    /// Scan parameter where the infimum defining `a` is attained.
    pub argmin_location: T,
    pub samples_used: usize,
}

/// Result of a condition-2 grid scan.
#[derive(Debug, Clone, Copy)]
pub struct Condition2Scan<T> {
    pub a: T,
    pub argmin: T,
    pub samples_used: usize,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: samples,
        });
    }
    Ok(())
}

/// Largest `A` with `Ric + D^2 f >= |grad f|^2 / (n z) + A` on the scan
/// grid (n taken from the surface).
pub fn condition2_a<T: Real>(
    surface: &AnalyticSurface<T>,
    z: T,
    samples: usize,
) -> Result<Condition2Scan<T>> {
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::NonPositiveZ {
            z: z.to_f64().unwrap_or(f64::NAN),
        });
    }
    check_samples(samples)?;
    let n = real_from_usize::<T>(surface.dimension() as usize);
    let mut best = T::infinity();
    let mut argmin = T::zero();
    for x in surface.scan_points(samples) {
        let value = surface.min_eig(x) - surface.grad_f_sq(x) / (n * z);
        if value < best {
            best = value;
            argmin = x;
        }
    }
    Ok(Condition2Scan {
        a: best,
        argmin,
        samples_used: samples,
    })
}

/// Tight `K` with `Ric + D^2 f >= -K` on the scan grid: `K = -inf min_eig`.
pub fn condition4_k<T: Real>(surface: &AnalyticSurface<T>, samples: usize) -> Result<T> {
    check_samples(samples)?;
    let inf = surface
        .scan_points(samples)
        .into_iter()
        .map(|x| surface.min_eig(x))
        .fold(T::infinity(), T::min);
    Ok(-inf)
}

/// Eigenvalue lower bound `n (z+1) A / (n (z+1) - 1)` for `A > 0`, `z > 0`.
/// Strictly greater than `A` and strictly decreasing in `z`.
pub fn theorem1_bound<T: Real>(n: u32, z: T, a: T) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidDimension { n });
    }
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::NonPositiveZ {
            z: z.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(a > T::zero()) {
        return Err(Error::BoundUnavailable {
            a: a.to_f64().unwrap_or(f64::NAN),
        });
    }
    let nf = real_from_usize::<T>(n as usize);
    let nz1 = nf * (z + T::one());
    Ok(nz1 * a / (nz1 - T::one()))
}

/// Classical bound `n k` for `Ric >= (n-1) k` with `k > 0`; the z -> 0
/// limit of [`theorem1_bound`] at `A = (n-1) k`.
pub fn classical_lichnerowicz<T: Real>(n: u32, k: T) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidDimension { n });
    }
    if !(k > T::zero()) {
        return Err(Error::NonPositiveCurvature {
            k: k.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(real_from_usize::<T>(n as usize) * k)
}

/// Full report for one `z`.
pub fn condition_report<T: Real>(
    surface: &AnalyticSurface<T>,
    z: T,
    samples: usize,
) -> Result<ConditionReport<T>> {
    let scan = condition2_a(surface, z, samples)?;
    let k = condition4_k(surface, samples)?;
    let satisfiable = scan.a > T::zero();
    let bound = if satisfiable {
        Some(theorem1_bound(surface.dimension(), z, scan.a)?)
    } else {
        None
    };
    Ok(ConditionReport {
        z,
        a: scan.a,
        k,
        bound,
        satisfiable,
        argmin_location: scan.argmin,
        samples_used: scan.samples_used,
    })
}

/// Strongest Theorem-1 instance over a z grid.
#[derive(Debug, Clone)]
pub struct BoundSearch<T> {
    /// `(z, bound)` maximizing the bound among satisfiable entries.
    pub best: Option<(T, T)>,
    pub reports: Vec<ConditionReport<T>>,
}

pub fn optimize_bound<T: Real>(
    surface: &AnalyticSurface<T>,
    z_grid: &[T],
    samples: usize,
) -> Result<BoundSearch<T>> {
    if z_grid.is_empty() {
        return Err(Error::InvalidParameter("empty z grid".into()));
    }
    let mut reports = Vec::with_capacity(z_grid.len());
    let mut best: Option<(T, T)> = None;
    for &z in z_grid {
        let report = condition_report(surface, z, samples)?;
        if let Some(bound) = report.bound {
            if best.is_none_or(|(_, b)| bound > b) {
                best = Some((z, bound));
            }
        }
        reports.push(report);
    }
    Ok(BoundSearch { best, reports })
}

/// Log- or linearly-spaced positive grid, ends inclusive.
pub fn z_grid<T: Real>(min: T, max: T, count: usize, log_spaced: bool) -> Result<Vec<T>> {
    if !(min > T::zero() && max > min) || count < 1 {
        return Err(Error::InvalidParameter(format!(
            "z grid needs 0 < min < max and count >= 1, got [{min}, {max}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let last = real_from_usize::<T>(count - 1);
    let grid = (0..count)
        .map(|i| {
            let t = real_from_usize::<T>(i) / last;
            if log_spaced {
                (min.ln() + (max.ln() - min.ln()) * t).exp()
            } else {
                min + (max - min) * t
            }
        })
        .collect();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_sphere(slope: f64) -> AnalyticSurface<f64> {
        AnalyticSurface::sphere_linear(1.0, slope).unwrap()
    }

    fn standard_torus(beta: f64) -> AnalyticSurface<f64> {
        AnalyticSurface::torus_cosine(2.0 * PI, 2.0 * PI, beta).unwrap()
    }

    #[test]
    fn sphere_without_drift_has_a_equal_one() {
        let s = unit_sphere(0.0);
        for z in [0.1, 1.0, 10.0] {
            let scan = condition2_a(&s, z, 2000).unwrap();
            assert!((scan.a - 1.0).abs() < 1e-12, "z={z}: A={}", scan.a);
        }
    }

    #[test]
    fn sphere_half_slope_scan_matches_closed_form() {
        // minimize 1 - 0.5 s - 0.125 (1 - s^2) over s in [-1,1]: quadratic
        // with vertex at s = 2, so the minimum sits at the endpoint s = 1
        let s = unit_sphere(0.5);
        let scan = condition2_a(&s, 1.0, DEFAULT_SAMPLES).unwrap();
        assert!((scan.a - 0.5).abs() < 1e-4, "A = {}", scan.a);
        assert!((scan.argmin - 1.0).abs() < 1e-3, "argmin = {}", scan.argmin);
    }

    #[test]
    fn torus_condition_is_unsatisfiable() {
        let t = standard_torus(1.0);
        for z in [0.1, 0.5, 1.0, 5.0] {
            let report = condition_report(&t, z, DEFAULT_SAMPLES).unwrap();
            assert!(report.a < 0.0, "z={z}: A={}", report.a);
            assert!(!report.satisfiable);
            assert!(report.bound.is_none());
        }
    }

    #[test]
    fn condition4_values() {
        assert!((condition4_k(&unit_sphere(0.0), DEFAULT_SAMPLES).unwrap() + 1.0).abs() < 1e-12);
        assert!((condition4_k(&unit_sphere(0.5), DEFAULT_SAMPLES).unwrap() + 0.5).abs() < 1e-9);
        assert!((condition4_k(&standard_torus(1.0), DEFAULT_SAMPLES).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn theorem1_bound_values() {
        let b: f64 = theorem1_bound(2, 1.0, 1.0).unwrap();
        assert!((b - 4.0 / 3.0).abs() < 1e-15);
        let b: f64 = theorem1_bound(2, 1e-9, 1.0).unwrap();
        assert!((b - 2.0).abs() < 1e-5);
        let b: f64 = theorem1_bound(3, 1.0, 2.0).unwrap();
        assert!((b - 2.4).abs() < 1e-14);
        assert!(matches!(
            theorem1_bound::<f64>(2, 1.0, 0.0),
            Err(Error::BoundUnavailable { .. })
        ));
        assert!(matches!(
            theorem1_bound::<f64>(2, 1.0, -0.3),
            Err(Error::BoundUnavailable { .. })
        ));
        assert!(matches!(
            theorem1_bound::<f64>(1, 1.0, 1.0),
            Err(Error::InvalidDimension { n: 1 })
        ));
    }

    #[test]
    fn classical_limit_agreement() {
        assert_eq!(classical_lichnerowicz(2, 1.0).unwrap(), 2.0);
        assert_eq!(classical_lichnerowicz(3, 1.0).unwrap(), 3.0);
        // z -> 0 limit of the drifting bound recovers n k at A = (n-1) k
        for n in [2u32, 3, 5] {
            for k in [0.5, 1.0, 2.5] {
                let a = (n as f64 - 1.0) * k;
                let limit = theorem1_bound(n, 1e-9, a).unwrap();
                let classical = classical_lichnerowicz(n, k).unwrap();
                assert!(
                    (limit - classical).abs() < 1e-6,
                    "n={n} k={k}: {limit} vs {classical}"
                );
            }
        }
    }

    #[test]
    fn bound_shape_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let n = rng.random_range(2u32..10);
            let z = 10f64.powf(rng.random_range(-4.0..3.0));
            let a = 10f64.powf(rng.random_range(-4.0..3.0));
            let b = theorem1_bound(n, z, a).unwrap();
            // strictly above A
            assert!(b > a, "n={n} z={z} a={a}: bound {b}");
            // strictly decreasing in z
            let b_up = theorem1_bound(n, z * 1.5, a).unwrap();
            assert!(b_up < b, "n={n} z={z} a={a}: {b_up} !< {b}");
            // linear in A
            let b2 = theorem1_bound(n, z, 2.0 * a).unwrap();
            assert!((b2 - 2.0 * b).abs() <= 1e-12 * b2.abs());
        }
    }

    #[test]
    fn bound_monotone_decreasing_in_z() {
        let s = unit_sphere(0.0);
        let grid = [1e-6, 0.1, 1.0, 10.0];
        let search = optimize_bound(&s, &grid, 2000).unwrap();
        let (best_z, best_bound) = search.best.unwrap();
        assert_eq!(best_z, 1e-6);
        assert!((best_bound - 2.0).abs() < 1e-5, "best bound {best_bound}");
        let bounds: Vec<f64> = search.reports.iter().map(|r| r.bound.unwrap()).collect();
        for w in bounds.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn doubling_samples_is_stable() {
        let surfaces = [unit_sphere(0.5), standard_torus(1.0)];
        for s in &surfaces {
            for z in [0.25, 1.0, 4.0] {
                let a1 = condition2_a(s, z, DEFAULT_SAMPLES).unwrap().a;
                let a2 = condition2_a(s, z, 2 * DEFAULT_SAMPLES).unwrap().a;
                assert!((a1 - a2).abs() < 1e-6, "{} z={z}: {a1} vs {a2}", s.descriptor());
            }
            let k1 = condition4_k(s, DEFAULT_SAMPLES).unwrap();
            let k2 = condition4_k(s, 2 * DEFAULT_SAMPLES).unwrap();
            assert!((k1 - k2).abs() < 1e-6);
        }
    }

    #[test]
    fn a_never_exceeds_minus_k() {
        // subtracting the non-negative gradient term can only lower the inf
        for s in [unit_sphere(0.0), unit_sphere(0.5), standard_torus(1.0)] {
            let k = condition4_k(&s, DEFAULT_SAMPLES).unwrap();
            for z in [0.1, 1.0, 10.0] {
                let a = condition2_a(&s, z, DEFAULT_SAMPLES).unwrap().a;
                assert!(a <= -k + 1e-12, "{}: A={a} -K={}", s.descriptor(), -k);
            }
        }
    }

    #[test]
    fn scan_preconditions() {
        let s = unit_sphere(0.0);
        assert!(matches!(
            condition2_a(&s, 0.0, DEFAULT_SAMPLES),
            Err(Error::NonPositiveZ { .. })
        ));
        assert!(matches!(
            condition2_a(&s, 1.0, 10),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn potential_on_matching_meshes() {
        let s = unit_sphere(0.5);
        let (mesh, pot) = s.realize(MeshResolution::Subdivision(1)).unwrap();
        for i in 0..mesh.vertex_count() {
            let p = mesh.position(i).unwrap();
            assert!((pot.values()[i] - 0.5 * p[2]).abs() < 1e-15);
        }

        let t = standard_torus(1.0);
        let (mesh, pot) = t.realize(MeshResolution::Grid { nu: 8, nv: 8 }).unwrap();
        for i in 0..mesh.vertex_count() {
            let p = mesh.param(i).unwrap();
            assert!((pot.values()[i] - p[0].cos()).abs() < 1e-12);
        }

        // mismatched backends are refused
        let sphere_mesh = s.generate_mesh(MeshResolution::Subdivision(0)).unwrap();
        assert!(t.potential(&sphere_mesh).is_err());
    }

    #[test]
    fn z_grid_shapes() {
        let lin = z_grid::<f64>(1.0, 3.0, 3, false).unwrap();
        assert_eq!(lin, vec![1.0, 2.0, 3.0]);
        let log = z_grid::<f64>(1e-2, 1e2, 5, true).unwrap();
        assert!((log[2] - 1.0).abs() < 1e-12);
        assert!((log[4] - 1e2).abs() < 1e-10);
        assert!(z_grid::<f64>(0.0, 1.0, 3, false).is_err());
    }
}

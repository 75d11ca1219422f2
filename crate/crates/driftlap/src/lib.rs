//! Weighted (drifting) Laplacian on triangulated closed surfaces.
//!
//! The library discretizes the operator `L_f = Delta - grad f . grad` under
//! the weighted measure `e^{-f} dv` with cotangent finite elements and a
//! lumped mass, solves the resulting generalized eigenproblem
//! `S u = lambda M u`, evaluates closed-form curvature conditions on a small
//! catalog of analytic surfaces, and integrates the drifting heat equation
//! while monitoring weighted gradient energies. Together these pieces verify
//! two statements numerically at desk scale: a Lichnerowicz-type lower bound
//! on the first positive eigenvalue from a pointwise curvature condition,
//! and exponential `L^p` bounds on gradient energies along the flow.
//!
//! Modules follow the pipeline:
//!
//! * [`mesh`] — icosphere and flat-torus generators, OFF I/O, validation,
//!   per-triangle geometry.
//! * [`operator`] — weighted cotangent assembly `(S, M)`, gradient norms,
//!   `E_p` energies, weighted means.
//! * [`spectral`] — certified smallest eigenpairs (dense or iterative) and
//!   the first positive eigenvalue.
//! * [`catalog`] — analytic surfaces with closed-form `Ric + D^2 f`, the
//!   admissible constants `A(z)` and `K`, and the eigenvalue bound.
//! * [`heat`] — implicit-Euler and spectral-expansion integrators, energy
//!   traces, and the decay verifier.
//!
//! Everything numeric is generic over the scalar via [`num::Real`]
//! (`f32` or `f64`); the `*64` aliases below pin the common `f64` choice.
//!
//! ```
//! use driftlap::catalog::{condition2_a, theorem1_bound, AnalyticSurface, MeshResolution};
//! use driftlap::operator::WeightedOperator;
//! use driftlap::spectral::first_positive_eigenvalue;
//!
//! // unit sphere with drift potential f = 0.5 x3
//! let surface = AnalyticSurface::sphere_linear(1.0f64, 0.5)?;
//! let (mesh, potential) = surface.realize(MeshResolution::Subdivision(3))?;
//! let op = WeightedOperator::assemble(mesh, potential)?;
//!
//! // the curvature condition admits A = 1/2 at z = 1, hence a bound of 2/3,
//! // and the discrete first positive eigenvalue respects it
//! let scan = condition2_a(&surface, 1.0, 10_000)?;
//! let bound = theorem1_bound(surface.dimension(), 1.0, scan.a)?;
//! let first = first_positive_eigenvalue(&op, 1e-8)?;
//! assert!(first.lambda1 >= bound);
//! # Ok::<(), driftlap::Error>(())
//! ```

// Negated comparisons like `!(x > 0)` are deliberate throughout: unlike
// `x <= 0` they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
mod error;
pub mod heat;
pub mod linalg;
pub mod mesh;
pub mod num;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
pub use num::Real;

/// `f64` instantiations of the core types.
pub type TriangleMesh64 = mesh::TriangleMesh<f64>;
pub type MeshDiagnostics64 = mesh::MeshDiagnostics<f64>;
pub type Potential64 = operator::Potential<f64>;
pub type WeightedOperator64 = operator::WeightedOperator<f64>;
pub type EigenResult64 = spectral::EigenResult<f64>;
pub type AnalyticSurface64 = catalog::AnalyticSurface<f64>;
pub type ConditionReport64 = catalog::ConditionReport<f64>;
pub type HeatConfig64 = heat::HeatConfig<f64>;
pub type EnergyTrace64 = heat::EnergyTrace<f64>;

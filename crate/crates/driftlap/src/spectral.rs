//! Generalized symmetric eigenproblem `S u = lambda M u` for the smallest
//! eigenpairs, with mandatory residual certificates.
//!
//! The lumped mass is diagonal, so whitening by `M^{-1/2}` is exact; small
//! problems go through a dense symmetric eigendecomposition of the whitened
//! matrix and larger ones through kernel-deflated block inverse iteration.
//! Either way every returned pair carries the certificate
//! `||S u - lambda M u|| <= tol (lambda + 1) ||u||_M`.
//!
//! Eigenvectors are normalized in the weighted norm, `u^T M u = 1` — the
//! discrete form of unit L2 norm under `e^{-f} dv`. Callers expecting
//! unweighted normalization must rescale.

use crate::error::{Error, Result};
use crate::linalg::dense::{dense_smallest_generalized, GeneralizedPairs};
use crate::linalg::subspace::iterative_smallest_generalized;
use crate::linalg::vec_ops::norm_weighted;
use crate::num::{real, Real};
use crate::operator::WeightedOperator;

/// Problem sizes up to this go through the dense path when `Auto`.
pub const DENSE_THRESHOLD: usize = 1100;

/// Outer-iteration budget factor for the iterative path.
pub const ITERATION_BUDGET_PER_PAIR: usize = 50;

pub const MIN_TOLERANCE: f64 = 1e-12;
pub const MAX_TOLERANCE: f64 = 1e-2;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense below [`DENSE_THRESHOLD`] vertices, iterative above.
    Auto,
    Dense,
    Iterative,
}

impl std::fmt::Display for EigenMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EigenMethod::Auto => write!(f, "auto"),
            EigenMethod::Dense => write!(f, "dense"),
            EigenMethod::Iterative => write!(f, "iterative"),
        }
    }
}

/// Certified eigenpairs, ascending; the first entry is the constant mode.
#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    eigenvalues: Vec<T>,
    eigenvectors: Vec<Vec<T>>,
    residuals: Vec<T>,
    tolerance_used: T,
    method_used: EigenMethod,
}

impl<T: Real> EigenResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> &[T] {
        &self.eigenvectors[i]
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn tolerance_used(&self) -> T {
        self.tolerance_used
    }

    pub fn method_used(&self) -> EigenMethod {
        self.method_used
    }

    pub fn pairs(&self) -> impl Iterator<Item = (T, &[T])> {
        self.eigenvalues
            .iter()
            .copied()
            .zip(self.eigenvectors.iter().map(|v| v.as_slice()))
    }
}

/// Gershgorin-style upper bound on the largest eigenvalue of the pencil.
pub fn lambda_max_estimate<T: Real>(op: &WeightedOperator<T>) -> T {
    let s = op.stiffness();
    let m = op.mass();
    let mut worst = T::zero();
    for (i, &mi) in m.iter().enumerate() {
        let row_sum = s
            .row_iter(i)
            .fold(T::zero(), |acc, (_, v)| acc + v.abs());
        worst = worst.max(row_sum / mi);
    }
    worst
}

/// The `k` smallest certified eigenpairs with automatic method choice.
pub fn smallest_eigenpairs<T: Real>(
    op: &WeightedOperator<T>,
    k: usize,
    tol: T,
) -> Result<EigenResult<T>> {
    smallest_eigenpairs_with(op, k, tol, EigenMethod::Auto)
}

pub fn smallest_eigenpairs_with<T: Real>(
    op: &WeightedOperator<T>,
    k: usize,
    tol: T,
    method: EigenMethod,
) -> Result<EigenResult<T>> {
    let n = op.vertex_count();
    if k < 1 || k > n {
        return Err(Error::InvalidEigenCount { k, max: n });
    }
    let tol_f = tol.to_f64().unwrap_or(f64::NAN);
    if !(MIN_TOLERANCE..=MAX_TOLERANCE).contains(&tol_f) {
        return Err(Error::InvalidTolerance {
            tol: tol_f,
            min: MIN_TOLERANCE,
            max: MAX_TOLERANCE,
        });
    }

    let resolved = match method {
        EigenMethod::Auto => {
            if n <= DENSE_THRESHOLD || k + k / 2 + 5 >= n {
                EigenMethod::Dense
            } else {
                EigenMethod::Iterative
            }
        }
        m => m,
    };

    let pairs: GeneralizedPairs<T> = match resolved {
        EigenMethod::Dense => dense_smallest_generalized(op.stiffness(), op.mass(), k),
        EigenMethod::Iterative => iterative_smallest_generalized(
            op.stiffness(),
            op.mass(),
            k,
            tol,
            ITERATION_BUDGET_PER_PAIR * k,
        )?,
        EigenMethod::Auto => unreachable!(),
    };

    // the certificate is mandatory regardless of the path taken
    if let Some(worst) = pairs
        .residuals
        .iter()
        .cloned()
        .reduce(T::max)
        .filter(|&w| !(w <= tol))
    {
        return Err(Error::NoConvergence {
            iterations: ITERATION_BUDGET_PER_PAIR * k,
            worst_residual: worst.to_f64().unwrap_or(f64::NAN),
            target: tol_f,
        });
    }

    Ok(EigenResult {
        eigenvalues: pairs.values,
        eigenvectors: pairs.vectors,
        residuals: pairs.residuals,
        tolerance_used: tol,
        method_used: resolved,
    })
}

/// `(u^T S u) / (u^T M u)`.
pub fn rayleigh_quotient<T: Real>(op: &WeightedOperator<T>, u: &[T]) -> Result<T> {
    if u.len() != op.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: op.vertex_count(),
            got: u.len(),
        });
    }
    let m_sq = op.weighted_l2_sq(u)?;
    if !(m_sq > T::zero()) {
        return Err(Error::ZeroVector("Rayleigh quotient of an M-null vector".into()));
    }
    let su = op.stiffness().matvec(u);
    let num = crate::linalg::vec_ops::dot(u, &su);
    Ok(num / m_sq)
}

/// First positive eigenvalue and its eigenvector.
#[derive(Debug, Clone)]
pub struct FirstPositive<T> {
    pub lambda1: T,
    pub eigenvector: Vec<T>,
    /// Threshold that separated it from the zero mode.
    pub zero_threshold: T,
}

/// Smallest eigenvalue above the zero-mode threshold
/// `max(tol, 1e3 |lambda_0|, 1e-9 lambda_max)`. The returned eigenvector is
/// exactly mean-centered and M-normalized.
///
/// A mesh whose zero eigenvalue is not simple (a disconnected mesh) cannot
/// resolve the gap and errors out.
pub fn first_positive_eigenvalue<T: Real>(
    op: &WeightedOperator<T>,
    tol: T,
) -> Result<FirstPositive<T>> {
    let n = op.vertex_count();
    let lambda_max = lambda_max_estimate(op);

    let mut k = 6.min(n);
    loop {
        let eig = smallest_eigenpairs(op, k, tol)?;
        let lambda0 = eig.eigenvalues()[0].abs();
        let threshold = tol
            .max(real::<T>(1e3) * lambda0)
            .max(real::<T>(1e-9) * lambda_max);

        let zero_like = eig
            .eigenvalues()
            .iter()
            .take_while(|&&l| l <= threshold)
            .count();
        if zero_like >= 2 {
            return Err(Error::GapNotResolved {
                lambda1: eig.eigenvalues()[1].to_f64().unwrap_or(f64::NAN),
                threshold: threshold.to_f64().unwrap_or(f64::NAN),
            });
        }
        if zero_like < eig.len() {
            let idx = zero_like;
            let lambda1 = eig.eigenvalues()[idx];
            let mut u = op.remove_weighted_mean(eig.eigenvector(idx))?;
            let m_norm = norm_weighted(&u, op.mass());
            if !(m_norm > T::zero()) {
                return Err(Error::ZeroVector(
                    "first positive eigenvector collapsed under mean removal".into(),
                ));
            }
            for x in u.iter_mut() {
                *x /= m_norm;
            }
            return Ok(FirstPositive {
                lambda1,
                eigenvector: u,
                zero_threshold: threshold,
            });
        }
        // every computed eigenvalue looked like zero; widen the window
        if k == n {
            return Err(Error::GapNotResolved {
                lambda1: eig
                    .eigenvalues()
                    .last()
                    .and_then(|l| l.to_f64())
                    .unwrap_or(f64::NAN),
                threshold: threshold.to_f64().unwrap_or(f64::NAN),
            });
        }
        k = (k * 2).min(n);
    }
}

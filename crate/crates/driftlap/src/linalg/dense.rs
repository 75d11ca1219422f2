//! Dense symmetric eigendecomposition, backed by nalgebra.

use crate::linalg::vec_ops::{dot, norm2};
use crate::num::{real, Real};

/// Scalar types with a dense symmetric eigensolver.
///
/// Implemented concretely for `f32`/`f64` so the rest of the crate can stay
/// generic without dragging solver trait bounds through every signature.
pub trait DenseEigh: Sized + Copy {
    /// Eigendecomposition of a symmetric `n x n` matrix given in row-major
    /// order. Returns eigenvalues in ascending order and unit eigenvectors
    /// column-major: vector `j` occupies `vectors[j*n..(j+1)*n]`.
    fn sym_eigh_ascending(matrix: &[Self], n: usize) -> (Vec<Self>, Vec<Self>);
}

macro_rules! impl_dense_eigh {
    ($t:ty) => {
        impl DenseEigh for $t {
            fn sym_eigh_ascending(matrix: &[Self], n: usize) -> (Vec<Self>, Vec<Self>) {
                assert_eq!(matrix.len(), n * n);
                let m = nalgebra::DMatrix::<$t>::from_row_slice(n, n, matrix);
                let eig = nalgebra::SymmetricEigen::new(m);
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    eig.eigenvalues[a]
                        .partial_cmp(&eig.eigenvalues[b])
                        .expect("symmetric eigenvalues are finite")
                });
                let mut values = Vec::with_capacity(n);
                let mut vectors = Vec::with_capacity(n * n);
                for &j in &order {
                    values.push(eig.eigenvalues[j]);
                    vectors.extend(eig.eigenvectors.column(j).iter().copied());
                }
                (values, vectors)
            }
        }
    };
}

impl_dense_eigh!(f32);
impl_dense_eigh!(f64);

/// Eigenpairs of the pencil `(S, M)` with diagonal `M`, in the original
/// (unwhitened) coordinates.
#[derive(Debug, Clone)]
pub struct GeneralizedPairs<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Vec<T>>,
    /// Relative residuals ||S u - lambda M u|| / ((lambda + 1) ||u||_M).
    pub residuals: Vec<T>,
}

/// Relative residual certificate for one generalized eigenpair.
pub fn pair_residual<T: Real>(
    s: &crate::linalg::csr::CsrMatrix<T>,
    m: &[T],
    lambda: T,
    u: &[T],
) -> T {
    let mut r = s.matvec(u);
    for i in 0..r.len() {
        r[i] -= lambda * m[i] * u[i];
    }
    let m_norm = crate::linalg::vec_ops::norm_weighted(u, m);
    norm2(&r) / ((lambda + T::one()) * m_norm)
}

/// Flip the sign so the entry of largest magnitude is positive.
pub fn canonicalize_sign<T: Real>(u: &mut [T]) {
    let mut best = T::zero();
    let mut best_val = T::zero();
    for &x in u.iter() {
        if x.abs() > best {
            best = x.abs();
            best_val = x;
        }
    }
    if best_val < T::zero() {
        for x in u.iter_mut() {
            *x = -*x;
        }
    }
}

/// Dense path: whiten with `M^{-1/2}`, full symmetric eigendecomposition,
/// return the `k` smallest pairs unwhitened and M-normalized.
pub fn dense_smallest_generalized<T: Real>(
    s: &crate::linalg::csr::CsrMatrix<T>,
    m: &[T],
    k: usize,
) -> GeneralizedPairs<T> {
    let n = m.len();
    let d_inv: Vec<T> = m.iter().map(|&mi| T::one() / mi.sqrt()).collect();
    let mut w = s.sym_scaled(&d_inv).to_dense_row_major();
    // enforce exact symmetry before factorizing
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (w[i * n + j] + w[j * n + i]) * real(0.5);
            w[i * n + j] = avg;
            w[j * n + i] = avg;
        }
    }
    let (vals, vecs) = T::sym_eigh_ascending(&w, n);
    let lambda_max = vals.last().copied().unwrap_or(T::one()).abs();
    let clamp = real::<T>(1e3) * T::epsilon() * (lambda_max + T::one());

    let mut out = GeneralizedPairs {
        values: Vec::with_capacity(k),
        vectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
    };
    for j in 0..k {
        let lambda = if vals[j] < T::zero() && -vals[j] <= clamp {
            T::zero()
        } else {
            vals[j]
        };
        let mut u: Vec<T> = (0..n).map(|i| d_inv[i] * vecs[j * n + i]).collect();
        // x was unit in the whitened space, so u^T M u = 1 up to roundoff
        let m_norm = crate::linalg::vec_ops::norm_weighted(&u, m);
        for x in u.iter_mut() {
            *x /= m_norm;
        }
        canonicalize_sign(&mut u);
        let res = pair_residual(s, m, lambda, &u);
        out.values.push(lambda);
        out.vectors.push(u);
        out.residuals.push(res);
    }
    out
}

/// Gram-Schmidt M-orthonormality defect max_ij |u_i^T M u_j - delta_ij|.
pub fn orthonormality_defect<T: Real>(vectors: &[Vec<T>], m: &[T]) -> T {
    let mut worst = T::zero();
    for (i, ui) in vectors.iter().enumerate() {
        for (j, uj) in vectors.iter().enumerate() {
            let weighted: Vec<T> = uj.iter().zip(m).map(|(&x, &w)| x * w).collect();
            let g = dot(ui, &weighted);
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

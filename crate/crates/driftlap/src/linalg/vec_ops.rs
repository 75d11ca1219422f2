//! Small dense-vector kernels shared by the solvers.

use crate::num::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// y += alpha * x
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// p = z + beta * p
pub fn scale_add<T: Real>(beta: T, z: &[T], p: &mut [T]) {
    debug_assert_eq!(z.len(), p.len());
    for (pi, &zi) in p.iter_mut().zip(z) {
        *pi = zi + beta * *pi;
    }
}

/// M-weighted inner product with diagonal weights.
pub fn dot_weighted<T: Real>(a: &[T], w: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), w.len());
    let mut acc = T::zero();
    for i in 0..a.len() {
        acc += a[i] * w[i] * b[i];
    }
    acc
}

pub fn norm_weighted<T: Real>(a: &[T], w: &[T]) -> T {
    dot_weighted(a, w, a).sqrt()
}

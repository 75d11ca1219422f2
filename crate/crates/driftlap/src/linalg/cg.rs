//! Jacobi-preconditioned conjugate gradients for symmetric positive
//! (semi)definite systems.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::vec_ops::{axpy, dot, norm2, scale_add};
use crate::num::{real, Real};

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    pub rel_residual: T,
}

/// Solve `A x = b` with Jacobi-preconditioned CG to a relative residual
/// `||b - Ax|| <= rtol * ||b||`, optionally warm-started from `x0`.
///
/// When `deflate` is given it must be a unit vector spanning the kernel of
/// `A`; the right-hand side and the running residual are kept orthogonal to
/// it, which makes singular-but-consistent systems solvable.
pub fn solve_cg<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    deflate: Option<&[T]>,
    rtol: T,
    max_iter: usize,
) -> Result<(Vec<T>, CgOutcome<T>)> {
    let n = a.rows();
    assert_eq!(b.len(), n);

    let mut rhs = b.to_vec();
    if let Some(q) = deflate {
        project_out(&mut rhs, q);
    }
    let b_norm = norm2(&rhs);
    if b_norm == T::zero() {
        return Ok((
            vec![T::zero(); n],
            CgOutcome {
                iterations: 0,
                rel_residual: T::zero(),
            },
        ));
    }

    let diag = a.diagonal();
    let inv_diag: Vec<T> = diag
        .iter()
        .map(|&d| {
            if d > T::zero() {
                T::one() / d
            } else {
                T::one()
            }
        })
        .collect();

    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    let mut r = match x0 {
        Some(_) => {
            let ax = a.matvec(&x);
            let mut r: Vec<T> = rhs.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
            if let Some(q) = deflate {
                project_out(&mut r, q);
            }
            r
        }
        None => rhs.clone(),
    };
    if norm2(&r) <= rtol * b_norm {
        return Ok((
            x,
            CgOutcome {
                iterations: 0,
                rel_residual: norm2(&r) / b_norm,
            },
        ));
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];

    let mut iterations = 0;
    let floor = real::<T>(1e-3) * T::epsilon();
    for it in 1..=max_iter {
        iterations = it;
        a.matvec_into(&p, &mut ap);
        if let Some(q) = deflate {
            project_out(&mut ap, q);
        }
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            // indefinite or breakdown; report what we reached
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if let Some(q) = deflate {
            project_out(&mut r, q);
        }
        let r_norm = norm2(&r);
        if r_norm <= rtol * b_norm || r_norm <= floor * b_norm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        scale_add(beta, &z, &mut p);
    }

    // certify with the true residual
    let mut res = a.matvec(&x);
    for i in 0..n {
        res[i] = rhs[i] - res[i];
    }
    if let Some(q) = deflate {
        project_out(&mut res, q);
    }
    let rel = norm2(&res) / b_norm;
    if rel > rtol * real(10.0) {
        return Err(Error::LinearSolve {
            iterations,
            residual: rel.to_f64().unwrap_or(f64::NAN),
            target: rtol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((
        x,
        CgOutcome {
            iterations,
            rel_residual: rel,
        },
    ))
}

fn project_out<T: Real>(v: &mut [T], q: &[T]) {
    let c = dot(v, q);
    axpy(-c, q, v);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // 1D Dirichlet Laplacian, n = 5
        let mut t = Vec::new();
        for i in 0..5usize {
            t.push((i, i, 2.0f64));
            if i + 1 < 5 {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(5, 5, &t);
        let x_true = vec![1.0, -2.0, 3.0, 0.5, -1.5];
        let b = a.matvec(&x_true);
        let (x, out) = solve_cg(&a, &b, None, None, 1e-13, 100).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-10, "{xi} vs {ti}");
        }
        assert!(out.rel_residual < 1e-12);
    }

    #[test]
    fn deflated_solve_on_singular_system() {
        // graph Laplacian of a path, kernel = constants
        let mut t = Vec::new();
        let n = 6usize;
        for i in 0..n - 1 {
            t.push((i, i, 1.0f64));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let q: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
        // consistent rhs (mean-zero)
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let (x, _) = solve_cg(&a, &b, None, Some(&q), 1e-13, 200).unwrap();
        let ax = a.matvec(&x);
        for (ai, bi) in ax.iter().zip(&b) {
            assert!((ai - bi).abs() < 1e-10);
        }
    }
}

//! Jacobi-preconditioned BiCGSTAB for the five-point Newton systems.
//!
//! Everything runs in fixed loop order with sequential reductions, so a
//! solve is bit-reproducible for identical inputs.

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve A x = b where `apply` computes A times a vector and `inv_diag` is
/// the inverse of the diagonal of A. Converges when the true-residual norm
/// drops below `rel_tol * ||b||`.
pub fn bicgstab<F>(
    apply: F,
    b: &[f64],
    inv_diag: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let target = rel_tol * bnorm;

    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];

    for iter in 0..max_iter {
        let rho_next = dot(&r_hat, &r);
        if rho_next.abs() < 1e-300 {
            return Err(Error::LinearSolve {
                rel: norm(&r) / bnorm,
                iters: iter,
            });
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        for k in 0..n {
            phat[k] = inv_diag[k] * p[k];
        }
        apply(&phat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            return Err(Error::LinearSolve {
                rel: norm(&r) / bnorm,
                iters: iter,
            });
        }
        alpha = rho / denom;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) <= target {
            for k in 0..n {
                x[k] += alpha * phat[k];
            }
            return Ok(x);
        }
        for k in 0..n {
            shat[k] = inv_diag[k] * s[k];
        }
        apply(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::LinearSolve {
                rel: norm(&s) / bnorm,
                iters: iter,
            });
        }
        omega = dot(&t, &s) / tt;
        if omega == 0.0 {
            return Err(Error::LinearSolve {
                rel: norm(&s) / bnorm,
                iters: iter,
            });
        }
        for k in 0..n {
            x[k] += alpha * phat[k] + omega * shat[k];
        }
        for k in 0..n {
            r[k] = s[k] - omega * t[k];
        }
        if norm(&r) <= target {
            return Ok(x);
        }
    }
    Err(Error::LinearSolve {
        rel: norm(&r) / bnorm,
        iters: max_iter,
    })
}

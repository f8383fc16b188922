//! Minimal dense routines for the small symmetric matrices used by the
//! Gaussian machinery. Matrices are stored row-major in a flat slice.

/// Cholesky factorization `A = L·Lᵀ` of a symmetric positive-definite matrix.
///
/// Only the lower triangle of `a` is read; returns the lower factor `L`
/// (row-major, zero above the diagonal), or `None` if a pivot is not strictly
/// positive, i.e. the matrix is not positive definite.
pub fn cholesky_lower(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L·x = b` in place for a lower-triangular `L` whose rows are
/// `stride` entries apart. `stride >= n` lets callers solve against a leading
/// block of a larger factor without copying it out.
pub fn forward_solve(l: &[f64], stride: usize, n: usize, b: &mut [f64]) {
    debug_assert!(stride >= n && b.len() == n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * stride + k] * b[k];
        }
        b[i] = s / l[i * stride + i];
    }
}

/// Computes `out = L·v` for a lower-triangular `L` (row-major, n x n).
pub fn lower_times_vec(l: &[f64], n: usize, v: &[f64], out: &mut [f64]) {
    debug_assert!(v.len() == n && out.len() == n);
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..=i {
            acc += l[i * n + k] * v[k];
        }
        out[i] = acc;
    }
}

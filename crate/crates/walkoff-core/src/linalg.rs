//! Dense solvers for the small systems this crate needs: Cholesky for the
//! symmetric positive-definite normal equations inside IRLS (p ≤ a handful of
//! covariates) and LU with partial pivoting for the 24-state absorbing-chain
//! solve. Matrices are row-major `Vec<f64>`.

use alloc::vec;
use alloc::vec::Vec;

/// Cholesky factorization A = LLᵀ of a symmetric matrix, in place.
///
/// Returns the index of the first pivot that fails (≤ 0); for the normal
/// equations XᵀWX that index names the offending (collinear) column.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<(), usize> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(j);
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solves Ax = b for symmetric positive-definite A. `a` is consumed as
/// scratch. Error carries the failing column index.
pub fn solve_spd(mut a: Vec<f64>, b: &[f64], n: usize) -> Result<Vec<f64>, usize> {
    cholesky(&mut a, n)?;
    let mut x = b.to_vec();
    // Forward: Ly = b
    for i in 0..n {
        for k in 0..i {
            x[i] -= a[i * n + k] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    // Back: Lᵀx = y
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= a[k * n + i] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    Ok(x)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn invert_spd(a: &[f64], n: usize) -> Result<Vec<f64>, usize> {
    let mut l = a.to_vec();
    cholesky(&mut l, n)?;
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut x = vec![0.0; n];
        x[col] = 1.0;
        for i in 0..n {
            for k in 0..i {
                x[i] -= l[i * n + k] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= l[k * n + i] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        for i in 0..n {
            inv[i * n + col] = x[i];
        }
    }
    Ok(inv)
}

/// Solves a general square system by LU with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
pub fn solve_lu(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for k in (col + 1)..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[i * n + k] * x[k];
        }
        x[i] = s / a[i * n + i];
    }
    Some(x)
}

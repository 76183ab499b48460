//! Small dense helpers for the d ≤ a-handful systems the integrators touch.
//! Matrices are row-major `&[f64]` of length `n * n`.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, libm::fabs(*x)))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// `out = m * v` for an `n x n` row-major matrix.
pub fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        *o = dot(&m[i * n..(i + 1) * n], v);
    }
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is destroyed, `b` receives the solution. Returns `false` when a pivot
/// vanishes (relative to the matrix scale) or turns non-finite.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64]) -> bool {
    let n = b.len();
    if n == 1 {
        let p = a[0];
        if p == 0.0 || !p.is_finite() {
            return false;
        }
        b[0] /= p;
        return b[0].is_finite();
    }
    let scale = norm_inf(a).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut piv = col;
        let mut best = libm::fabs(a[col * n + col]);
        for row in col + 1..n {
            let v = libm::fabs(a[row * n + col]);
            if v > best {
                best = v;
                piv = row;
            }
        }
        if !(best > scale * 1e-300) || !best.is_finite() {
            return false;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col * n + j] * b[j];
        }
        b[col] = s / a[col * n + col];
    }
    all_finite(b)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues and the row-major matrix whose columns are eigenvectors.
pub fn symmetric_eigen(sym: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = sym.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        let diag: f64 = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Symmetric positive semidefinite square root of `jᵀ j`, written into `out`.
/// Eigenvalues below zero (round-off) are clamped.
pub fn gram_sqrt(j: &[f64], n: usize, out: &mut [f64]) {
    if n == 1 {
        out[0] = libm::fabs(j[0]);
        return;
    }
    let mut gram = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            gram[r * n + c] = (0..n).map(|k| j[k * n + r] * j[k * n + c]).sum();
        }
    }
    let (vals, vecs) = symmetric_eigen(&gram, n);
    out.iter_mut().for_each(|x| *x = 0.0);
    for (e, &lam) in vals.iter().enumerate() {
        let root = libm::sqrt(lam.max(0.0));
        if root == 0.0 {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] += root * vecs[r * n + e] * vecs[c * n + e];
            }
        }
    }
}

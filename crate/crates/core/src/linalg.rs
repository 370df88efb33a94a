//! Dense linear-algebra kernels sized for this crate: a Gaussian elimination
//! that exploits band structure (the Winkler Jacobian is pentadiagonal plus
//! boundary rows) and a Cholesky factorization for small GP kernel matrices.

use crate::error::{Error, Result};

/// Square matrix with known lower/upper bandwidth, stored dense. Partial
/// pivoting can widen the upper profile by at most `kl`, which the solve
/// accounts for; entries outside `|i - j| <= kl + ku` must stay zero.
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            a: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl + self.ku >= i && j <= i + self.kl + self.ku);
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    /// Solves `A x = b` in place by banded Gaussian elimination with partial
    /// pivoting. Consumes the factorization workspace; call once per assembly.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let work_ku = (self.ku + self.kl).min(n - 1);
        // Scale test for singularity relative to the largest row entry.
        let max_abs = self.a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tiny = 1e-14 * max_abs.max(1e-300);

        for k in 0..n {
            let row_end = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut piv_val = self.a[k * n + k].abs();
            for r in (k + 1)..=row_end {
                let v = self.a[r * n + k].abs();
                if v > piv_val {
                    piv = r;
                    piv_val = v;
                }
            }
            if piv_val <= tiny {
                return Err(Error::Singular(format!(
                    "pivot {piv_val:.3e} at column {k} of {n}"
                )));
            }
            if piv != k {
                let col_end = (k + work_ku).min(n - 1);
                for j in k..=col_end {
                    self.a.swap(k * n + j, piv * n + j);
                }
                b.swap(k, piv);
            }
            let diag = self.a[k * n + k];
            let col_end = (k + work_ku).min(n - 1);
            for r in (k + 1)..=row_end {
                let factor = self.a[r * n + k] / diag;
                if factor == 0.0 {
                    continue;
                }
                for j in (k + 1)..=col_end {
                    self.a[r * n + j] -= factor * self.a[k * n + j];
                }
                b[r] -= factor * b[k];
            }
        }

        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let col_end = (k + work_ku).min(n - 1);
            let mut acc = b[k];
            for j in (k + 1)..=col_end {
                acc -= self.a[k * n + j] * x[j];
            }
            x[k] = acc / self.a[k * n + k];
        }
        Ok(x)
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix
/// given row-major. Fails when the matrix is not positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Singular(format!(
                        "Cholesky pivot {sum:.3e} at row {i}: matrix not positive definite"
                    )));
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` from a Cholesky factor.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i * n + k] * y[k];
        }
        y[i] = acc / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in (i + 1)..n {
            acc -= l[k * n + i] * x[k];
        }
        x[i] = acc / l[i * n + i];
    }
    x
}

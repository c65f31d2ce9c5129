//! Small dense complex solvers for the baseline estimators.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

/// Diagonal loading added, relative to the mean diagonal, when a normal
/// matrix fails to factor.
pub const JITTER: f64 = 1e-12;

/// Column-stacked dense matrix, `rows × cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatrix {
    pub rows: usize,
    pub columns: Vec<Vec<Complex64>>,
}

impl ColumnMatrix {
    pub fn new(rows: usize) -> Self {
        Self {
            rows,
            columns: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// `A^H A`, row-major `cols × cols`.
    pub fn gram(&self) -> Vec<Complex64> {
        let n = self.cols();
        let mut g = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let v = inner(&self.columns[i], &self.columns[j]);
                g[i * n + j] = v;
                g[j * n + i] = v.conj();
            }
        }
        g
    }

    /// `A^H v`.
    pub fn adjoint_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.columns.iter().map(|c| inner(c, v)).collect()
    }

    /// `A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.rows];
        for (c, &xi) in self.columns.iter().zip(x) {
            for (o, &a) in out.iter_mut().zip(c) {
                *o += a * xi;
            }
        }
        out
    }
}

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// In-place Cholesky factor `A = L L^H` of a Hermitian row-major `n × n`
/// matrix; the lower triangle holds `L` afterwards. Fails when a pivot is
/// not strictly positive.
pub fn cholesky_in_place(a: &mut [Complex64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Singular { size: n });
        }
        let ljj = libm::sqrt(d);
        a[j * n + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / ljj;
        }
    }
    Ok(())
}

/// Solves `L L^H x = b` given the factor from [`cholesky_in_place`].
pub fn cholesky_solve(l: &[Complex64], n: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i].re;
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i].conj() * z[k];
        }
        z[i] = s / l[i * n + i].re;
    }
    z
}

/// Solves the Hermitian positive-definite system `A x = b`, retrying once
/// with a small diagonal loading if the plain factorization fails.
pub fn solve_hpd(a: &[Complex64], n: usize, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut f = a.to_vec();
    if cholesky_in_place(&mut f, n).is_ok() {
        return Ok(cholesky_solve(&f, n, b));
    }
    let mean_diag = (0..n).map(|i| a[i * n + i].re.abs()).sum::<f64>() / n as f64;
    if !(mean_diag > 0.0) {
        return Err(Error::Singular { size: n });
    }
    let load = JITTER * mean_diag;
    let mut f = a.to_vec();
    for i in 0..n {
        f[i * n + i] += load;
    }
    cholesky_in_place(&mut f, n)?;
    Ok(cholesky_solve(&f, n, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_hermitian_system() {
        let a = [c(4.0, 0.0), c(1.0, 2.0), c(1.0, -2.0), c(6.0, 0.0)];
        let x = [c(1.0, -1.0), c(0.5, 2.0)];
        let b = [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]];
        let got = solve_hpd(&a, 2, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_is_singular() {
        let a = [c(0.0, 0.0); 4];
        assert_eq!(solve_hpd(&a, 2, &[c(1.0, 0.0); 2]), Err(Error::Singular { size: 2 }));
    }

    #[test]
    fn empty_system() {
        assert!(solve_hpd(&[], 0, &[]).unwrap().is_empty());
    }
}

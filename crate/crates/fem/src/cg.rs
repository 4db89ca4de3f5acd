//! Jacobi-preconditioned conjugate gradients on CSR matrices.

use nalgebra_sparse::CsrMatrix;

use crate::error::{invalid, FemError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Stop when `‖b − Ax‖ ≤ rel_tol ‖b‖`.
    pub rel_tol: f64,
    /// Iteration cap; `None` means ten times the system size.
    pub max_iter: Option<usize>,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

/// `y = A x`.
pub fn spmv(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for (i, yi) in y.iter_mut().enumerate() {
        let range = offsets[i]..offsets[i + 1];
        *yi = cols[range.clone()]
            .iter()
            .zip(&vals[range])
            .map(|(&j, v)| v * x[j])
            .sum();
    }
}

pub fn mul(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    spmv(a, x, &mut y);
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from the
/// contents of `x`.
pub fn pcg(a: &CsrMatrix<f64>, b: &[f64], x: &mut [f64], settings: CgSettings) -> Result<CgReport> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || x.len() != n {
        return Err(invalid(format!(
            "cg: matrix {}x{}, rhs {}, guess {}",
            n,
            a.ncols(),
            b.len(),
            x.len()
        )));
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut inv_diag = vec![0.0; n];
    for (i, row) in a.row_iter().enumerate() {
        let d = row.get_entry(i).map(|e| e.into_value()).unwrap_or(0.0);
        // Also rejects NaN.
        if d.is_nan() || d <= 0.0 {
            return Err(invalid(format!(
                "cg: non-positive diagonal entry {d} in row {i}"
            )));
        }
        inv_diag[i] = 1.0 / d;
    }
    let max_iter = settings.max_iter.unwrap_or(10 * n).max(1);
    let mut r = vec![0.0; n];
    spmv(a, x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    for it in 0..max_iter {
        if res <= settings.rel_tol {
            return Ok(CgReport {
                iterations: it,
                residual: res,
            });
        }
        spmv(a, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.is_nan() || pap <= 0.0 {
            return Err(FemError::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
        res = dot(&r, &r).sqrt() / b_norm;
    }
    if res <= settings.rel_tol {
        Ok(CgReport {
            iterations: max_iter,
            residual: res,
        })
    } else {
        Err(FemError::NoConvergence {
            iterations: max_iter,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra_sparse::CooMatrix;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            coo.push(i, i, 2.0 + 0.01 * i as f64);
            if i + 1 < n {
                coo.push(i, i + 1, -1.0);
                coo.push(i + 1, i, -1.0);
            }
        }
        CsrMatrix::from(&coo)
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(50);
        let truth: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = mul(&a, &truth);
        let mut x = vec![0.0; 50];
        let rep = pcg(&a, &b, &mut x, CgSettings::default()).unwrap();
        assert!(rep.residual <= 1e-10);
        for (u, v) in x.iter().zip(&truth) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_and_cap() {
        let a = laplacian_1d(20);
        let mut x = vec![1.0; 20];
        pcg(&a, &[0.0; 20], &mut x, CgSettings::default()).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
        let b = vec![1.0; 20];
        let capped = pcg(
            &a,
            &b,
            &mut x,
            CgSettings {
                rel_tol: 1e-14,
                max_iter: Some(2),
            },
        );
        assert!(matches!(
            capped,
            Err(FemError::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn rejects_indefinite_diagonal() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 0, 1.0);
        coo.push(1, 1, -1.0);
        let a = CsrMatrix::from(&coo);
        assert!(pcg(&a, &[1.0, 1.0], &mut [0.0; 2], CgSettings::default()).is_err());
    }
}

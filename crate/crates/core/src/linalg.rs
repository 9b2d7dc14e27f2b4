//! Small dense helpers on top of faer.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;
pub type RMat = Mat<f64>;

#[inline]
pub fn cx(re: f64) -> c64 {
    c64::new(re, 0.0)
}

pub fn complexify(a: MatRef<'_, f64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| cx(a[(i, j)]))
}

pub fn from_rows(n: usize, data: &[f64]) -> RMat {
    assert_eq!(data.len(), n * n);
    Mat::from_fn(n, n, |i, j| data[i * n + j])
}

pub fn to_row_major(a: MatRef<'_, f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.nrows() * a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}

pub fn diag(values: &[f64]) -> RMat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
}

pub fn mat_vec(a: MatRef<'_, f64>, v: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

pub fn mat_vec_c(a: MatRef<'_, f64>, v: &[c64]) -> Vec<c64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| v[j] * a[(i, j)]).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_c(a: &[c64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integer power by repeated squaring.
pub fn mat_pow<T: faer::traits::ComplexField>(a: MatRef<'_, T>, k: usize) -> Mat<T> {
    let n = a.nrows();
    let mut result = Mat::<T>::identity(n, n);
    let mut base = a.to_owned();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn singular_values<T: faer::traits::ComplexField<Real = f64>>(a: MatRef<'_, T>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("svd: {e:?}")))
}

/// Inverse of a real square matrix, rejecting numerically singular input.
pub fn inverse(a: MatRef<'_, f64>) -> Result<RMat> {
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if !(smax > 0.0) || smin <= 1e-13 * smax {
        return Err(Error::MonodromyNotInvertible);
    }
    use faer::linalg::solvers::DenseSolveCore;
    Ok(a.partial_piv_lu().inverse())
}

/// Numerical kernel dimension of `a` by singular value thresholding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelDim {
    pub dim: usize,
    /// Some singular value lies within a factor 10 of the threshold.
    pub borderline: bool,
}

pub fn kernel_dim<T: faer::traits::ComplexField<Real = f64>>(a: MatRef<'_, T>, tau_rel: f64) -> Result<KernelDim> {
    let ncols = a.ncols();
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(KernelDim { dim: ncols, borderline: false });
    }
    let thr = tau_rel * smax;
    let rank = s.iter().filter(|&&x| x > thr).count();
    let borderline = s.iter().any(|&x| x > thr / 10.0 && x < thr * 10.0);
    Ok(KernelDim { dim: ncols - rank, borderline })
}

/// Orthonormal basis of the numerical kernel of a square complex matrix, thresholded like
/// [`kernel_dim`].
pub fn kernel_basis(a: MatRef<'_, c64>, tau_rel: f64) -> Result<(CMat, KernelDim)> {
    let k = kernel_dim(a, tau_rel)?;
    let svd = a.svd().map_err(|e| Error::LinearAlgebra(format!("svd: {e:?}")))?;
    let v = svd.V();
    let ncols = a.ncols();
    Ok((v.get(.., ncols - k.dim..).to_owned(), k))
}

/// Orthonormal basis of the null space of `c` (rows are constraints) via
/// column-pivoted QR of `c^H`. Returns the basis and the numerical rank.
pub fn null_space(c: MatRef<'_, c64>, tol_rel: f64) -> (CMat, usize) {
    let dim = c.ncols();
    if c.nrows() == 0 {
        return (Mat::identity(dim, dim), 0);
    }
    let ch = c.adjoint().to_owned();
    let qr = ch.col_piv_qr();
    let r = qr.R();
    let k = r.nrows().min(r.ncols());
    let r00 = if k > 0 { r[(0, 0)].norm() } else { 0.0 };
    let rank = (0..k).filter(|&i| r[(i, i)].norm() > tol_rel * r00).count();
    let q = qr.compute_Q();
    (q.get(.., rank..).to_owned(), rank)
}

pub fn hermitian_eigenvalues(h: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("hermitian eigenvalues: {e:?}")))
}

/// Eigenvalues and eigenvectors (columns), ascending.
pub fn hermitian_eigen(h: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let e = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("hermitian eigen: {e:?}")))?;
    let vals = (0..h.nrows()).map(|i| e.S()[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigenvalues_real(a: MatRef<'_, f64>) -> Result<Vec<c64>> {
    a.eigenvalues()
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))
}

/// Maximum absolute entry of `a - b`.
pub fn max_abs_diff<T: faer::traits::ComplexField<Real = f64>>(a: MatRef<'_, T>, b: MatRef<'_, T>) -> f64 {
    (a - b).norm_max()
}

pub fn hermitian_part(h: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(h.nrows(), h.ncols(), |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_product() {
        let a = from_rows(2, &[1.0, 2.0, -0.5, 0.3]);
        let p = mat_pow(a.as_ref(), 5);
        let mut q = Mat::<f64>::identity(2, 2);
        for _ in 0..5 {
            q = &q * &a;
        }
        assert!(max_abs_diff(p.as_ref(), q.as_ref()) < 1e-12);
    }

    #[test]
    fn kernel_of_jordan_block() {
        let a = from_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(kernel_dim(a.as_ref(), 1e-6).unwrap().dim, 1);
        assert_eq!(kernel_dim(RMat::zeros(3, 3).as_ref(), 1e-6).unwrap().dim, 3);
    }

    #[test]
    fn null_space_is_orthonormal_and_annihilated() {
        let c = Mat::from_fn(2, 5, |i, j| c64::new((i + 2 * j) as f64 * 0.3 - 1.0, (i * j) as f64 * 0.1));
        let (z, rank) = null_space(c.as_ref(), 1e-12);
        assert_eq!(rank, 2);
        assert_eq!(z.ncols(), 3);
        let cz = &c * &z;
        assert!(cz.norm_max() < 1e-12);
        let g = z.adjoint() * &z;
        assert!(max_abs_diff(g.as_ref(), CMat::identity(3, 3).as_ref()) < 1e-12);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a = from_rows(2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(inverse(a.as_ref()).is_err());
        let b = from_rows(2, &[2.0, 1.0, 1.0, 1.0]);
        let bi = inverse(b.as_ref()).unwrap();
        let id = &b * &bi;
        assert!(max_abs_diff(id.as_ref(), RMat::identity(2, 2).as_ref()) < 1e-14);
    }
}

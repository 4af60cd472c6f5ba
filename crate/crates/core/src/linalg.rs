//! Dense symmetric linear algebra helpers over `faer`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};

use crate::{Error, Result};

pub fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Eigenvalues ascending and the matching orthonormal eigenvectors as columns.
pub fn sym_eigen(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    if m.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::LinearAlgebra(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn sym_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::LinearAlgebra(format!("eigenvalues failed: {e:?}")))
}

pub fn min_eigenvalue(m: MatRef<'_, f64>) -> Result<f64> {
    Ok(sym_eigenvalues(m)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius(m: MatRef<'_, f64>) -> f64 {
    m.norm_l2()
}

/// Diagonal `d` with `d_i = 1/sqrt(s_i)` (or 1 when `s_i` vanishes) for the
/// congruence `D A D` that brings the diagonal scale `s` to one.
pub fn jacobi_scaling(diag_scale: &[f64]) -> Vec<f64> {
    let max = diag_scale.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    diag_scale.iter().map(|&s| if s.abs() > 1e-300 && s.abs() > 1e-14 * max { 1.0 / libm::sqrt(s.abs()) } else { 1.0 }).collect()
}

pub fn diag_congruence(m: &Mat<f64>, d: &[f64]) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)] * d[j])
}

/// Lower Cholesky factor, `None` when the matrix is not numerically positive definite.
pub fn cholesky(m: MatRef<'_, f64>) -> Option<Mat<f64>> {
    m.llt(Side::Lower).ok().map(|f| f.L().to_owned())
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(m: MatRef<'_, f64>) -> Option<Mat<f64>> {
    let f = m.llt(Side::Lower).ok()?;
    let mut inv = f.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

/// Inverse of a lower triangular matrix.
pub fn lower_inverse(l: MatRef<'_, f64>) -> Mat<f64> {
    let n = l.nrows();
    let mut x = Mat::<f64>::identity(n, n);
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, x.as_mut(), faer::Par::Seq);
    x
}

/// Result of applying a Moore-Penrose pseudoinverse.
#[derive(Clone, Debug, PartialEq)]
pub struct PinvApply {
    pub x: Vec<f64>,
    /// `|S S^+ b - b| / |b|`.
    pub range_residual: f64,
    pub in_range: bool,
}

/// Pseudoinverse of a symmetric matrix from its eigendecomposition.
#[derive(Clone, Debug)]
pub struct SymPinv {
    values: Vec<f64>,
    vectors: Mat<f64>,
    cutoff: f64,
}

impl SymPinv {
    /// Eigenvalues with `|lambda| < cutoff * max |lambda|` are treated as zero.
    pub fn new(s: MatRef<'_, f64>, cutoff: f64) -> Result<Self> {
        let (values, vectors) = sym_eigen(s)?;
        let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(SymPinv { values, vectors, cutoff: cutoff * max })
    }

    pub fn rank(&self) -> usize {
        self.values.iter().filter(|v| v.abs() >= self.cutoff && **v != 0.0).count()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn apply(&self, b: &[f64]) -> PinvApply {
        let n = self.values.len();
        let mut x = vec![0.0; n];
        let mut projected = vec![0.0; n];
        for k in 0..n {
            let col = self.vectors.col(k);
            let c: f64 = (0..n).map(|i| col[i] * b[i]).sum();
            let lam = self.values[k];
            if lam.abs() >= self.cutoff && lam != 0.0 {
                for i in 0..n {
                    x[i] += col[i] * c / lam;
                    projected[i] += col[i] * c;
                }
            }
        }
        let bn = libm::sqrt(b.iter().map(|v| v * v).sum::<f64>());
        let rn = libm::sqrt(projected.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>());
        let range_residual = if bn > 0.0 { rn / bn } else { 0.0 };
        PinvApply { x, range_residual, in_range: range_residual <= 1e-8 }
    }
}

/// `S^+ b` with eigenvalue cutoff relative to the largest magnitude.
pub fn pseudo_inverse_apply(s: MatRef<'_, f64>, b: &[f64], cutoff: f64) -> Result<PinvApply> {
    if b.len() != s.nrows() {
        return Err(Error::DimensionMismatch { expected: s.nrows(), found: b.len() });
    }
    Ok(SymPinv::new(s, cutoff)?.apply(b))
}

pub fn mat_vec(m: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

//! Dense matrix aliases and a few helpers shared by every module.
//!
//! Storage and the basic factorizations come from `nalgebra`; everything
//! consensus-specific lives elsewhere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type Vector = DVector<f64>;
pub type ComplexVector = DVector<Complex64>;

pub fn to_complex(m: &DenseMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn ensure_square<T: nalgebra::Scalar>(m: &DMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::SizeMismatch { expected, found });
    }
    Ok(())
}

/// `||a - b||_F / max(||a||_F, tiny)`.
pub fn relative_frobenius(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn euclidean(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mat_vec(m: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// Largest imaginary magnitude relative to the largest modulus of `v`.
pub fn imaginary_residue(v: &[Complex64]) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    v.iter().fold(0.0_f64, |m, z| m.max(z.im.abs())) / scale
}

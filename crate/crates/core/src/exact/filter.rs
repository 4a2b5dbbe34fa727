//! Nilpotent graph filter: `lbar^{-1} = sum_l (-L_o)^l`, evaluated either by
//! a local recursion or as a product of first-order factors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{gamma, LowerFactor};
use crate::error::{Error, Result};
use crate::matrix::{ensure_len, ensure_square, imaginary_residue, mat_vec, DenseMatrix};

/// Largest dropped imaginary part (relative) in the factored evaluation.
pub const FILTER_IMAGINARY_TOL: f64 = 1e-9;

/// Smallest `p >= 1` with `l0^p = 0`.
pub fn nilpotency_index(l0: &DenseMatrix) -> Result<usize> {
    let n = ensure_square(l0)?;
    for i in 0..n {
        for j in i..n {
            if l0[(i, j)] != 0.0 {
                return Err(Error::NotStrictlyLowerTriangular);
            }
        }
    }
    let mut p = 1;
    let mut power = l0.clone();
    while power.iter().any(|&x| x != 0.0) {
        power = &power * l0;
        p += 1;
    }
    Ok(p)
}

/// Roots of `f(x) = sum_{l=0}^{d} (-x)^l`: `-exp(2 pi i k / (d+1))`, `k = 1..=d`.
pub fn filter_roots(d: usize) -> Vec<Complex64> {
    (1..=d)
        .map(|k| -Complex64::from_polar(1.0, 2.0 * PI * k as f64 / (d + 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFilter {
    pub l0: DenseMatrix,
    pub nilpotency_index: usize,
    /// Roots for the full-degree expansion (`d = size(l0) - 1`).
    pub roots: Vec<Complex64>,
}

impl GraphFilter {
    pub fn new(l0: DenseMatrix) -> Result<Self> {
        let p = nilpotency_index(&l0)?;
        let roots = filter_roots(l0.nrows().saturating_sub(1));
        Ok(GraphFilter {
            l0,
            nilpotency_index: p,
            roots,
        })
    }

    pub fn from_factor(f: &LowerFactor) -> Result<Self> {
        Self::new(f.l0())
    }

    /// `f(x) = sum_{l=0}^{d} (-x)^l` at a complex point.
    pub fn polynomial(&self, x: Complex64) -> Complex64 {
        let d = self.roots.len();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..=d {
            acc += term;
            term *= -x;
        }
        acc
    }
}

/// `z_l = z_0 - L_o z_{l-1}` for `p - 1` rounds, giving `lbar^{-1} z_0`
/// (or `lbar^{-T} z_0` with `transpose`).
pub fn graph_filter_apply(gf: &GraphFilter, z0: &[f64], transpose: bool) -> Result<Vec<f64>> {
    ensure_len(gf.l0.nrows(), z0.len())?;
    let op = if transpose {
        gf.l0.transpose()
    } else {
        gf.l0.clone()
    };
    let mut z = z0.to_vec();
    for _ in 1..gf.nilpotency_index {
        let lz = mat_vec(&op, &z);
        z = z0.iter().zip(&lz).map(|(a, b)| a - b).collect();
    }
    Ok(z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactoredResult {
    pub w: Vec<f64>,
    /// Number of matrix applications, `2 d + 1`.
    pub matrix_iterations: usize,
    pub degree: usize,
    pub imaginary_residue: f64,
}

/// Leja ordering: each next root maximizes the product of distances to the
/// roots already taken. Keeps the partial products small, so the rounding
/// left after the cancellation of the full product stays near machine
/// precision even for high degree.
fn leja_order(roots: &[Complex64]) -> Vec<Complex64> {
    let mut left = roots.to_vec();
    let mut out: Vec<Complex64> = Vec::with_capacity(roots.len());
    while !left.is_empty() {
        let score = |z: Complex64| -> f64 { out.iter().map(|o| (z - o).norm().ln()).sum() };
        let mut best = 0;
        for k in 1..left.len() {
            if score(left[k]) > score(left[best]) {
                best = k;
            }
        }
        out.push(left.remove(best));
    }
    out
}

fn apply_root_block(l0: &DenseMatrix, alpha: Complex64, y: &mut [Complex64], transpose: bool) {
    let m = l0.nrows();
    let ly: Vec<Complex64> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let a = if transpose { l0[(j, i)] } else { l0[(i, j)] };
                    y[j] * a
                })
                .sum()
        })
        .collect();
    for i in 0..m {
        y[i] = alpha * y[i] - ly[i];
    }
}

/// Average via `gamma * B^T b1^T b1 B w0`, where `B = blockdiag(lbar^{-1}, 1)`
/// is expanded as the product of `(alpha_k I - L_o)` over the closed-form
/// roots (in Leja order) and `b1 = [b, -1]`.
///
/// With `truncate`, the polynomial degree drops to `p - 1` for nilpotency
/// index `p`; otherwise it is `N - 2`.
pub fn graph_filter_factored(
    f: &LowerFactor,
    w0: &[f64],
    truncate: bool,
) -> Result<FactoredResult> {
    let n = f.n();
    ensure_len(n, w0.len())?;
    let l0 = f.l0();
    let d = if truncate {
        nilpotency_index(&l0)? - 1
    } else {
        n - 2
    };
    let roots = leja_order(&filter_roots(d));
    let mut b1: Vec<f64> = f.b();
    b1.push(-1.0);

    let mut y: Vec<Complex64> = w0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for &alpha in &roots {
        apply_root_block(&l0, alpha, &mut y[..n - 1], false);
    }
    let s: Complex64 = y.iter().zip(&b1).map(|(yi, bi)| yi * bi).sum();
    let mut y: Vec<Complex64> = b1.iter().map(|&bi| s * bi).collect();
    for &alpha in &roots {
        apply_root_block(&l0, alpha, &mut y[..n - 1], true);
    }
    let g = gamma(f);
    let y: Vec<Complex64> = y.iter().map(|z| z * g).collect();
    let residue = imaginary_residue(&y);
    if residue > FILTER_IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue { magnitude: residue });
    }
    Ok(FactoredResult {
        w: y.iter().map(|z| z.re).collect(),
        matrix_iterations: 2 * d + 1,
        degree: d,
        imaginary_residue: residue,
    })
}

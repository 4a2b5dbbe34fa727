//! Dense eigendecomposition, multiplicity grouping and the closed-form
//! projectors used as ground truth by the consensus engines.

use std::cmp::Ordering;

use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{ensure_square, relative_frobenius, to_complex, ComplexMatrix, DenseMatrix};

/// Relative reconstruction residual above which a decomposition is rejected.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Default relative tolerance for merging near-equal eigenvalues.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Sorted by ascending magnitude, then ascending phase.
    pub values: Vec<Complex64>,
    /// Right eigenvectors as columns, aligned with `values`.
    pub rightvecs: ComplexMatrix,
    /// Inverse of `rightvecs`; row `k` is the left eigenvector of `values[k]`.
    pub leftrows: ComplexMatrix,
    pub symmetric: bool,
    /// `||A - Q diag(values) Q^-1||_F / ||A||_F`.
    pub residual: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Real parts, or `None` if any eigenvalue has a noticeable imaginary part.
    pub fn real_values(&self) -> Option<Vec<f64>> {
        let scale = self.max_modulus().max(f64::MIN_POSITIVE);
        self.values
            .iter()
            .map(|z| (z.im.abs() <= 1e-12 * scale).then_some(z.re))
            .collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Right eigenvector for `values[k]`.
    pub fn right(&self, k: usize) -> Vec<Complex64> {
        self.rightvecs.column(k).iter().copied().collect()
    }

    /// Left eigenvector (row of `Q^-1`) for `values[k]`.
    pub fn left(&self, k: usize) -> Vec<Complex64> {
        self.leftrows.row(k).iter().copied().collect()
    }

    /// `Q * diag(keep) * Q^-1` where `keep[k]` selects which modes survive.
    pub fn mode_projector(&self, keep: &[bool]) -> ComplexMatrix {
        let n = self.n();
        let mut scaled = self.rightvecs.clone();
        for (k, &on) in keep.iter().enumerate() {
            if !on {
                scaled.column_mut(k).fill(Complex64::new(0.0, 0.0));
            }
        }
        debug_assert_eq!(keep.len(), n);
        scaled * &self.leftrows
    }
}

fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.norm()
        .total_cmp(&b.norm())
        .then_with(|| a.arg().total_cmp(&b.arg()))
}

fn is_symmetric(m: &DenseMatrix) -> bool {
    let scale = m.amax().max(1.0);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= SYMMETRY_TOL * scale))
}

/// Eigendecomposition `m = Q diag(values) Q^-1`.
///
/// With `symmetric_hint` the input must be symmetric and the result has an
/// orthonormal `Q`. Otherwise a complex Schur form is computed and
/// eigenvectors are recovered from the triangular factor; the result is
/// rejected as [`Error::DefectiveMatrix`] unless it reconstructs `m`.
pub fn eig_decompose(m: &DenseMatrix, symmetric_hint: bool) -> Result<Spectrum> {
    let n = ensure_square(m)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    if n == 0 {
        return Ok(Spectrum {
            values: vec![],
            rightvecs: ComplexMatrix::zeros(0, 0),
            leftrows: ComplexMatrix::zeros(0, 0),
            symmetric: symmetric_hint,
            residual: 0.0,
        });
    }
    if symmetric_hint {
        if !is_symmetric(m) {
            return Err(Error::InvalidParameter(
                "symmetric decomposition requested for a non-symmetric matrix".into(),
            ));
        }
        symmetric_decompose(m)
    } else {
        general_decompose(m)
    }
}

fn symmetric_decompose(m: &DenseMatrix) -> Result<Spectrum> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let mut idx: Vec<usize> = (0..n).collect();
    let vals: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    idx.sort_by(|&a, &b| spectral_order(&vals[a], &vals[b]).then(a.cmp(&b)));
    let values: Vec<Complex64> = idx.iter().map(|&i| vals[i]).collect();
    let q = DenseMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    let rightvecs = to_complex(&q);
    let leftrows = to_complex(&q.transpose());
    let residual = reconstruction_residual(m, &values, &rightvecs, &leftrows);
    Ok(Spectrum {
        values,
        rightvecs,
        leftrows,
        symmetric: true,
        residual,
    })
}

fn general_decompose(m: &DenseMatrix) -> Result<Spectrum> {
    let n = m.nrows();
    let a = to_complex(m);
    let schur = Schur::try_new(a, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    let (z, t) = schur.unpack();

    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut x = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        x[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for p in (j + 1)..=k {
                s += t[(j, p)] * x[(p, k)];
            }
            let mut d = t[(j, j)] - lam;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            x[(j, k)] = -s / d;
        }
    }
    let mut q = z * x;
    for mut col in q.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
    }

    let vals: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| spectral_order(&vals[a], &vals[b]).then(a.cmp(&b)));
    let values: Vec<Complex64> = idx.iter().map(|&i| vals[i]).collect();
    let rightvecs = ComplexMatrix::from_fn(n, n, |r, c| q[(r, idx[c])]);

    let leftrows = rightvecs
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::DefectiveMatrix {
            residual: f64::INFINITY,
        })?;
    let residual = reconstruction_residual(m, &values, &rightvecs, &leftrows);
    if !residual.is_finite() || residual > RECONSTRUCTION_TOL {
        return Err(Error::DefectiveMatrix { residual });
    }
    Ok(Spectrum {
        values,
        rightvecs,
        leftrows,
        symmetric: false,
        residual,
    })
}

fn reconstruction_residual(
    m: &DenseMatrix,
    values: &[Complex64],
    q: &ComplexMatrix,
    qinv: &ComplexMatrix,
) -> f64 {
    let mut ql = q.clone();
    for (k, &v) in values.iter().enumerate() {
        let mut col = ql.column_mut(k);
        col *= v;
    }
    relative_frobenius(&to_complex(m), &(ql * qinv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenGroup {
    pub value: Complex64,
    pub multiplicity: usize,
    /// Indices into [`Spectrum::values`].
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenGroups {
    pub groups: Vec<EigenGroup>,
    /// Number of groups whose representative is not (near-)zero.
    pub k: usize,
    pub zero_index: Option<usize>,
    pub tol: f64,
}

impl EigenGroups {
    /// Groups other than the zero group, in spectral order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, &EigenGroup)> {
        self.groups
            .iter()
            .enumerate()
            .filter(move |(i, _)| Some(*i) != self.zero_index)
    }
}

/// Greedy clustering over the spectrum's sorted eigenvalues.
///
/// Two eigenvalues land in the same group when they are within
/// `tol * max|lambda|` of the group's first member.
pub fn group_eigenvalues(values: &[Complex64], tol: f64) -> Result<EigenGroups> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grouping tolerance {tol} must be positive"
        )));
    }
    let scale = values.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let thresh = tol * scale;
    let mut groups: Vec<EigenGroup> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.iter_mut().find(|g| (g.value - v).norm() <= thresh) {
            Some(g) => {
                g.multiplicity += 1;
                g.members.push(i);
            }
            None => groups.push(EigenGroup {
                value: v,
                multiplicity: 1,
                members: vec![i],
            }),
        }
    }
    let zero_index = groups
        .iter()
        .position(|g| g.value.norm() <= thresh || scale == 0.0);
    let k = groups.len() - usize::from(zero_index.is_some());
    Ok(EigenGroups {
        groups,
        k,
        zero_index,
        tol,
    })
}

/// Orthogonal projector `I - C^T (C C^T)^-1 C` onto the null space of `c`.
pub fn kernel_projection(c: &DenseMatrix) -> Result<DenseMatrix> {
    let gram = c * c.transpose();
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)]).collect();
    let hi = diag.iter().fold(0.0_f64, |m, &x| m.max(x));
    let lo = diag.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if diag.is_empty() || lo <= 1e-7 * hi {
        return Err(Error::RankDeficient);
    }
    let solved = chol.solve(c);
    Ok(DenseMatrix::identity(c.ncols(), c.ncols()) - c.transpose() * solved)
}

/// Oblique rank-one map `I - C2^T (C1 C2^T)^-1 C1`.
pub fn rank_one_map(c1: &DenseMatrix, c2: &DenseMatrix) -> Result<DenseMatrix> {
    if c1.shape() != c2.shape() {
        return Err(Error::SizeMismatch {
            expected: c1.nrows() * c1.ncols(),
            found: c2.nrows() * c2.ncols(),
        });
    }
    let pivot = c1 * c2.transpose();
    let lu = pivot.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let hi = diag.iter().fold(0.0_f64, |m, &x| m.max(x));
    let lo = diag.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if diag.is_empty() || lo <= 1e-12 * hi {
        return Err(Error::SingularPivot);
    }
    let solved = lu.solve(c1).ok_or(Error::SingularPivot)?;
    Ok(DenseMatrix::identity(c1.ncols(), c1.ncols()) - c2.transpose() * solved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn re(s: &Spectrum) -> Vec<f64> {
        s.real_values().unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let s = eig_decompose(&DenseMatrix::identity(3, 3), true).unwrap();
        assert_eq!(re(&s), vec![1.0, 1.0, 1.0]);
        assert!(s.residual < 1e-15);
    }

    #[test]
    fn path_laplacian_spectrum() {
        let l = DenseMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.]);
        for hint in [true, false] {
            let s = eig_decompose(&l, hint).unwrap();
            let v = re(&s);
            for (got, want) in v.iter().zip([0.0, 1.0, 3.0]) {
                assert!((got - want).abs() < 1e-12, "{v:?}");
            }
            assert!(s.residual < 1e-12);
        }
    }

    #[test]
    fn symmetric_vectors_orthonormal() {
        let l = DenseMatrix::from_row_slice(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.]);
        let s = eig_decompose(&l, true).unwrap();
        let q = &s.rightvecs;
        let err = (q.adjoint() * q - ComplexMatrix::identity(3, 3)).norm();
        assert!(err < 1e-10);
    }

    #[test]
    fn jordan_block_is_defective() {
        let j = DenseMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        assert!(matches!(
            eig_decompose(&j, false),
            Err(Error::DefectiveMatrix { .. })
        ));
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let r = DenseMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
        let s = eig_decompose(&r, false).unwrap();
        assert_relative_eq!(s.values[0].im, -1.0, epsilon = 1e-12);
        assert_relative_eq!(s.values[1].im, 1.0, epsilon = 1e-12);
        assert!(s.real_values().is_none());
    }

    #[test]
    fn rejects_asymmetric_hint() {
        let m = DenseMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        assert!(eig_decompose(&m, true).is_err());
        assert!(matches!(
            eig_decompose(&DenseMatrix::zeros(2, 3), false),
            Err(Error::NotSquare { .. })
        ));
    }

    fn c(vals: &[f64]) -> Vec<Complex64> {
        vals.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn grouping_examples() {
        let g = group_eigenvalues(&c(&[0.0, 3.0, 3.0]), 1e-8).unwrap();
        assert_eq!(g.k, 1);
        assert_eq!(g.zero_index, Some(0));
        assert_eq!(g.groups[1].multiplicity, 2);

        let g = group_eigenvalues(&c(&[0.0, 1.0, 1.0 + 1e-12, 2.0]), 1e-9).unwrap();
        assert_eq!(g.k, 2);
        let m: Vec<usize> = g.nonzero().map(|(_, g)| g.multiplicity).collect();
        assert_eq!(m, vec![2, 1]);

        let g = group_eigenvalues(&c(&[0.0, 1.0, 3.0]), 1e-8).unwrap();
        assert_eq!(g.k, 2);
        assert!(g.groups.iter().all(|g| g.multiplicity == 1));

        assert!(group_eigenvalues(&c(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn kernel_projection_examples() {
        let p = kernel_projection(&DenseMatrix::from_row_slice(1, 2, &[1., -1.])).unwrap();
        assert_relative_eq!(p, DenseMatrix::from_element(2, 2, 0.5), epsilon = 1e-14);

        let ct = DenseMatrix::from_row_slice(2, 3, &[1., -1., 0., 0., 1., -1.]);
        let p = kernel_projection(&ct).unwrap();
        assert_relative_eq!(
            p,
            DenseMatrix::from_element(3, 3, 1.0 / 3.0),
            epsilon = 1e-14
        );

        let r = DenseMatrix::from_row_slice(2, 3, &[0.3, -1.2, 2.0, 1.1, 0.4, -0.7]);
        let p = kernel_projection(&r).unwrap();
        assert!((&p * &p - &p).norm() < 1e-10);
        assert!((&p * r.transpose()).norm() < 1e-10);

        let dup = DenseMatrix::from_row_slice(2, 2, &[1., -1., 2., -2.]);
        assert_eq!(kernel_projection(&dup), Err(Error::RankDeficient));
    }

    #[test]
    fn rank_one_map_examples() {
        let c1 = DenseMatrix::from_row_slice(1, 2, &[1., -1.]);
        let c2 = DenseMatrix::from_row_slice(1, 2, &[1., -2.]);
        let a = rank_one_map(&c1, &c1).unwrap();
        assert_relative_eq!(a, DenseMatrix::from_element(2, 2, 0.5), epsilon = 1e-14);

        let a = rank_one_map(&c1, &c2).unwrap();
        let want = DenseMatrix::from_row_slice(2, 2, &[2. / 3., 1. / 3., 2. / 3., 1. / 3.]);
        assert_relative_eq!(a, want, epsilon = 1e-14);
        assert_relative_eq!(&a * &a, a, epsilon = 1e-14);

        let z = DenseMatrix::from_row_slice(1, 2, &[1., 1.]);
        assert_eq!(rank_one_map(&c1, &z), Err(Error::SingularPivot));
    }
}

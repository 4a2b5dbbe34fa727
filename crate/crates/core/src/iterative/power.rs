use num_complex::Complex64;
use serde::Serialize;

use super::{consensus_target, Metadata, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{
    ensure_len, ensure_square, euclidean, imaginary_residue, mat_vec, max_abs, DenseMatrix,
};
use crate::spectral::eig_decompose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    Infinity,
    Euclidean,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRun {
    /// `states[i]` (for `i >= 1`) holds the average recovered from iterate `i`.
    pub trajectory: Trajectory,
    /// Raw (normalized) iterates, starting from the rescaled input.
    pub iterates: Vec<Vec<f64>>,
    /// Input rescaling: the iteration starts from `w0 ./ d1`.
    pub d1: Vec<f64>,
    /// Output rescaling: the average is `(w ./ d2) / N` after undoing growth.
    pub d2: Vec<f64>,
    pub dominant: f64,
    /// `|lambda_{N-1}| / |lambda_N|`, the asymptotic contraction per iteration.
    pub ratio: f64,
}

/// Normalized power iteration with average recovery.
///
/// The dominant eigenpair is read off the spectrum; `d1` and `d2` are its
/// left and right eigenvectors scaled so that `d1 . d2 = 1`. Starting from
/// `w0 ./ d1`, the iterate aligns with `d2` and carries `sum(w0)` as its
/// coefficient, which is divided back out at every step.
pub fn power_ac(
    a: &DenseMatrix,
    w0: &[f64],
    iters: usize,
    normalization: Normalization,
) -> Result<PowerRun> {
    let n = w0.len();
    ensure_len(ensure_square(a)?, n)?;
    let spectrum = eig_decompose(a, false)?;
    let top = n - 1;
    let lam = spectrum.values[top];
    let second = if n > 1 {
        spectrum.values[top - 1].norm()
    } else {
        0.0
    };
    if lam.norm() - second <= 1e-12 * lam.norm() {
        return Err(Error::TiedDominantEigenvalues);
    }

    // a strictly dominant eigenvalue of a real matrix is real; fix the
    // eigenvector phase so both vectors come out real as well
    let v = spectrum.right(top);
    let u = spectrum.left(top);
    let pivot = v
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap();
    let phase = pivot / pivot.norm();
    let v: Vec<Complex64> = v.iter().map(|z| z / phase).collect();
    let u: Vec<Complex64> = u.iter().map(|z| z * phase).collect();
    let residue = imaginary_residue(&v).max(imaginary_residue(&u));
    if residue > 1e-9 {
        return Err(Error::ImaginaryResidue { magnitude: residue });
    }
    let d2: Vec<f64> = v.iter().map(|z| z.re).collect();
    let d1: Vec<f64> = u.iter().map(|z| z.re).collect();
    for d in [&d2, &d1] {
        let scale = max_abs(d);
        if let Some(k) = d.iter().position(|x| x.abs() <= 1e-12 * scale) {
            return Err(Error::ZeroEigenvectorEntry { index: k + 1 });
        }
    }
    let dominant = lam.re;

    let meta = Metadata::new("power")
        .param("iters", iters as f64)
        .param("dominant", dominant)
        .param("ratio", second / lam.norm());
    let mut t = Trajectory::new(w0.to_vec(), consensus_target(w0), meta);

    let mut w: Vec<f64> = w0.iter().zip(&d1).map(|(x, d)| x / d).collect();
    let mut iterates = vec![w.clone()];
    // stored iterate = coeff * A^i w0'
    let mut coeff = 1.0_f64;
    for _ in 0..iters {
        w = mat_vec(a, &w);
        coeff *= dominant;
        let norm = match normalization {
            Normalization::None => 1.0,
            Normalization::Infinity => max_abs(&w),
            Normalization::Euclidean => euclidean(&w),
        };
        if norm > 0.0 {
            w.iter_mut().for_each(|x| *x /= norm);
            coeff /= norm;
        }
        let est: Vec<f64> = w
            .iter()
            .zip(&d2)
            .map(|(x, d)| x / coeff / d / n as f64)
            .collect();
        iterates.push(w.clone());
        t.push(est);
    }

    Ok(PowerRun {
        trajectory: t,
        iterates,
        d1,
        d2,
        dominant,
        ratio: second / lam.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Graph, LaplacianKind};

    #[test]
    fn averaging_matrix_is_exact_in_one_step() {
        let a = DenseMatrix::from_element(3, 3, 1.0 / 3.0);
        let r = power_ac(&a, &[0.0, 3.0, 3.0], 1, Normalization::Euclidean).unwrap();
        for x in r.trajectory.final_state() {
            assert!((x - 2.0).abs() < 1e-12);
        }
        assert!(r.ratio < 1e-12);
    }

    #[test]
    fn contraction_matches_second_mode() {
        let l = Graph::new(3, false, [(1, 2, 1.0), (2, 3, 1.0)])
            .unwrap()
            .laplacian(LaplacianKind::UnnormalizedConstant)
            .unwrap();
        let a = DenseMatrix::identity(3, 3) - l * 0.5;
        for norm in [
            Normalization::None,
            Normalization::Infinity,
            Normalization::Euclidean,
        ] {
            let r = power_ac(&a, &[0.0, 3.0, 3.0], 30, norm).unwrap();
            let e = &r.trajectory.errors_db;
            for i in 5..20 {
                let step = e[i] - e[i + 1];
                assert!((step - 20.0 * 2f64.log10()).abs() < 1e-6);
            }
            assert!((r.ratio - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn iterates_align_with_dominant_vector() {
        let a = DenseMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.6, 0.2, 0.2, 0.2, 0.7]);
        let r = power_ac(&a, &[1.0, 2.0, 0.5], 80, Normalization::Euclidean).unwrap();
        let last = r.iterates.last().unwrap();
        let d2n = euclidean(&r.d2);
        let cos: f64 = last.iter().zip(&r.d2).map(|(x, y)| x * y).sum::<f64>() / d2n;
        assert!((cos.abs() - 1.0).abs() < 1e-12);
        for x in r.trajectory.final_state() {
            assert!((x - 3.5 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn tied_dominant_rejected() {
        let a = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(
            power_ac(&a, &[1.0, 0.0], 3, Normalization::None).unwrap_err(),
            Error::TiedDominantEigenvalues
        );
    }
}

use serde::{Deserialize, Serialize};

use super::{Metadata, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{ensure_len, ensure_square, mat_vec, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NagParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub iters: usize,
}

impl NagParams {
    /// `alpha = 0.15`, `beta = sigma = 0.85`.
    pub fn tuned(iters: usize) -> Self {
        NagParams {
            alpha: 0.15,
            beta: 0.85,
            sigma: 0.85,
            iters,
        }
    }

    fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) || !unit(self.beta) || !unit(self.sigma) {
            return Err(Error::InvalidParameter(format!(
                "NAG parameters out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Nesterov-accelerated consensus:
/// `q_i = beta q_{i-1} + alpha L (w_{i-1} - sigma q_{i-1})`, `w_i = w_{i-1} - q_i`.
///
/// Each entry of `L x` only touches neighbors, so every update is local.
pub fn nag_run(
    laplacian: &DenseMatrix,
    w0: &[f64],
    params: NagParams,
    target: &[f64],
) -> Result<Trajectory> {
    let n = w0.len();
    ensure_len(ensure_square(laplacian)?, n)?;
    ensure_len(n, target.len())?;
    params.validate()?;
    let meta = Metadata::new("nag")
        .param("alpha", params.alpha)
        .param("beta", params.beta)
        .param("sigma", params.sigma)
        .param("iters", params.iters as f64);
    let mut t = Trajectory::new(w0.to_vec(), target.to_vec(), meta);
    let mut w = w0.to_vec();
    let mut q = vec![0.0; n];
    for _ in 0..params.iters {
        let look: Vec<f64> = w
            .iter()
            .zip(&q)
            .map(|(wi, qi)| wi - params.sigma * qi)
            .collect();
        let lz = mat_vec(laplacian, &look);
        for k in 0..n {
            q[k] = params.beta * q[k] + params.alpha * lz[k];
            w[k] -= q[k];
        }
        t.push(w.clone());
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterative::{consensus_target, run_linear, Operators};
    use crate::{Graph, LaplacianKind};

    fn p3() -> DenseMatrix {
        Graph::new(3, false, [(1, 2, 1.0), (2, 3, 1.0)])
            .unwrap()
            .laplacian(LaplacianKind::UnnormalizedConstant)
            .unwrap()
    }

    #[test]
    fn consensus_input_is_fixed() {
        let t = nag_run(&p3(), &[4.0; 3], NagParams::tuned(20), &[4.0; 3]).unwrap();
        assert!(t.states.iter().all(|s| s == &vec![4.0; 3]));
    }

    #[test]
    fn zero_alpha_is_constant() {
        let p = NagParams {
            alpha: 0.0,
            ..NagParams::tuned(10)
        };
        let w0 = [0.0, 3.0, 3.0];
        let t = nag_run(&p3(), &w0, p, &[2.0; 3]).unwrap();
        assert!(t.states.iter().all(|s| s == &w0.to_vec()));
    }

    /// Per-mode closed form: each Laplacian eigenpair evolves `(w, q)` through
    /// a fixed 2x2 matrix.
    fn modal_oracle(l: &DenseMatrix, w0: &[f64], p: NagParams) -> Vec<f64> {
        let n = w0.len();
        let s = crate::spectral::eig_decompose(l, true).unwrap();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let lam = s.values[k].re;
            let v: Vec<f64> = s.right(k).iter().map(|z| z.re).collect();
            let mut c: f64 = v.iter().zip(w0).map(|(a, b)| a * b).sum();
            let mut q = 0.0;
            for _ in 0..p.iters {
                q = (p.beta - p.alpha * lam * p.sigma) * q + p.alpha * lam * c;
                c -= q;
            }
            for i in 0..n {
                out[i] += c * v[i];
            }
        }
        out
    }

    #[test]
    fn matches_modal_oracle_on_path() {
        let l = p3();
        let w0 = [0.0, 3.0, 3.0];
        let target = consensus_target(&w0);
        let p = NagParams::tuned(60);
        let nag = nag_run(&l, &w0, p, &target).unwrap();
        let want = modal_oracle(&l, &w0, p);
        for (a, b) in nag.final_state().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        // on P3 the optimal fixed step contracts every mode by exactly 1/2,
        // faster than NAG's slowest mode (0.85)
        let a = DenseMatrix::identity(3, 3) - &l * 0.5;
        let fixed = run_linear(Operators::Fixed(&a), &w0, 60, &target).unwrap();
        assert!(fixed.errors_db[60] < nag.errors_db[60]);
        assert!(nag.errors_db[60] < -90.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = NagParams {
            beta: 1.5,
            ..NagParams::tuned(1)
        };
        assert!(nag_run(&p3(), &[0.0; 3], p, &[0.0; 3]).is_err());
    }
}

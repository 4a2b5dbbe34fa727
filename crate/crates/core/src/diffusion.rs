//! Adapt-then-project diffusion LMS: every node runs one LMS update on its
//! own sample, then the network replaces each parameter coordinate by its
//! exact average.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    build_lower_factor, exact_ac_additions, exact_ac_backsub, LowerFactor, Weighting,
};
use crate::graph::{rcm_order, Graph, LaplacianKind, Permutation};
use crate::matrix::{ensure_len, mat_vec, DenseMatrix};
use crate::spectral::kernel_projection;

/// A run is flagged as divergent once its MSD exceeds the initial one by this factor.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub n: usize,
    pub m: usize,
    /// `w_true[k]` is node `k`'s parameter vector (length `m`).
    pub w_true: Vec<Vec<f64>>,
    pub noise_var: f64,
    pub regressor_var: f64,
}

impl NetworkModel {
    /// Every node shares the same parameter vector.
    pub fn common(n: usize, w: Vec<f64>, noise_var: f64, regressor_var: f64) -> Self {
        NetworkModel {
            n,
            m: w.len(),
            w_true: vec![w; n],
            noise_var,
            regressor_var,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParameter("empty network model".into()));
        }
        ensure_len(self.n, self.w_true.len())?;
        for w in &self.w_true {
            ensure_len(self.m, w.len())?;
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidParameter(
                "noise variance must be >= 0".into(),
            ));
        }
        if !(self.regressor_var > 0.0 && self.regressor_var.is_finite()) {
            return Err(Error::InvalidParameter(
                "regressor variance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// One time step of data: node `k` observes `d[k] = u[k] . w_true[k] + v_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub d: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

/// Gaussian regressors and noise drawn from a ChaCha8 stream seeded with `seed`.
pub fn generate_stream(model: &NetworkModel, steps: usize, seed: u64) -> Result<Vec<Sample>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reg = Normal::new(0.0, model.regressor_var.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let noise = Normal::new(0.0, model.noise_var.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut d = Vec::with_capacity(model.n);
        let mut u = Vec::with_capacity(model.n);
        for k in 0..model.n {
            let row: Vec<f64> = (0..model.m).map(|_| reg.sample(&mut rng)).collect();
            let clean: f64 = row.iter().zip(&model.w_true[k]).map(|(a, b)| a * b).sum();
            let v = if model.noise_var > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            d.push(clean + v);
            u.push(row);
        }
        out.push(Sample { d, u });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorKind {
    BackSub,
    Additions,
    DenseOracle,
}

/// Exact network averaging, applied to one coordinate across all nodes.
#[derive(Debug, Clone)]
pub enum Projector {
    /// Single node: nothing to average.
    Identity,
    BackSub {
        factor: LowerFactor,
        order: Permutation,
    },
    Additions {
        factor: LowerFactor,
        order: Permutation,
    },
    DenseOracle(DenseMatrix),
}

impl Projector {
    pub fn new(g: &Graph, kind: ProjectorKind) -> Result<Self> {
        if g.n() == 1 {
            return Ok(Projector::Identity);
        }
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let factor_for = |w: Weighting| -> Result<(LowerFactor, Permutation)> {
            let order = rcm_order(g)?;
            let factor = build_lower_factor(&g.relabel(&order)?, w)?;
            Ok((factor, order))
        };
        Ok(match kind {
            ProjectorKind::BackSub => {
                let (factor, order) = factor_for(Weighting::ColumnNormalized)?;
                Projector::BackSub { factor, order }
            }
            ProjectorKind::Additions => {
                let (factor, order) = factor_for(Weighting::UnitPm1)?;
                Projector::Additions { factor, order }
            }
            ProjectorKind::DenseOracle => {
                let l = g.laplacian(LaplacianKind::UnnormalizedConstant)?;
                let c = l.rows(0, g.n() - 1).into_owned();
                Projector::DenseOracle(kernel_projection(&c)?)
            }
        })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Projector::Identity => Ok(x.to_vec()),
            Projector::BackSub { factor, order } => {
                let r = exact_ac_backsub(factor, &order.apply(x))?;
                Ok(order.unapply(&r.w))
            }
            Projector::Additions { factor, order } => {
                let r = exact_ac_additions(factor, &order.apply(x))?;
                Ok(order.unapply(&r.w))
            }
            Projector::DenseOracle(p) => {
                ensure_len(p.ncols(), x.len())?;
                Ok(mat_vec(p, x))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionState {
    pub n: usize,
    pub m: usize,
    /// Node-major stack: node `k` owns `w[k*m .. (k+1)*m]`.
    pub w: Vec<f64>,
    /// Mean-square deviation per step (linear scale), starting with the initial state.
    pub msd_history: Vec<f64>,
}

impl DiffusionState {
    pub fn zeros(n: usize, m: usize) -> Self {
        DiffusionState {
            n,
            m,
            w: vec![0.0; n * m],
            msd_history: Vec::new(),
        }
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.w[k * self.m..(k + 1) * self.m]
    }

    /// `(1/N) sum_k ||w_k - w_true_k||^2`.
    pub fn msd(&self, w_true: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for (k, t) in w_true.iter().enumerate() {
            s += self
                .node(k)
                .iter()
                .zip(t)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>();
        }
        s / self.n as f64
    }

    /// Largest difference between any node's block and node 1's.
    pub fn spread(&self) -> f64 {
        let first = self.node(0);
        (1..self.n)
            .flat_map(|k| self.node(k).iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// Local LMS update on every node, then exact averaging per coordinate.
pub fn diffuse_step(
    state: &DiffusionState,
    sample: &Sample,
    mu: f64,
    projector: &Projector,
) -> Result<DiffusionState> {
    let (n, m) = (state.n, state.m);
    ensure_len(n, sample.d.len())?;
    ensure_len(n, sample.u.len())?;
    let mut adapted = state.w.clone();
    for k in 0..n {
        let u = &sample.u[k];
        ensure_len(m, u.len())?;
        let block = &mut adapted[k * m..(k + 1) * m];
        let e = sample.d[k] - u.iter().zip(block.iter()).map(|(a, b)| a * b).sum::<f64>();
        for (wj, uj) in block.iter_mut().zip(u) {
            *wj += mu * uj * e;
        }
    }
    let mut next = state.clone();
    for j in 0..m {
        let coord: Vec<f64> = (0..n).map(|k| adapted[k * m + j]).collect();
        let avg = projector.apply(&coord)?;
        for (k, v) in avg.into_iter().enumerate() {
            next.w[k * m + j] = v;
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionRun {
    pub state: DiffusionState,
    pub msd_db: Vec<f64>,
    /// Largest node-block spread seen after any projection.
    pub max_spread: f64,
    pub diverged: bool,
    pub seed: u64,
}

/// Runs `steps` adapt-then-project iterations from a zero initial estimate.
pub fn run_diffusion(
    model: &NetworkModel,
    graph: &Graph,
    mu: f64,
    steps: usize,
    projector: ProjectorKind,
    seed: u64,
) -> Result<DiffusionRun> {
    model.validate()?;
    ensure_len(model.n, graph.n())?;
    let proj = Projector::new(graph, projector)?;
    let stream = generate_stream(model, steps, seed)?;
    let mut state = DiffusionState::zeros(model.n, model.m);
    let msd0 = state.msd(&model.w_true);
    state.msd_history.push(msd0);
    let mut max_spread = 0.0_f64;
    let mut diverged = false;
    for sample in &stream {
        state = diffuse_step(&state, sample, mu, &proj)?;
        max_spread = max_spread.max(state.spread());
        let msd = state.msd(&model.w_true);
        state.msd_history.push(msd);
        if !msd.is_finite() || msd > DIVERGENCE_FACTOR * msd0.max(f64::MIN_POSITIVE) {
            diverged = true;
            break;
        }
    }
    let msd_db = state
        .msd_history
        .iter()
        .map(|&x| {
            if x > 0.0 {
                10.0 * x.log10()
            } else {
                f64::NEG_INFINITY
            }
        })
        .map(|x| x.max(crate::iterative::ERROR_FLOOR_DB))
        .collect();
    Ok(DiffusionRun {
        state,
        msd_db,
        max_spread,
        diverged,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_connected;

    fn model(n: usize, noise: f64) -> NetworkModel {
        NetworkModel::common(n, vec![0.5, -1.0, 2.0, 0.25], noise, 1.0)
    }

    #[test]
    fn noiseless_stream_is_exact() {
        let md = model(3, 0.0);
        for s in generate_stream(&md, 5, 1).unwrap() {
            for k in 0..3 {
                let dot: f64 = s.u[k].iter().zip(&md.w_true[k]).map(|(a, b)| a * b).sum();
                assert_eq!(s.d[k], dot);
            }
        }
    }

    #[test]
    fn stream_is_seeded() {
        let md = model(4, 0.1);
        assert_eq!(
            generate_stream(&md, 10, 9).unwrap(),
            generate_stream(&md, 10, 9).unwrap()
        );
        assert_ne!(
            generate_stream(&md, 10, 9).unwrap(),
            generate_stream(&md, 10, 10).unwrap()
        );
    }

    #[test]
    fn sample_noise_variance() {
        let md = NetworkModel::common(1, vec![0.0], 0.3, 1.0);
        let s = generate_stream(&md, 10_000, 4).unwrap();
        let var = s.iter().map(|x| x.d[0] * x.d[0]).sum::<f64>() / s.len() as f64;
        assert!((var - 0.3).abs() < 0.05 * 0.3, "{var}");
    }

    #[test]
    fn zero_step_projects_only() {
        let g = Graph::new(2, false, [(1, 2, 1.0)]).unwrap();
        let p = Projector::new(&g, ProjectorKind::Additions).unwrap();
        let state = DiffusionState {
            n: 2,
            m: 1,
            w: vec![1.0, 3.0],
            msd_history: vec![],
        };
        let sample = Sample {
            d: vec![10.0, -4.0],
            u: vec![vec![1.0], vec![2.0]],
        };
        let next = diffuse_step(&state, &sample, 0.0, &p).unwrap();
        assert_eq!(next.w, vec![2.0, 2.0]);
        let again = diffuse_step(&next, &sample, 0.0, &p).unwrap();
        assert_eq!(again.w, next.w);
    }

    #[test]
    fn single_node_is_plain_lms() {
        let g = Graph::new(1, false, Vec::<(usize, usize, f64)>::new()).unwrap();
        let p = Projector::new(&g, ProjectorKind::BackSub).unwrap();
        let state = DiffusionState::zeros(1, 2);
        let sample = Sample {
            d: vec![2.0],
            u: vec![vec![1.0, -1.0]],
        };
        let next = diffuse_step(&state, &sample, 0.5, &p).unwrap();
        assert_eq!(next.w, vec![1.0, -1.0]);
    }

    #[test]
    fn projectors_agree() {
        let g = random_connected(9, 0.35, 5).unwrap();
        let x = [0.3, 1.0, -2.0, 4.0, 0.5, 0.0, 7.0, -1.5, 2.2];
        let want = x.iter().sum::<f64>() / 9.0;
        for kind in [
            ProjectorKind::BackSub,
            ProjectorKind::Additions,
            ProjectorKind::DenseOracle,
        ] {
            let y = Projector::new(&g, kind).unwrap().apply(&x).unwrap();
            assert!(y.iter().all(|v| (v - want).abs() < 1e-9), "{kind:?}");
        }
    }

    #[test]
    fn noiseless_run_converges_and_large_step_diverges() {
        let g = random_connected(6, 0.5, 2).unwrap();
        let md = model(6, 0.0);
        let r = run_diffusion(&md, &g, 0.05, 400, ProjectorKind::Additions, 3).unwrap();
        assert!(!r.diverged);
        assert!(*r.msd_db.last().unwrap() < -100.0);
        assert!(r.max_spread < 1e-10);

        let r = run_diffusion(&md, &g, 4.0, 400, ProjectorKind::Additions, 3).unwrap();
        assert!(r.diverged);

        let r = run_diffusion(&md, &g, 0.05, 0, ProjectorKind::Additions, 3).unwrap();
        assert_eq!(r.msd_db.len(), 1);
    }
}

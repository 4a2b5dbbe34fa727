//! Exact average consensus in `2N` sequential steps through a sparse
//! lower-triangular factor of a Laplacian.

mod filter;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{ensure_len, DenseMatrix};

pub use filter::{
    graph_filter_apply, graph_filter_factored, nilpotency_index, FactoredResult, GraphFilter,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every below-diagonal neighbor of column `l` gets `-1/m_l`.
    ColumnNormalized,
    /// A single `-1` per column at the nearest higher-numbered neighbor.
    UnitPm1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorColumn {
    pub diag: f64,
    /// `(row, weight)` with `row > column`, 0-based, ascending rows.
    pub below: Vec<(usize, f64)>,
}

/// `N x (N-1)` lower-triangular factor with zero column sums; `L L^T` is a
/// Laplacian of (a subgraph of) the graph it was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerFactor {
    n: usize,
    weighting: Weighting,
    columns: Vec<FactorColumn>,
}

/// Arithmetic performed by an exact run. `steps` counts sequential
/// node-to-node stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OpCounters {
    pub adds: usize,
    pub mults: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub w: Vec<f64>,
    pub counters: OpCounters,
}

/// Builds the factor from a connected undirected graph whose ordering gives
/// every node but the last a higher-numbered neighbor (see `rcm_order`).
pub fn build_lower_factor(g: &Graph, weighting: Weighting) -> Result<LowerFactor> {
    if g.is_directed() {
        return Err(Error::DirectedGraph);
    }
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "factor needs at least two nodes".into(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let adj = g.skeleton_neighbors();
    let mut columns = Vec::with_capacity(n - 1);
    for (l, nbrs) in adj.iter().enumerate().take(n - 1) {
        let later: Vec<usize> = nbrs.iter().copied().filter(|&k| k > l).collect();
        if later.is_empty() {
            return Err(Error::EmptyColumn { column: l + 1 });
        }
        let below = match weighting {
            Weighting::ColumnNormalized => {
                let w = -1.0 / later.len() as f64;
                later.into_iter().map(|k| (k, w)).collect()
            }
            Weighting::UnitPm1 => vec![(later[0], -1.0)],
        };
        columns.push(FactorColumn { diag: 1.0, below });
    }
    Ok(LowerFactor {
        n,
        weighting,
        columns,
    })
}

impl LowerFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn columns(&self) -> &[FactorColumn] {
        &self.columns
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n - 1);
        for (l, col) in self.columns.iter().enumerate() {
            m[(l, l)] = col.diag;
            for &(k, w) in &col.below {
                m[(k, l)] = w;
            }
        }
        m
    }

    /// Top `(N-1) x (N-1)` block.
    pub fn lbar(&self) -> DenseMatrix {
        self.to_dense().rows(0, self.n - 1).into_owned()
    }

    /// Last row of the factor.
    pub fn b(&self) -> Vec<f64> {
        let last = self.n - 1;
        self.columns
            .iter()
            .map(|c| {
                c.below
                    .iter()
                    .find(|&&(k, _)| k == last)
                    .map_or(0.0, |&(_, w)| w)
            })
            .collect()
    }

    /// Strictly lower part `L_o` of `lbar = D + L_o` (unit diagonal assumed).
    pub fn l0(&self) -> DenseMatrix {
        let mut m = self.lbar();
        m.fill_diagonal(0.0);
        m
    }

    /// Columns with an entry in the last row, i.e. factor neighbors of node `N`.
    pub fn last_neighbors(&self) -> Vec<usize> {
        let last = self.n - 1;
        (0..self.n - 1)
            .filter(|&l| self.columns[l].below.iter().any(|&(k, _)| k == last))
            .collect()
    }

    /// Solves `lbar^T x = rhs` (upper triangular) by backward substitution.
    fn solve_lbar_t(&self, rhs: &[f64], ops: &mut OpCounters) -> Vec<f64> {
        let m = self.n - 1;
        let mut x = rhs.to_vec();
        for l in (0..m).rev() {
            for &(k, w) in &self.columns[l].below {
                if k < m {
                    x[l] -= w * x[k];
                    ops.adds += 1;
                    ops.mults += 1;
                }
            }
            let d = self.columns[l].diag;
            if d != 1.0 {
                x[l] /= d;
                ops.mults += 1;
            }
        }
        x
    }

    /// Solves `lbar x = rhs` (lower triangular) by forward substitution.
    fn solve_lbar(&self, rhs: &[f64], ops: &mut OpCounters) -> Vec<f64> {
        let m = self.n - 1;
        let mut x = rhs.to_vec();
        for l in 0..m {
            let d = self.columns[l].diag;
            if d != 1.0 {
                x[l] /= d;
                ops.mults += 1;
            }
            let xl = x[l];
            for &(k, w) in &self.columns[l].below {
                if k < m {
                    x[k] -= w * xl;
                    ops.adds += 1;
                    ops.mults += 1;
                }
            }
        }
        x
    }
}

/// `1 / (1 + ||lbar^{-T} b^T||^2)`.
pub fn gamma(f: &LowerFactor) -> f64 {
    let mut ops = OpCounters::default();
    let x = f.solve_lbar_t(&f.b(), &mut ops);
    1.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>())
}

/// Forward pass, scalar at node `N`, broadcast to its factor neighbors,
/// backward pass.
pub fn exact_ac_backsub(f: &LowerFactor, w0: &[f64]) -> Result<ExactResult> {
    let n = f.n;
    ensure_len(n, w0.len())?;
    let g = gamma(f);
    let mut ops = OpCounters::default();
    let b = f.b();

    let w1 = f.solve_lbar(&w0[..n - 1], &mut ops);
    ops.steps += n - 1;

    let mut acc = -w0[n - 1];
    for (bl, wl) in b.iter().zip(&w1) {
        if *bl != 0.0 {
            acc += bl * wl;
            ops.adds += 1;
            ops.mults += 1;
        }
    }
    let w1n = g * acc;
    ops.mults += 1;
    ops.steps += 1;

    let w2: Vec<f64> = b
        .iter()
        .map(|&bl| {
            if bl != 0.0 {
                ops.mults += 1;
                bl * w1n
            } else {
                0.0
            }
        })
        .collect();
    ops.steps += 1;

    let mut w = f.solve_lbar_t(&w2, &mut ops);
    ops.steps += n - 1;
    w.push(-w1n);
    Ok(ExactResult { w, counters: ops })
}

/// Additions-only variant for a unit `+1/-1` factor.
///
/// Each node adds its subtree sum into its factor parent, node `N` forms the
/// total, and the scaled average flows back down the same tree. The only
/// multiplications are the `gamma` scalings: one at node `N` and one at each
/// of its factor neighbors.
pub fn exact_ac_additions(f: &LowerFactor, w0: &[f64]) -> Result<ExactResult> {
    if f.weighting != Weighting::UnitPm1 {
        return Err(Error::WrongWeighting);
    }
    let n = f.n;
    ensure_len(n, w0.len())?;
    let g = gamma(f);
    let parent: Vec<usize> = f.columns.iter().map(|c| c.below[0].0).collect();
    let mut ops = OpCounters::default();

    let mut w1 = w0.to_vec();
    for l in 0..n - 1 {
        w1[parent[l]] += w1[l];
        ops.adds += 1;
    }
    ops.steps += n - 1;
    let total = w1[n - 1];
    ops.steps += 1;

    let mut w = vec![0.0; n];
    w[n - 1] = g * total;
    ops.mults += 1;
    for l in f.last_neighbors() {
        w[l] = g * total;
        ops.mults += 1;
    }
    ops.steps += 1;

    for l in (0..n - 1).rev() {
        if parent[l] != n - 1 {
            w[l] = w[parent[l]];
        }
    }
    ops.steps += n - 1;
    Ok(ExactResult { w, counters: ops })
}

//! Shared inputs for the criterion benches.

use consensus_core::exact::{build_lower_factor, LowerFactor, Weighting};
use consensus_core::graph::{random_connected, rcm_order};
use consensus_core::{DenseMatrix, Graph, LaplacianKind};

pub const SIZES: [usize; 3] = [10, 20, 40];

/// Connected G(n, 0.3) graph, relabeled by RCM so the lower factor exists.
pub fn graph(n: usize) -> Graph {
    let g = random_connected(n, 0.3, n as u64).expect("connected sample");
    g.relabel(&rcm_order(&g).expect("rcm")).expect("relabel")
}

pub fn laplacian(g: &Graph) -> DenseMatrix {
    g.laplacian(LaplacianKind::UnnormalizedConstant)
        .expect("laplacian")
}

pub fn factor(g: &Graph, weighting: Weighting) -> LowerFactor {
    build_lower_factor(g, weighting).expect("lower factor")
}

/// Deterministic, non-constant initial values.
pub fn initial(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| ((i * 37 % 17) as f64) / 17.0 - 0.5)
        .collect()
}

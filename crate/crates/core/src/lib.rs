//! Average-consensus algorithms over graphs: iterative engines, exact
//! triangular-factor solvers and a diffusion LMS driver.
//!
//! Node indices are 1-based wherever they cross the API boundary (edge
//! lists, graph files, error messages) and 0-based inside vectors.

pub mod diffusion;
pub mod error;
pub mod exact;
pub mod graph;
pub mod iterative;
pub mod matrix;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, LaplacianKind, Permutation};
pub use matrix::{ComplexMatrix, DenseMatrix};
pub use spectral::{eig_decompose, group_eigenvalues, EigenGroups, Spectrum};

/// Bundled graph files.
pub mod fixtures {
    use crate::graph::{parse_graph, Graph};

    /// The 20-node weighted directed graph shipped as `fixtures/appendix_a.graph`.
    pub const APPENDIX_A: &str = include_str!("../fixtures/appendix_a.graph");

    pub fn appendix_a() -> Graph {
        parse_graph(APPENDIX_A).expect("bundled fixture parses")
    }
}

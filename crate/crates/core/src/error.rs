use thiserror::Error;

/// Errors raised by the consensus algorithms and their supporting linear algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: usize, to: usize },

    #[error("edge ({from}, {to}) has a non-finite weight")]
    NonFiniteWeight { from: usize, to: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("node {0} has zero degree")]
    ZeroDegreeNode(usize),

    #[error("operation requires an undirected graph")]
    DirectedGraph,

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not diagonalizable (reconstruction residual {residual:.3e})")]
    DefectiveMatrix { residual: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("constraint matrix is rank deficient")]
    RankDeficient,

    #[error("singular pivot in C1 * C2^T")]
    SingularPivot,

    #[error("not a connected-graph Laplacian spectrum: {0}")]
    NotLaplacianSpectrum(String),

    #[error("step size requested for a (near-)zero eigenvalue")]
    ZeroEigenvalueStep,

    #[error("eigenvector entry {index} is zero; rescaling is undefined")]
    ZeroEigenvectorEntry { index: usize },

    #[error("normalizer lambda_i - lambda_N vanishes")]
    DegenerateNormalizer,

    #[error("imaginary residue {magnitude:.3e} exceeds tolerance")]
    ImaginaryResidue { magnitude: f64 },

    #[error("dominant eigenvalue is not strictly larger in magnitude than the next one")]
    TiedDominantEigenvalues,

    #[error("division by a zero eigenvalue")]
    DivisionByZeroEigenvalue,

    #[error("column {column} of the lower factor has no entry below the diagonal")]
    EmptyColumn { column: usize },

    #[error("operation requires a unit (+1/-1) weighted factor")]
    WrongWeighting,

    #[error("matrix is not strictly lower triangular")]
    NotStrictlyLowerTriangular,

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

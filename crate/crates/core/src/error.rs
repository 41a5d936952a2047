use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("points belong to different algebras")]
    AlgebraMismatch,

    #[error("dilation factor must be positive, got {0}")]
    InvalidDilation(f64),

    #[error("basis index ({r},{i}) out of range")]
    IndexOutOfRange { r: usize, i: usize },

    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("degenerate cloud: {0}")]
    DegenerateCloud(String),

    #[error("matrix is rank deficient (det(TT*) = {det:e})")]
    Singular { det: f64 },

    #[error("Gram-Schmidt prefix {len} is degenerate (wedge ratio {ratio:e})")]
    DegeneratePrefix { len: usize, ratio: f64 },

    #[error("orthogonal complement is trivial (m = D = {0})")]
    NoComplement(usize),

    #[error("resample budget exhausted after {resamples} resamples, {surviving} events remain")]
    ResampleBudget { resamples: usize, surviving: usize },

    #[error("point {0} is not covered by any tent of the net")]
    NotCovered(usize),

    #[error("frame extension diagnostics failed: {0}")]
    ExtensionFailed(String),

    #[error("optimizer did not reach the endpoint (residual {residual:e}, tolerance {tol:e})")]
    Infeasible { residual: f64, tol: f64 },

    #[error("grid step {step} too coarse for kernel radius {radius} along coordinate {coord}")]
    ResolutionTooCoarse { coord: usize, step: f64, radius: f64 },

    #[error("request too large: estimated {estimated} points exceeds budget {budget}")]
    TooLarge { estimated: usize, budget: usize },

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("missing artifacts, expected one of: {0:?}")]
    MissingArtifacts(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

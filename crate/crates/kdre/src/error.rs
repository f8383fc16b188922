use thiserror::Error;

/// Errors raised while constructing or fitting model objects.
///
/// Evaluation paths (kernel evaluation, estimates at a point) treat bad
/// dimensions as contract violations and panic instead; only fallible
/// construction and fitting go through `Result`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KdreError {
    #[error("point must have at least one coordinate")]
    EmptyPoint,
    #[error("coordinate {index} is not finite")]
    NonFiniteCoordinate { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample set must contain at least one point")]
    EmptySample,
    #[error("sample data length {len} is not a multiple of dimension {dim}")]
    RaggedSample { len: usize, dim: usize },
    #[error("covariance matrix must be {dim}x{dim}, got {len} entries")]
    CovarianceShape { dim: usize, len: usize },
    #[error("covariance matrix is not symmetric at ({i}, {j}) within 1e-12")]
    CovarianceNotSymmetric { i: usize, j: usize },
    #[error("covariance matrix is not positive definite")]
    CovarianceNotPositiveDefinite,
    #[error("bandwidth {name} must be a positive finite number, got {value}")]
    NonPositiveBandwidth { name: &'static str, value: f64 },
    #[error("expected {expected} smoothing parameters for dimension {dim}, got {got}")]
    EpsilonCount {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("grid axis {axis}: lower bound must be strictly below upper bound")]
    GridBounds { axis: usize },
    #[error("grid axis {axis}: count must be at least 1")]
    GridCounts { axis: usize },
    #[error("kernel dimension must be at least 1")]
    ZeroKernelDimension,
    #[error("unknown kernel family `{0}`")]
    UnknownKernelFamily(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("channel `{channel}` has {got} values, expected {expected}")]
    ChannelLength {
        channel: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("channel `{channel}` is negative at cell {index} although the cell is not flagged")]
    NegativeChannelValue { channel: &'static str, index: usize },
    #[error("channel `{channel}` is not finite at cell {index}")]
    NonFiniteChannelValue { channel: &'static str, index: usize },
    #[error("flag vector has {got} entries, expected {expected}")]
    FlagLength { expected: usize, got: usize },
    #[error("sample count must be at least 1")]
    ZeroSampleCount,
    #[error("coordinate order {order:?} is not a permutation of 0..{dim}")]
    InvalidCoordinateOrder { order: Vec<usize>, dim: usize },
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e}, threshold {eps:e})")]
    NotPositiveDefinite { min_eig: f64, eps: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("singular fraction {fraction} exceeds the cap {cap}")]
    TooSingular { fraction: f64, cap: f64 },
    #[error("region is empty")]
    EmptyRegion,
    #[error("every node is singular")]
    AllSingular,
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("metrics are not in the same component (infinite distance)")]
    NotInSameComponent,
    #[error("sequence is not Cauchy: consecutive distance between terms {first} and {second} is {distance:e}")]
    NotCauchy { first: usize, second: usize, distance: f64 },
    #[error("mollifier radius {epsilon} exceeds the chart extent")]
    EpsilonTooLarge { epsilon: f64 },
    #[error("mollifier support at node {node} contains only singular nodes")]
    EmptyKernelSupport { node: usize },
    #[error("source node {0} is singular")]
    SourceSingular(usize),
    #[error("image point of node {node} lies outside the target chart")]
    ImageOutOfChart { node: usize },
    #[error("every node of cell {cell} is singular")]
    SingularCell { cell: usize },
    #[error("coefficient field is not self-adjoint at node {node} (defect {defect:e})")]
    NotSymmetric { node: usize, defect: f64 },
    #[error("linear solver stalled with relative residual {residual:e}")]
    SolverDivergence { residual: f64 },
    #[error("heat kernel is not positive at time {time}")]
    NonPositiveKernel { time: f64 },
    #[error("ball has {nodes} nodes, at least 8 are required")]
    BallTooSmall { nodes: usize },
    #[error("construction requires dimension {expected}, chart has {found}")]
    DimensionError { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite feature")]
    NonFiniteFeature,
    #[error("invalid label {0}: labels must be -1 or +1")]
    InvalidLabel(i64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("axis {axis} out of range for {axis_count} axes")]
    AxisOutOfRange { axis: usize, axis_count: usize },
    #[error("sample exceeds population: t = {t}, d = {d}")]
    SampleExceedsPopulation { t: usize, d: usize },
    #[error("prior excludes good axes")]
    PriorExcludesGoodAxes,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dense simulation limit: {qubits} qubits exceeds the limit of {limit}")]
    DenseSimulationLimit { qubits: usize, limit: usize },
    #[error("pauli index {index} out of range for {qubits} qubits")]
    PauliIndexOutOfRange { index: usize, qubits: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("single-class input: both labels are required")]
    SingleClass,
    #[error("subsample of {requested} exceeds training split of {available}")]
    SubsampleTooLarge { requested: usize, available: usize },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

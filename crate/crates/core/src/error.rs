use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} exceeds the four-qubit limit of 16")]
    DimensionOverflow(usize),

    #[error("unsupported dimension {0}: must be a power of two between 2 and 16")]
    UnsupportedDimension(usize),

    #[error("Bloch vector ({x}, {y}, {z}) has length {length} > 1")]
    UnphysicalBloch { x: f64, y: f64, z: f64, length: f64 },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("projectors do not form a complete orthogonal measurement: {0}")]
    IncompleteMeasurement(String),

    #[error("polarization eta = {0} must lie strictly inside (-1, 1)")]
    EtaOutOfRange(f64),

    #[error("eta = {0} > 0 corresponds to no non-negative inverse temperature")]
    NoPhysicalTemperature(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid hidden-state ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("saturating ensemble needs |eta| <= 1/sqrt(2), got eta = {0}")]
    SaturationInfeasible(f64),

    #[error("could not build a Gibbs-consistent ensemble after {0} attempts")]
    EnsembleSamplingFailed(usize),
}

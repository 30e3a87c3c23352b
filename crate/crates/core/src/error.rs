use thiserror::Error;

use crate::field::VerificationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty domain: no lattice node lies in the described set")]
    EmptyDomain,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node set belongs to a lattice of {expected} nodes, got {got}")]
    LatticeMismatch { expected: usize, got: usize },

    #[error("node set is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("pole of inversion: point coincides with the inversion centre")]
    PoleOfInversion,

    #[error("kernel argument must be positive, got {0}")]
    KernelDomain(f64),

    #[error("undefined extended-real operation: {0}")]
    UndefinedArithmetic(&'static str),

    #[error("inversion image escapes source domain at {0:?}")]
    InversionEscapes(Vec<f64>),

    #[error("sphere around {center:?} with radius {radius} exits the field domain")]
    SphereExitsDomain { center: Vec<f64>, radius: f64 },

    #[error("node {0} is not an interior node")]
    NotInterior(usize),

    #[error("node {0} has no lattice neighbour in the requested set")]
    NoNeighbour(usize),

    #[error("solver did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("point {0:?} is not an interior node of the domain")]
    PoleOutsideDomain(Vec<f64>),

    #[error("degenerate Green minimum: M_g = {0}")]
    DegenerateGreenMinimum(f64),

    #[error("minus infinity on the boundary of the continuation layer at node {0}")]
    MinusInfinityOnLayerBoundary(usize),

    #[error("hypothesis `{}` failed: {}", .0.name, .0.detail)]
    Hypothesis(Box<VerificationReport>),

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("capacity: {0}")]
    Capacity(String),

    #[error("field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error once stage labels are peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

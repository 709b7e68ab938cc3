use thiserror::Error;

use crate::network::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("zero-length segment")]
    ZeroLength,
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("vertex {0} has degree zero")]
    DegreeZero(usize),
    #[error("validate first: {0}")]
    Invalid(ValidationReport),
    #[error("region count mismatch: {0} vs {1}")]
    RegionCountMismatch(usize, usize),
    #[error("deformation radius must be positive and at most the guard's max displacement")]
    DeformationRadius,
    #[error("remesh bounds violated: need 0 < l_min < l_max and l_max >= 3 l_min")]
    RemeshBounds,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow config: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("step rejected at t = {t}: {report}")]
    StepRejected { t: f64, report: ValidationReport },
    #[error("duration must be positive")]
    NonPositiveDuration,
    #[error("frame sink failed: {0}")]
    Sink(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("vertex {0} is an endpoint (degree < 2)")]
    Endpoint(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("need at least 3 radii, decreasing and positive")]
    BadRadii,
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("not flat: junction of degree {degree} at ({x}, {y})")]
    NotFlat { degree: usize, x: f64, y: f64 },
    #[error("not a graph over the axis: {0}")]
    NotGraph(String),
    #[error("sheet needs at least 3 samples")]
    ShortSheet,
}

//! Curvature flow of labeled planar networks by alternating a
//! length-reducing deformation sweep with motion along the mollified mean
//! curvature, plus a regularity analyzer for the resulting states.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod mollify;
pub mod network;
pub mod scalar;
pub mod varifold;

pub use analysis::{AnalyzerConfig, ConeLabel, JunctionKind};
pub use error::{AnalysisError, FlowError, GeometryError, NetworkError};
pub use flow::FlowConfig;
pub use mollify::{HMode, Quadrature};
pub use network::{validate, Edge, Label, ValidationReport, Violation};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Segment = geometry::Segment<f64>;
pub type Network = network::Network<f64>;
pub type Varifold = varifold::Varifold1<f64>;
pub type Kernel = mollify::Kernel<f64>;
pub type AdmissibilityGuard = network::AdmissibilityGuard<f64>;
pub type DeficitReport = network::DeficitReport<f64>;
pub type StepReport = flow::StepReport<f64>;
pub type TestFunctionBank = flow::TestFunctionBank<f64>;
pub type TrajectorySummary = flow::TrajectorySummary<f64>;
pub type JunctionClassification = analysis::JunctionClassification<f64>;
pub type ConeFit = analysis::ConeFit<f64>;
pub type GraphPatch = analysis::GraphPatch<f64>;
pub type Sheet = analysis::Sheet<f64>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("polynomial order must be at least 1")]
    OrderZero,
    #[error("over-integration needs at least {} points for order {order}, got {points}", order + 1)]
    TooFewQuadraturePoints { points: usize, order: usize },
    #[error("Newton iteration for the order-{order} rule did not converge")]
    NoConvergence { order: usize },
    #[error("quadrature rule has a nonpositive weight")]
    NonPositiveWeight,
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh needs at least one element")]
    NoElements,
    #[error("interval is empty or inverted: [{left}, {right}]")]
    InvertedInterval { left: f64, right: f64 },
    #[error("element breaks must be strictly increasing (break {index})")]
    NonIncreasingBreaks { index: usize },
    #[error("periodic boundaries must be set on both ends or neither")]
    MixedPeriodic,
    #[error("element index {index} out of range for {count} elements")]
    InvalidElement { index: usize, count: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be positive, found {value} at {location}")]
    NonPositive {
        name: &'static str,
        value: f64,
        location: f64,
    },
    #[error("flux blend alpha must lie in [0, 1], found {0}")]
    AlphaOutOfRange(f64),
    #[error("the adjoint and gradient pipeline requires alpha = 0, found {0}")]
    AdjointNeedsUpwind(f64),
    #[error("boundary kind {kind} is not supported by the {model} model")]
    UnsupportedBoundary { model: &'static str, kind: String },
    #[error("parameter vector has length {found}, layout expects {expected}")]
    ParameterLength { expected: usize, found: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("time step must be positive, found {0}")]
    NonPositiveStep(f64),
    #[error("non-finite value in the {which} solution at step {step}")]
    NonFinite { which: &'static str, step: usize },
    #[error("stage states for step {0} are not available")]
    MissingStages(usize),
    #[error("checkpoint interval must be at least 1")]
    ZeroInterval,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("observation trajectory has {found} snapshots of length {len}, expected {expected} of length {expected_len}")]
    ObservationShape {
        expected: usize,
        expected_len: usize,
        found: usize,
        len: usize,
    },
    #[error("boundary cost is only supported at the advection outflow boundary")]
    UnstableBoundaryCost,
    #[error("regularization coefficient must be nonnegative, found {0}")]
    NegativeBeta(f64),
    #[error("component index {index} out of range for {count} components")]
    BadComponent { index: usize, count: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradientError {
    #[error("direction has length {found}, parameter layout expects {expected}")]
    LayoutMismatch { expected: usize, found: usize },
    #[error("adjoint trajectory was computed for a different cost specification")]
    CostTagMismatch,
    #[error("trajectories disagree: {0}")]
    TrajectoryMismatch(String),
}

/// Top-level error for problem-level drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Gradient(#[from] GradientError),
    #[error("perturbed parameter is not admissible: {0}")]
    Positivity(String),
}

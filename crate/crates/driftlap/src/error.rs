use thiserror::Error;

/// Errors produced by mesh construction, operator assembly, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subdivision depth {requested} exceeds the limit of {limit}")]
    SubdivisionLimit { requested: u32, limit: u32 },

    #[error("torus grid must be at least 3x3, got {nu}x{nv}")]
    InvalidGrid { nu: usize, nv: usize },

    #[error("OFF parse error at line {line}: {message}")]
    OffParse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("triangle {index} is degenerate (area {area:e} below threshold {threshold:e})")]
    DegenerateTriangle {
        index: usize,
        area: f64,
        threshold: f64,
    },

    #[error("triangle index {index} out of range for {count} triangles")]
    TriangleIndexOutOfRange { index: usize, count: usize },

    #[error("assembly refused: {0}")]
    AssemblyRefused(String),

    #[error("expected {expected} per-vertex values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("energy exponent p must be >= 1, got {p}")]
    InvalidExponent { p: f64 },

    #[error("eigenpair count k={k} out of range [1, {max}]")]
    InvalidEigenCount { k: usize, max: usize },

    #[error("eigensolver tolerance {tol:e} outside [{min:e}, {max:e}]")]
    InvalidTolerance { tol: f64, min: f64, max: f64 },

    #[error(
        "eigensolver did not converge within {iterations} iterations \
         (worst residual {worst_residual:e}, target {target:e})"
    )]
    NoConvergence {
        iterations: usize,
        worst_residual: f64,
        target: f64,
    },

    #[error(
        "spectral gap not resolved: first nonzero candidate {lambda1:e} \
         is below the zero-mode threshold {threshold:e}"
    )]
    GapNotResolved { lambda1: f64, threshold: f64 },

    #[error("linear solve failed after {iterations} iterations (residual {residual:e}, target {target:e})")]
    LinearSolve {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("zero vector where a nonzero one is required: {0}")]
    ZeroVector(String),

    #[error("grid scan needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("z must be positive, got {z}")]
    NonPositiveZ { z: f64 },

    #[error("bound unavailable: the curvature condition requires A > 0, got A = {a}")]
    BoundUnavailable { a: f64 },

    #[error("dimension n must be >= 2, got {n}")]
    InvalidDimension { n: u32 },

    #[error("curvature constant k must be positive, got {k}")]
    NonPositiveCurvature { k: f64 },

    #[error("invalid heat configuration: {0}")]
    InvalidHeatConfig(String),

    #[error("implicit step restriction violated: 1 - dt*c = {value} must stay positive")]
    StepRestriction { value: f64 },

    #[error(
        "eigenbasis cannot represent the initial data: reconstruction residual \
         {residual:e} exceeds {limit:e} (have {pairs} pairs)"
    )]
    InsufficientEigenbasis {
        residual: f64,
        limit: f64,
        pairs: usize,
    },

    #[error("non-finite state detected at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

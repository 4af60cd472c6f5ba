use alloc::string::String;

/// Errors raised by model validation, assembly, relaxation and analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("phase not normalized: c1^2 + c2^2 = {0}")]
    PhaseNotNormalized(f64),
    #[error("segment {segment} has nonpositive length")]
    NonPositiveLength { segment: usize },
    #[error("fully unconstrained structure: no supported degree of freedom")]
    Unsupported,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("relaxation order {order} is below the minimum order {min}")]
    OrderTooLow { order: usize, min: usize },
    #[error("monomial {0} is not indexed")]
    UnindexedMonomial(String),
    #[error("nonstructural mass matrix is indefinite (eigenvalue {0})")]
    IndefiniteMass(f64),
    #[error("peak power requires a positive excitation frequency")]
    ZeroFrequency,
    #[error("no feasible scaling found up to 2^60")]
    NoFeasibleScaling,
    #[error("design is superresonant: omega^2 = {omega2} exceeds lambda_min = {lambda_min}")]
    Superresonant { omega2: f64, lambda_min: f64 },
    #[error("load is not in the range of the dynamic stiffness (residual {0})")]
    RangeViolation(f64),
    #[error("design vector is zero after pruning")]
    ZeroDesign,
    #[error("design is infeasible (margin {0})")]
    InfeasibleDesign(f64),
    #[error("problem has no constraints")]
    NoConstraints,
    #[error("SDP solver failed: {0}")]
    Solver(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = core::result::Result<T, Error>;

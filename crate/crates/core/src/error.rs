use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate domain: the indicator rejected every candidate node ({candidates} tried)")]
    DegenerateDomain { candidates: usize },

    #[error("non-finite integrand value {value} at node {index} ({point})")]
    NonFinite {
        index: usize,
        point: String,
        value: String,
    },

    #[error("{op} is not supported for domain {domain}")]
    Unsupported { op: &'static str, domain: String },

    #[error("point {point} lies outside {domain}")]
    OutsideDomain { point: String, domain: String },

    #[error("kernel is not positive on the diagonal at {point}: K(z,z) = {value}")]
    KernelNotPositive { point: String, value: f64 },

    #[error("kernel is singular at ({z}, {xi})")]
    KernelSingular { z: String, xi: String },

    #[error("kernel vanishes at ({z}, {xi}); logarithm undefined")]
    KernelZero { z: String, xi: String },

    #[error("metric at {point} is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { point: String, min_eigenvalue: f64 },

    #[error("quadrature rule exact to degree {exact} cannot resolve a degree-{degree} basis")]
    RuleTooCoarse { degree: usize, exact: usize },

    #[error("variance real part {0:e} is negative beyond tolerance")]
    NegativeVariance(f64),

    #[error("tangent vector based at {found} used with a tensor at {expected}")]
    BaseMismatch { expected: String, found: String },

    #[error("map image {image} of {point} is not inside the target domain")]
    MapOutsideTarget { point: String, image: String },

    #[error("not a certified biholomorphism: {0}")]
    NotBiholomorphism(String),

    #[error("{point} is not on the required boundary set of {domain}")]
    NotOnBoundary { point: String, domain: String },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

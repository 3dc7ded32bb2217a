use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative order {requested} exceeds the available order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("point {point:?} lies outside the coordinate domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("metric is not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("non-finite value while evaluating {0}")]
    DomainError(String),

    #[error("graph function is not locally strongly convex at {point:?}")]
    NotConvex { point: Vec<f64> },

    #[error("target does not satisfy the `{mode}` hypothesis (residual {residual:.3e})")]
    ModeMismatch { mode: String, residual: f64 },

    #[error("section is not compactly supported inside the integration box")]
    SupportViolation,

    #[error("quadrature rule has no nodes")]
    EmptyQuadrature,

    #[error("sample grid is empty")]
    EmptyGrid,

    #[error("support box has zero volume")]
    DegenerateSupport,

    #[error("characteristic roots are complex (discriminant {0:.6e})")]
    ComplexRoots(f64),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("variation leaves the target domain at t = {t}")]
    DomainEscape { t: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

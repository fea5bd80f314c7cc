use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve is degenerate at t = {t}: |gamma'| = {speed:e}")]
    DegenerateCurve { t: f64, speed: f64 },

    #[error("closed curve has the wrong orientation (signed area {area:e}); the outward normal must be (-y', x'), i.e. clockwise traversal")]
    WrongOrientation { area: f64 },

    #[error("curve self-intersects near parameters {s} and {t}")]
    SelfIntersectingCurve { s: f64, t: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid boundary data: {0}")]
    InvalidData(String),

    #[error("jet constant term vanishes (|x0| = {0:e})")]
    DivisionByZeroJet(f64),

    #[error("jets expanded at different base points ({0} vs {1})")]
    BaseMismatch(f64, f64),

    #[error("radius fit needs at least {needed} usable coefficients, found {found}")]
    InsufficientOrder { needed: usize, found: usize },

    #[error("boundary data is only available on a grid; a coefficient form is required")]
    GridOnlyData,

    #[error("operation is defined only for closed curves")]
    OpenCurveUnsupported,

    #[error("quadrature did not reach tolerance {tol:e} (last error estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("inverse flattening map did not converge for point ({x}, {y})")]
    InversionFailure { x: f64, y: f64 },

    #[error("the entire-data hypothesis was not declared for this data")]
    HypothesisNotDeclared,

    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;

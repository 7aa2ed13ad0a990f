//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("matrix dimension {0} exceeds the cofactor-expansion limit of 8")]
    DimensionTooLarge(usize),
}

/// A constraint violation found by state validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("zero entry at {kind} index {site} (layer {layer})")]
    ZeroEntry {
        kind: &'static str,
        layer: usize,
        site: usize,
    },
    #[error("layer {layer} product equals the V product; the evolution would not be unique")]
    ProductCollision { layer: usize },
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid state: {0}")]
    Invalid(Violation),
    #[error("singular evolution: {0}")]
    SingularEvolution(String),
    #[error("degenerate root: the companion root coincides with the trivial one")]
    DegenerateRoot,
    #[error("root selection failure: the selected root does not conserve the layer product")]
    RootSelectionFailure,
    #[error("step {index} failed: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<LatticeError>,
    },
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("non-invertible factor: {0} has zero determinant")]
    NonInvertibleFactor(&'static str),
    #[error("conjugated matrix has non-polynomial entries after exact division")]
    InexactConjugation,
    #[error("special point mismatch: roots of y*F(0,y) differ from the expected point set")]
    SpecialPointMismatch,
}

#[derive(Debug, Error)]
pub enum CurveError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Spectral(#[from] Box<SpectralError>),
    #[error("ill-conditioned fiber at y = {y}: residual {residual:.3e} exceeds tolerance")]
    IllConditionedFiber { y: num_complex::Complex64, residual: f64 },
    #[error("eigenvector extraction failed: relative residual {0:.3e}")]
    BadEigenvector(f64),
    #[error(
        "eigenvector component at the floating-point noise floor (|g_i|/|g| = {0:.3e}); \
         the outer radius is too large for this lattice period"
    )]
    ComponentBelowNoiseFloor(f64),
    #[error("repeated eigenvalue: fiber roots separated by less than 1e-10 relative")]
    RepeatedEigenvalue,
    #[error("boundary limits did not converge: spread {spread:.3e} above tolerance {tol:.3e}")]
    NoConvergence { spread: f64, tol: f64 },
    #[error("degenerate divisor: {0}")]
    DegenerateDivisor(String),
    #[error("operation requires gcd(N, M) = 1, got N = {n}, M = {m}")]
    NotCoprime { n: usize, m: usize },
    #[error("divisor extraction is implemented for N = 2 only, got N = {0}")]
    UnsupportedPeriod(usize),
}

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("requires N = 2, M = 1, got N = {n}, M = {m}")]
    UnsupportedShape { n: usize, m: usize },
    #[error("singular spectral curve: {0}")]
    CurveSingular(String),
    #[error("quadrature did not converge: node doubling moved the result by {0:.3e}")]
    QuadratureNoConverge(f64),
    #[error("sheet tracking lost: {0}")]
    SheetTrackingLost(String),
    #[error("period matrix has non-positive-definite imaginary part")]
    BadPeriodMatrix,
    #[error("value is not a lattice point: residual {0:.3e}")]
    NotLatticePoint(f64),
    #[error("theta value below 1e-12 at grid cell (n = {n}, t = {t}); divisor collision")]
    ThetaZeroHit { n: i64, t: i64 },
    #[error("calibration drift: {quantity} varies by {deviation:.3e} across the grid")]
    CalibrationDrift { quantity: &'static str, deviation: f64 },
}

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("lifted state violates the uniqueness constraint: {0}")]
    ConstraintViolated(Violation),
    #[error("trajectory too short: need time {needed}, have {available}")]
    TrajectoryTooShort { needed: usize, available: usize },
    #[error("identity mismatch at coefficient x^{x_deg} y^{y_deg} for zeta = {zeta}")]
    IdentityMismatch { x_deg: u32, y_deg: i64, zeta: String },
    #[error("experiment requires {0}")]
    BadExperiment(String),
}

#[derive(Debug, Error)]
pub enum StateFileError {
    #[error("read error: {0}")]
    Read(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(Violation),
}

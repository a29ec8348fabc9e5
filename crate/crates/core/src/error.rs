use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spectral parameter {re}{im:+}i lies on the cut i(-inf, 0]")]
    BranchCut { re: f64, im: f64 },
    #[error("quadrature did not converge (error estimate {estimate:.3e}, tolerance {tol:.3e})")]
    QuadratureNonConverged { estimate: f64, tol: f64 },
    #[error("series tail kernels exist only for n in 1..=3, got {0}")]
    UnsupportedOrder(usize),
    #[error("spectrum reaches {lambda_max:.4}, beyond the grid Nyquist radius {nyquist:.4}")]
    AliasedSpectrum { lambda_max: f64, nyquist: f64 },
    #[error("radius {rho} outside the sampled domain (max {max})")]
    OutOfDomain { rho: f64, max: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("potential has empty support")]
    EmptySupport,
    #[error("Birman-Schwinger operator numerically singular at lambda = {lambda} (sigma_min = {sigma_min:.3e})")]
    SingularAtLambda { lambda: f64, sigma_min: f64 },
    #[error("offset y must be non-zero")]
    ZeroOffset,
    #[error("multiplier failed the derivative certificate: {0}")]
    NotGmu(String),
    #[error("first moments are degenerate (|phi_{axis}| = {norm:.3e})")]
    DegenerateMoments { axis: usize, norm: f64 },
    #[error("classification is borderline (sigma_min / sigma_max = {ratio:.3e})")]
    Borderline { ratio: f64 },
    #[error("potential is singular at zero energy")]
    SingularPotential,
    #[error("lambda = {lambda} outside the admissible window {range}")]
    LambdaOutOfRange { lambda: f64, range: String },
    #[error("Jensen-Nenciu B operator is not invertible (sigma_min = {0:.3e})")]
    BNotInvertible(f64),
    #[error("Schur complement or diagonal block is singular (sigma_min = {0:.3e})")]
    SchurSingular(f64),
    #[error("matrix is singular (sigma_min = {0:.3e})")]
    Singular(f64),
    #[error("kernel is not integrable: {0}")]
    KernelNotIntegrable(String),
    #[error("majorant integral diverges: {0}")]
    MajorantDiverges(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

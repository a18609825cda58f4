use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("argument {0} outside the analyticity strip |Im| < {1}")]
    Domain(String, f64),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("fermi boundary not bracketed: eps(q_min)={0:.3e}, eps(q_max)={1:.3e}")]
    BracketFailure(f64, f64),
    #[error("root search did not converge: {0}")]
    NoConvergence(String),
    #[error("saddle point: {0}")]
    Saddle(#[from] SaddleError),
    #[error("argument {0} hits the zero set of the Barnes function")]
    BarnesPole(String),
    #[error("resonance: |exp(-2i pi nu) - 1| = {0:.3e} at {1}")]
    Resonance(f64, String),
    #[error("contour geometry: {0}")]
    Contour(String),
    #[error("point {0} is too close to the cut [-q, q]")]
    NearCut(String),
    #[error("ratio mismatch: report built at t/x={0}, evaluated at t/x={1}")]
    RatioMismatch(f64, f64),
    #[error("light cone: |x - vF t| = {0:.3e} too small")]
    LightCone(f64),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("enumeration of {0} terms exceeds the size guard")]
    SizeGuard(u128),
    #[error("contraction condition violated: {0}")]
    Contraction(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaddleError {
    #[error("MultipleSaddles: u' changes sign {0} times in the scan range")]
    MultipleSaddles(usize),
    #[error("NoSaddle: u' has no sign change on [-{0}, {0}]")]
    NoSaddle(f64),
    #[error("DegenerateSaddle: lambda0={0} coincides with a Fermi point")]
    DegenerateSaddle(f64),
    #[error("OutsideRegime: lambda0={0} < -q")]
    OutsideRegime(f64),
    #[error("InvalidRatio: t/x={0} must be positive")]
    InvalidRatio(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

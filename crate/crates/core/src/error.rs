use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pole on evaluation contour at omega = {omega} rad/s")]
    PoleOnContour { omega: f64 },
    #[error("norm undefined for unstable system (max pole real part {max_real})")]
    Unstable { max_real: f64 },
    #[error("algebraic loop: {0}")]
    AlgebraicLoop(String),
    #[error("bilinear map undefined: eigenvalue at 2/Ts = {0}")]
    TustinSingular(f64),
    #[error("riccati equation: {0}")]
    Riccati(String),
    #[error("synthesis failed: {0}")]
    Synthesis(String),
    #[error("euler angle singularity: |theta| = {theta} rad")]
    Singularity { theta: f64 },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid dimension {0}: ambient dimension must be at least 2")]
    InvalidDimension(usize),
    #[error("H-to-V conversion unsupported at this dimension (d = {0})")]
    UnsupportedDimension(usize),
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("unbounded")]
    Unbounded,
    #[error("degenerate hull")]
    DegenerateHull,
    #[error("sample not in body")]
    SampleNotInBody,
    #[error("envelope too loose (acceptance rate {0:e})")]
    EnvelopeTooLoose(f64),
    #[error("singular affine map")]
    SingularMap,
    #[error("enclosing ellipsoid did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("nonconvex polygon")]
    NonConvex,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lambda = {re}{im:+}i lies outside the admissible region")]
    OutsideRegion { re: f64, im: f64 },
    #[error("degenerate case: {0}")]
    DegenerateCase(String),
    #[error("principal branch violated: {0}")]
    Branch(String),
    #[error("near-singular symbol: {0}")]
    NearSingular(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("quadrature did not converge (achieved error {achieved:.3e})")]
    Quadrature { achieved: f64 },
    #[error("divergent iteration (measured ratio {ratio:.6})")]
    Divergence { ratio: f64 },
    #[error("interpolation outside the sampled domain: {0}")]
    OutOfDomain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl LabError {
    /// True for errors that come from the numerics rather than from inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::Branch(_)
                | LabError::NearSingular(_)
                | LabError::SingularSystem(_)
                | LabError::SearchFailed(_)
                | LabError::Quadrature { .. }
                | LabError::Divergence { .. }
                | LabError::OutsideRegion { .. }
        )
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

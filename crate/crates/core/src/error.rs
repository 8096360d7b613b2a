use thiserror::Error;

pub type Result<T> = std::result::Result<T, WaveError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// A weight function that must be nonnegative dipped below the tolerance.
    #[error("nonnegativity violated at node {node} (x = {x}): value {value}")]
    Nonnegativity { node: usize, x: f64, value: f64 },

    /// The potential is negative somewhere on the quadrature grid.
    #[error("potential sign violated at node {node} (x = {x}): V = {value}")]
    PotentialSign { node: usize, x: f64, value: f64 },

    #[error("step size {dt} violates the {guard} guard; use dt <= {suggested}")]
    StepSize {
        guard: &'static str,
        dt: f64,
        suggested: f64,
    },

    /// A mollified point mass would leak through an endpoint.
    #[error("mollifier support [{lo}, {hi}] around x0 = {location} leaves the domain (0, {length})")]
    BoundaryClipping {
        location: f64,
        lo: f64,
        hi: f64,
        length: f64,
    },

    #[error("boundary data inconsistent with initial data (max residual {max_residual})")]
    Consistency { max_residual: f64 },

    #[error("unsupported check {check}: {reason}")]
    UnsupportedCheck {
        check: &'static str,
        reason: &'static str,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("solve failed at eps = {eps}: {source}")]
    Sweep {
        eps: f64,
        #[source]
        source: Box<WaveError>,
    },
}

impl WaveError {
    /// Name of the numerical guard that produced this error, if any.
    pub fn guard_name(&self) -> Option<&'static str> {
        match self {
            WaveError::StepSize { guard, .. } => Some(guard),
            WaveError::PotentialSign { .. } => Some("potential-sign"),
            WaveError::Nonnegativity { .. } => Some("nonnegativity"),
            WaveError::BoundaryClipping { .. } => Some("boundary-clipping"),
            WaveError::Consistency { .. } => Some("boundary-consistency"),
            WaveError::Sweep { source, .. } => source.guard_name(),
            _ => None,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        WaveError::InvalidArgument(msg.into())
    }
}

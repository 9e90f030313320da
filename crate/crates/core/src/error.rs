use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown medium generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed reaction profile: {0}")]
    MalformedProfile(String),

    #[error("time step {dt} exceeds the monotonicity bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("off-diagonal diffusion {cross} exceeds the diagonal minimum {diag}; the 7-point stencil is not positive")]
    MixedStencil { cross: f64, diag: f64 },

    #[error("kernel fails its envelope bounds: {0}")]
    InvalidKernel(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("horizon {horizon} exceeded: {what}")]
    HorizonExceeded { horizon: f64, what: String },

    #[error("{count} cube pieces exceed the cap of {cap}")]
    CubeCap { count: usize, cap: usize },

    #[error("unresolved passage time: {0}")]
    Unresolved(String),

    #[error("missing shape: {0}")]
    MissingShape(String),

    #[error("configuration error(s):\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownGenerator(_) => "unknown_generator",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::MalformedProfile(_) => "malformed_profile",
            Error::Cfl { .. } => "cfl",
            Error::MixedStencil { .. } => "mixed_stencil",
            Error::InvalidKernel(_) => "invalid_kernel",
            Error::Hypothesis(_) => "hypothesis",
            Error::DomainTooSmall(_) => "domain_too_small",
            Error::HorizonExceeded { .. } => "horizon_exceeded",
            Error::CubeCap { .. } => "cube_cap",
            Error::Unresolved(_) => "unresolved",
            Error::MissingShape(_) => "missing_shape",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

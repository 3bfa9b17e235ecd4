use thiserror::Error;

/// Errors produced by operator construction, quadrature and model checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An operator axiom (OP3-b, OP4, ...) does not hold for the requested spec.
    #[error("spec violation ({axiom}): {detail}")]
    SpecViolation { axiom: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A resolvent was requested too close to the spectrum.
    #[error("near-singular resolvent: point {point} is within {distance:.3e} of the spectrum (min gap {min_gap:.1e})")]
    NearSingular { point: String, distance: f64, min_gap: f64 },

    #[error("singular: {0}")]
    Singular(String),

    #[error("no convergence after {nodes} nodes per side (best residual {best_residual:.3e}, tolerance {tol:.1e})")]
    NoConvergence { nodes: usize, best_residual: f64, tol: f64 },

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    /// `Y` is outside the parameter space: sigma_Y is empty or `Y` equals |Im s| of an eigenvalue.
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid q = {0}: q must lie in (0,1) or (1,inf)")]
    InvalidQ(f64),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("{stage}: {source}")]
    AtStage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        Error::AtStage { stage: stage.into(), source: Box::new(self) }
    }

    /// The innermost error, with stage tags peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attach a stage tag to the error of a `Result`.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}

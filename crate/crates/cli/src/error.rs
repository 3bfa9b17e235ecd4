use std::fmt;
use std::path::Path;

use ait_core::Error;

/// Outcome of a command that did not finish cleanly, with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Every stage ran but some checks failed.
    ChecksFailed(String),
    Core(Error),
    /// The spec parsed but fails an operator axiom.
    Spec(String),
    Config(String),
    Io(String),
    /// A sweep in which at least one scenario errored; carries the worst scenario's code.
    Scenarios {
        code: i32,
        first: String,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Spec(_) | CliError::Config(_) => 2,
            CliError::Io(_) => 4,
            CliError::Scenarios { code, .. } => *code,
            CliError::Core(e) => match e.root() {
                Error::SpecViolation { .. }
                | Error::InvalidWindow(_)
                | Error::InvalidQ(_)
                | Error::InvalidArgument(_) => 2,
                Error::NearSingular { .. }
                | Error::Singular(_)
                | Error::NoConvergence { .. }
                | Error::InvalidProjection(_)
                | Error::InternalInconsistency(_) => 3,
                Error::AtStage { .. } => unreachable!("root strips stage tags"),
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::ChecksFailed(s) => write!(f, "checks failed: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Spec(s) => write!(f, "spec validation: {s}"),
            CliError::Config(s) => write!(f, "configuration: {s}"),
            CliError::Io(s) => write!(f, "i/o: {s}"),
            CliError::Scenarios { first, .. } => write!(f, "sweep scenarios failed, first: {first}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_root_error() {
        let spec = Error::SpecViolation { axiom: "OP4", detail: "Re(s) = 1.5".into() };
        assert_eq!(CliError::from(spec.at_stage("operator construction")).exit_code(), 2);
        let nc = Error::NoConvergence { nodes: 4096, best_residual: 1e-6, tol: 1e-8 };
        assert_eq!(CliError::from(nc.at_stage("window Y=2").at_stage("contour quadrature")).exit_code(), 3);
        assert_eq!(CliError::from(Error::InternalInconsistency("x".into())).exit_code(), 3);
        assert_eq!(CliError::ChecksFailed("AIT2".into()).exit_code(), 1);
        assert_eq!(CliError::io(Path::new("a"), "missing").exit_code(), 4);
    }
}

use std::path::PathBuf;

/// Advice attached to every conditioning failure of the snapshot Gram matrix.
pub const TAU_GUIDANCE: &str = "start from a relatively large time step (tau comparable to sigma) \
and decrease it until cond(U*U) becomes too large";

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {param}: {reason}")]
    Invalid { param: String, reason: String },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(
        "snapshot Gram matrix U*U is numerically singular (cond = {cond:e}); \
         the snapshots overlap too much. To choose tau: {guidance}",
        guidance = TAU_GUIDANCE
    )]
    IllConditioned { cond: f64 },

    #[error("eigensolver did not converge for {role} after {iterations} iterations")]
    NoConvergence { role: String, iterations: usize },

    #[error("{stage} broke down at step {step}: {detail}")]
    Breakdown {
        stage: &'static str,
        step: usize,
        detail: String,
    },

    #[error(
        "quadrature nodes {i} and {j} nearly coincide (gap {gap:e}); the measure has fewer than n \
         points of increase (cond(U*U) = {cond:e})"
    )]
    NodeCollision {
        i: usize,
        j: usize,
        gap: f64,
        cond: f64,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    pub fn invalid(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub fn breakdown(stage: &'static str, step: usize, detail: impl Into<String>) -> Self {
        Error::Breakdown {
            stage,
            step,
            detail: detail.into(),
        }
    }

    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. } => 2,
            Error::Io { .. } | Error::Parse { .. } => 4,
            _ => 3,
        }
    }

    /// True for failures that a smaller or larger time step could cure.
    pub fn is_conditioning(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::NodeCollision { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::Breakdown { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

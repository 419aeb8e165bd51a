use thiserror::Error;

/// Errors raised by the analytical models, the optimizer and config loading.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unstable queue: offered traffic {offered} >= {servers} server(s)")]
    UnstableQueue { offered: f64, servers: u32 },

    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("singular or ill-conditioned state system: {0}")]
    SingularSystem(String),

    #[error("waiting time is undefined for a queue with zero arrival rate")]
    ZeroArrivalRate,

    #[error("exact M/D/1 formula requires a single server, got {0}")]
    NotSingleServer(u32),

    #[error("link rate is zero; transmission time is unbounded")]
    ZeroRate,

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("invalid configuration at `{key}`: {constraint}")]
    Validation { key: String, constraint: String },
}

pub type Result<T> = std::result::Result<T, Error>;

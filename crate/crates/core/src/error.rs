use thiserror::Error;

/// Errors produced by the solvers, the theory formulas and the sweep harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("n_scenarios must exceed n_assets (got n_assets={n_assets}, n_scenarios={n_scenarios})")]
    ScenarioRatio { n_assets: usize, n_scenarios: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular Wishart matrix: factorization met a non-positive pivot")]
    SingularWishart,

    #[error("degenerate mean vector: r is proportional to e (D={discriminant:e})")]
    DegenerateMeanVector { discriminant: f64 },

    #[error("infeasible risk level: eps'={eps_prime} is below the minimum-variance risk {min_risk}")]
    InfeasibleRiskLevel { eps_prime: f64, min_risk: f64 },

    #[error("invalid scenario ratio: alpha={0} must exceed 1")]
    InvalidScenarioRatio(f64),

    #[error("undefined tangency: the maximum Sharpe ratio needs a positive mean of means (m={0})")]
    UndefinedTangency(f64),

    #[error("ill-conditioned elimination: pivot block spread {spread:e} is too small")]
    IllConditionedElimination { spread: f64 },

    #[error("insufficient valid samples at x={x_value}: {n_ok} succeeded")]
    InsufficientValidSamples { x_value: f64, n_ok: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

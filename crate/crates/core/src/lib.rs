//! Finite-size mean-variance portfolio optimization in a random market.
//!
//! * [`market`] draws reproducible disorder samples (return matrix and mean
//!   vector) and factors their Wishart matrices.
//! * [`solver`] solves the risk-minimization (primal) and return-maximization
//!   (dual) problems exactly for one sample.
//! * [`theory`] evaluates the large-N quenched and annealed predictions.
//! * [`harness`] averages solver output over many samples and checks it
//!   against theory, duality and an independent QP oracle.
//! * [`cli`] and [`report`] back the `replica-portfolio` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod market;
pub mod report;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use harness::{
    compare_with_theory, duality_audit, qp_oracle, run_sweep, AuditRecord, CompareReport, SweepKind,
    SweepResult, SweepSpec,
};
pub use market::{sample_market, wishart_apply_inverse, Distribution, MarketParams, MarketSample};
pub use solver::{
    efficient_frontier, projection_scalars, solve_dual, solve_primal, Branch, DualSolution,
    PrimalSolution, ProjectionScalars,
};
pub use theory::{
    annealed_dual, annealed_primal, max_sharpe, quenched_dual, quenched_primal, EnsembleMoments,
    MaxSharpe, Regime, TheoryPoint,
};

pub use nalgebra;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

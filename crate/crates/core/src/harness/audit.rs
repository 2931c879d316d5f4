use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::market::MarketSample;
use crate::solver::{Branch, SampleProjections};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub target_return: f64,
    pub branch: Branch,
    /// |R′(ε(R)) − R|
    pub return_residual: f64,
    /// Max-norm distance between the primal and dual optimal portfolios.
    pub portfolio_residual: f64,
}

/// Solves the primal at each R, feeds its minimal risk to the dual and
/// measures how far the dual lands from the starting point.
///
/// Targets at or above the minimum-variance return b/a use the maximizing
/// branch, the rest the minimizing one.
pub fn duality_audit(sample: &MarketSample, r_grid: &[f64]) -> Result<Vec<AuditRecord>> {
    let proj = SampleProjections::new(sample)?;
    let vertex = proj.scalars().min_variance_return();
    r_grid
        .iter()
        .map(|&r| {
            let primal = proj.primal(r)?;
            let branch = if r >= vertex { Branch::Maximize } else { Branch::Minimize };
            let dual = proj.dual(primal.epsilon, branch)?;
            let portfolio_residual = primal
                .portfolio
                .iter()
                .zip(&dual.portfolio)
                .map(|(p, d)| (p - d).abs())
                .fold(0.0, f64::max);
            Ok(AuditRecord {
                target_return: r,
                branch,
                return_residual: (dual.r_extremal - r).abs(),
                portfolio_residual,
            })
        })
        .collect()
}

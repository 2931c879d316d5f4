//! Exact finite-N solvers for the primal (risk minimization) and dual
//! (return maximization) problems.
//!
//! Both problems reduce to the three quadratic forms
//! `a = eᵀJ⁻¹e/N`, `b = rᵀJ⁻¹e/N`, `c = rᵀJ⁻¹r/N` and the discriminant
//! `D = ac − b²`, computed from one Cholesky factorization of `J = XXᵀ` and
//! two triangular solves.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketSample, WishartFactor};

/// Relative threshold below which `D` is treated as zero (r ∝ e).
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Negative dual radicands down to this value are rounding noise and are clamped.
pub const RADICAND_CLAMP: f64 = 1e-12;
/// Positive dual radicands up to this value are the rounding error of ε′
/// itself (a few ulps of 2ε′a ≈ 1) and are snapped to the boundary.
pub const RADICAND_SNAP: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionScalars {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d_discriminant: f64,
}

impl ProjectionScalars {
    pub fn from_forms(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            d_discriminant: a * c - b * b,
        }
    }

    /// Expected return b/a of the budget-only risk minimizer.
    pub fn min_variance_return(&self) -> f64 {
        self.b / self.a
    }

    /// Risk 1/(2a) of the budget-only risk minimizer.
    pub fn min_variance_risk(&self) -> f64 {
        0.5 / self.a
    }

    pub fn is_degenerate(&self) -> bool {
        self.d_discriminant <= DEGENERACY_TOL * self.a * self.c
    }

    fn ensure_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateMeanVector {
                discriminant: self.d_discriminant,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalSolution {
    pub target_return: f64,
    pub epsilon: f64,
    pub portfolio: Vec<f64>,
    /// Budget multiplier.
    pub k: f64,
    /// Expected-return multiplier.
    pub theta: f64,
    pub q_w: f64,
    pub sharpe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Maximize,
    Minimize,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Maximize => 1.0,
            Branch::Minimize => -1.0,
        }
    }
}

/// Solution of the dual problem at a fixed risk level.
///
/// `k` and `theta` are the multipliers of the dual Lagrangian, where the
/// portfolio is `w = (k/θ)J⁻¹e + (1/θ)J⁻¹r`. At the minimum-variance boundary
/// θ diverges and both are reported as infinite; the portfolio stays finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub target_risk: f64,
    pub r_extremal: f64,
    pub branch: Branch,
    pub portfolio: Vec<f64>,
    pub k: f64,
    pub theta: f64,
    pub q_w: f64,
    pub sharpe: f64,
}

/// The vectors J⁻¹e and J⁻¹r of one sample together with their projections.
///
/// Everything the primal and dual solutions need, so a grid of targets costs
/// one factorization.
#[derive(Debug, Clone)]
pub struct SampleProjections {
    scalars: ProjectionScalars,
    inv_e: DVector<f64>,
    inv_r: DVector<f64>,
}

impl SampleProjections {
    pub fn new(sample: &MarketSample) -> Result<Self> {
        let factor = WishartFactor::new(sample)?;
        let n = sample.n_assets();
        let e = DVector::from_element(n, 1.0);
        let r = sample.means();
        let inv_e = factor.solve(&e)?;
        let inv_r = factor.solve(r)?;
        let nf = n as f64;
        let a = inv_e.sum() / nf;
        let b = r.dot(&inv_e) / nf;
        let c = r.dot(&inv_r) / nf;
        Ok(Self {
            scalars: ProjectionScalars::from_forms(a, b, c),
            inv_e,
            inv_r,
        })
    }

    pub fn scalars(&self) -> &ProjectionScalars {
        &self.scalars
    }

    pub fn inv_e(&self) -> &DVector<f64> {
        &self.inv_e
    }

    pub fn inv_r(&self) -> &DVector<f64> {
        &self.inv_r
    }

    fn combine(&self, coef_e: f64, coef_r: f64) -> Vec<f64> {
        self.inv_e
            .iter()
            .zip(self.inv_r.iter())
            .map(|(ue, ur)| coef_e * ue + coef_r * ur)
            .collect()
    }

    /// Minimal risk at expected return `target_return`.
    pub fn primal(&self, target_return: f64) -> Result<PrimalSolution> {
        let ProjectionScalars {
            a,
            b,
            c,
            d_discriminant: d,
        } = self.scalars;
        self.scalars.ensure_nondegenerate()?;
        // 1 = k a + θ b,  R = k b + θ c
        let k = (c - target_return * b) / d;
        let theta = (target_return * a - b) / d;
        let portfolio = self.combine(k, theta);
        let shift = target_return * a - b;
        let epsilon = 0.5 / a * (1.0 + shift * shift / d);
        let q_w = concentration(&portfolio);
        Ok(PrimalSolution {
            target_return,
            epsilon,
            portfolio,
            k,
            theta,
            q_w,
            sharpe: target_return / (2.0 * epsilon).sqrt(),
        })
    }

    /// Extremal expected return at risk `target_risk` on the chosen branch.
    pub fn dual(&self, target_risk: f64, branch: Branch) -> Result<DualSolution> {
        let ProjectionScalars {
            a,
            b,
            d_discriminant: d,
            ..
        } = self.scalars;
        self.scalars.ensure_nondegenerate()?;
        let mut radicand = (2.0 * target_risk).mul_add(a, -1.0);
        if !(radicand >= -RADICAND_CLAMP) {
            return Err(Error::InfeasibleRiskLevel {
                eps_prime: target_risk,
                min_risk: self.scalars.min_variance_risk(),
            });
        }
        if radicand <= RADICAND_SNAP {
            radicand = 0.0;
        }
        let sign = branch.sign();
        let root = radicand.sqrt();
        let sqrt_d = d.sqrt();
        // inv_theta = 1/θ stays finite at the boundary, θ itself does not.
        let inv_theta = sign * root / sqrt_d;
        let coef_e = (1.0 - b * inv_theta) / a;
        let portfolio = self.combine(coef_e, inv_theta);
        let r_extremal = b / a + sign * sqrt_d * root / a;
        let theta = sign * sqrt_d / root;
        let k = (theta - b) / a;
        let q_w = concentration(&portfolio);
        Ok(DualSolution {
            target_risk,
            r_extremal,
            branch,
            portfolio,
            k,
            theta,
            q_w,
            sharpe: r_extremal / (2.0 * target_risk).sqrt(),
        })
    }
}

fn concentration(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64
}

pub fn projection_scalars(sample: &MarketSample) -> Result<ProjectionScalars> {
    Ok(*SampleProjections::new(sample)?.scalars())
}

pub fn solve_primal(sample: &MarketSample, target_return: f64) -> Result<PrimalSolution> {
    SampleProjections::new(sample)?.primal(target_return)
}

pub fn solve_dual(sample: &MarketSample, target_risk: f64, branch: Branch) -> Result<DualSolution> {
    SampleProjections::new(sample)?.dual(target_risk, branch)
}

/// Primal solutions along a grid of target returns, sharing one factorization.
pub fn efficient_frontier(sample: &MarketSample, grid: &[f64]) -> Result<Vec<PrimalSolution>> {
    let proj = SampleProjections::new(sample)?;
    grid.iter().map(|&r| proj.primal(r)).collect()
}

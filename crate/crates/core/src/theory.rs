//! Large-N closed forms: quenched (replica) predictions at zero temperature
//! and the annealed (operations-research) counterparts.
//!
//! With `c = σ̃²(α−1)` the quenched primal is
//! `ε(R) = (c/2)(1 + (R−m)²/σ²)`, `q_w = (α/(α−1))(1 + (R−m)²/σ²)`, and the
//! quenched dual is its inverse `R′(ε′) = m ± σ√(2ε′/c − 1)`. The annealed
//! forms replace `α−1` by `α` and drop the `α/(α−1)` factor in `q_w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Branch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMoments {
    pub alpha: f64,
    pub return_variance: f64,
    pub mean_of_means: f64,
    pub variance_of_means: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Quenched,
    Annealed,
}

/// One point of a theory curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    /// R for primal curves, ε′ for dual curves.
    pub x_value: f64,
    /// ε for primal curves, R′ (or R″) for dual curves.
    pub epsilon_or_return: f64,
    pub q_w: f64,
    pub sharpe: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxSharpe {
    pub s_max: f64,
    pub r_star: f64,
    pub eps_star: f64,
}

impl EnsembleMoments {
    /// Validates α > 0, σ̃² > 0, σ² > 0. The quenched formulas additionally
    /// require α > 1 and check it themselves.
    pub fn new(alpha: f64, return_variance: f64, mean_of_means: f64, variance_of_means: f64) -> Result<Self> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("alpha", alpha)?;
        positive("return_variance", return_variance)?;
        positive("variance_of_means", variance_of_means)?;
        if !mean_of_means.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean_of_means",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            alpha,
            return_variance,
            mean_of_means,
            variance_of_means,
        })
    }

    fn quenched_scale(&self) -> Result<f64> {
        if self.alpha > 1.0 {
            Ok(self.return_variance * (self.alpha - 1.0))
        } else {
            Err(Error::InvalidScenarioRatio(self.alpha))
        }
    }

    fn annealed_scale(&self) -> f64 {
        self.return_variance * self.alpha
    }

    /// 1 + (R−m)²/σ²
    fn return_penalty(&self, target_return: f64) -> f64 {
        let dev = target_return - self.mean_of_means;
        1.0 + dev * dev / self.variance_of_means
    }

    /// m ± σ√(2ε′/scale − 1), or an infeasibility error for a negative radicand.
    fn extremal_return(&self, eps_prime: f64, scale: f64, branch: Branch) -> Result<f64> {
        let radicand = 2.0 * eps_prime / scale - 1.0;
        if !(radicand >= 0.0) {
            return Err(Error::InfeasibleRiskLevel {
                eps_prime,
                min_risk: scale / 2.0,
            });
        }
        let offset = self.variance_of_means.sqrt() * radicand.sqrt();
        Ok(match branch {
            Branch::Maximize => self.mean_of_means + offset,
            Branch::Minimize => self.mean_of_means - offset,
        })
    }
}

pub fn quenched_primal(moments: &EnsembleMoments, target_return: f64) -> Result<TheoryPoint> {
    let scale = moments.quenched_scale()?;
    let penalty = moments.return_penalty(target_return);
    let epsilon = scale / 2.0 * penalty;
    Ok(TheoryPoint {
        x_value: target_return,
        epsilon_or_return: epsilon,
        q_w: moments.alpha / (moments.alpha - 1.0) * penalty,
        sharpe: target_return / (2.0 * epsilon).sqrt(),
        regime: Regime::Quenched,
    })
}

pub fn quenched_dual(moments: &EnsembleMoments, eps_prime: f64, branch: Branch) -> Result<TheoryPoint> {
    let scale = moments.quenched_scale()?;
    let r = moments.extremal_return(eps_prime, scale, branch)?;
    Ok(TheoryPoint {
        x_value: eps_prime,
        epsilon_or_return: r,
        q_w: moments.alpha / (moments.alpha - 1.0) * (2.0 * eps_prime / scale),
        sharpe: r / (2.0 * eps_prime).sqrt(),
        regime: Regime::Quenched,
    })
}

/// Tangency point of the quenched frontier.
///
/// Only defined for m > 0: for m < 0 the stationary point of S(R) is a
/// minimum and the supremum is approached as R → ∞ without being attained.
pub fn max_sharpe(moments: &EnsembleMoments) -> Result<MaxSharpe> {
    let scale = moments.quenched_scale()?;
    let m = moments.mean_of_means;
    if !(m > 0.0) {
        return Err(Error::UndefinedTangency(m));
    }
    let s2 = moments.variance_of_means;
    Ok(MaxSharpe {
        s_max: (m * m + s2).sqrt() / scale.sqrt(),
        r_star: m + s2 / m,
        eps_star: scale / 2.0 * (1.0 + s2 / (m * m)),
    })
}

pub fn annealed_primal(moments: &EnsembleMoments, target_return: f64) -> Result<TheoryPoint> {
    let penalty = moments.return_penalty(target_return);
    let epsilon = moments.annealed_scale() / 2.0 * penalty;
    Ok(TheoryPoint {
        x_value: target_return,
        epsilon_or_return: epsilon,
        q_w: penalty,
        sharpe: target_return / (2.0 * epsilon).sqrt(),
        regime: Regime::Annealed,
    })
}

pub fn annealed_dual(moments: &EnsembleMoments, eps_prime: f64) -> Result<TheoryPoint> {
    let scale = moments.annealed_scale();
    let r = moments.extremal_return(eps_prime, scale, Branch::Maximize)?;
    Ok(TheoryPoint {
        x_value: eps_prime,
        epsilon_or_return: r,
        q_w: 2.0 * eps_prime / scale,
        sharpe: r / (2.0 * eps_prime).sqrt(),
        regime: Regime::Annealed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit() -> EnsembleMoments {
        EnsembleMoments::new(3.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn quenched_primal_reference_points() {
        let p = quenched_primal(&unit(), 1.0).unwrap();
        assert_eq!((p.epsilon_or_return, p.q_w), (1.0, 1.5));
        assert_abs_diff_eq!(p.sharpe, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let p = quenched_primal(&unit(), 2.0).unwrap();
        assert_eq!((p.epsilon_or_return, p.q_w, p.sharpe), (2.0, 3.0, 1.0));
    }

    #[test]
    fn quenched_primal_at_mean_is_budget_only_risk() {
        let m = EnsembleMoments::new(1.7, 0.4, -0.3, 2.5).unwrap();
        let p = quenched_primal(&m, -0.3).unwrap();
        assert_eq!(p.epsilon_or_return, 0.4 * 0.7 / 2.0);
    }

    #[test]
    fn quenched_rejects_alpha_at_most_one() {
        let m = EnsembleMoments::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(quenched_primal(&m, 1.0).unwrap_err(), Error::InvalidScenarioRatio(1.0));
        assert!(quenched_dual(&m, 1.0, Branch::Maximize).is_err());
        assert!(max_sharpe(&m).is_err());
        // the annealed forms stay defined
        assert!(annealed_primal(&m, 1.0).is_ok());
    }

    #[test]
    fn quenched_dual_reference_points() {
        let d = quenched_dual(&unit(), 2.0, Branch::Maximize).unwrap();
        assert_eq!((d.epsilon_or_return, d.q_w, d.sharpe), (2.0, 3.0, 1.0));
        let lo = quenched_dual(&unit(), 2.0, Branch::Minimize).unwrap();
        assert_eq!(lo.epsilon_or_return, 0.0);
        let edge_max = quenched_dual(&unit(), 1.0, Branch::Maximize).unwrap();
        let edge_min = quenched_dual(&unit(), 1.0, Branch::Minimize).unwrap();
        assert_eq!(edge_max.epsilon_or_return, 1.0);
        assert_eq!(edge_min.epsilon_or_return, 1.0);
        assert!(matches!(
            quenched_dual(&unit(), 0.9, Branch::Maximize),
            Err(Error::InfeasibleRiskLevel { .. })
        ));
    }

    #[test]
    fn max_sharpe_reference() {
        let ms = max_sharpe(&unit()).unwrap();
        assert_eq!(ms, MaxSharpe { s_max: 1.0, r_star: 2.0, eps_star: 2.0 });
        let at_r = quenched_primal(&unit(), ms.r_star).unwrap();
        let at_eps = quenched_dual(&unit(), ms.eps_star, Branch::Maximize).unwrap();
        assert_abs_diff_eq!(at_r.sharpe, ms.s_max, epsilon = 1e-12);
        assert_abs_diff_eq!(at_eps.sharpe, ms.s_max, epsilon = 1e-12);
    }

    #[test]
    fn max_sharpe_needs_positive_mean() {
        let m = EnsembleMoments::new(3.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(max_sharpe(&m).unwrap_err(), Error::UndefinedTangency(0.0));
    }

    #[test]
    fn zero_variance_of_means_rejected() {
        assert!(EnsembleMoments::new(2.0, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn annealed_reference_points() {
        let p = annealed_primal(&unit(), 1.0).unwrap();
        assert_eq!((p.epsilon_or_return, p.q_w), (1.5, 1.0));
        let d = annealed_dual(&unit(), 3.0).unwrap();
        assert_eq!((d.epsilon_or_return, d.q_w), (2.0, 2.0));
        let edge = annealed_dual(&unit(), 1.5).unwrap();
        assert_eq!(edge.epsilon_or_return, 1.0);
        let below = annealed_dual(&unit(), 2.0).unwrap();
        assert_abs_diff_eq!(below.epsilon_or_return, 1.0 + (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert!(quenched_dual(&unit(), 2.0, Branch::Maximize).unwrap().epsilon_or_return > below.epsilon_or_return);
    }
}

use serde::{Deserialize, Serialize};

use super::sweep::{Stat, SweepResult};

/// A point passes when |z| stays within this many standard errors ...
pub const Z_TOL: f64 = 3.0;
/// ... or its relative error is within this bound.
pub const REL_TOL: f64 = 0.02;
/// Minimum fraction of passing checks for an overall pass.
pub const PASS_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatCheck {
    pub x_value: f64,
    pub stat: Stat,
    pub mean: f64,
    pub stderr: f64,
    pub theory: f64,
    pub z: f64,
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub checks: Vec<StatCheck>,
    pub pass_fraction: f64,
    pub verdict: bool,
}

fn z_score(mean: f64, se: f64, theory: f64) -> f64 {
    let diff = mean - theory;
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Compares every averaged statistic against the quenched theory curve.
/// Grid points outside the theory's domain are skipped.
pub fn compare_with_theory(result: &SweepResult) -> CompareReport {
    let stats = [result.kind.primary_stat(), Stat::QW, Stat::Sharpe];
    let mut checks = Vec::new();
    for (pt, theory) in result.per_point.iter().zip(&result.theory_quenched) {
        let Some(theory) = theory else { continue };
        for stat in stats {
            let (mean, stderr) = pt.stat(result.kind, stat).expect("sweep statistic");
            let expected = match stat {
                Stat::QW => theory.q_w,
                Stat::Sharpe => theory.sharpe,
                _ => theory.epsilon_or_return,
            };
            let z = z_score(mean, stderr, expected);
            let rel_err = if expected != 0.0 {
                ((mean - expected) / expected).abs()
            } else {
                (mean - expected).abs()
            };
            checks.push(StatCheck {
                x_value: pt.x_value,
                stat,
                mean,
                stderr,
                theory: expected,
                z,
                rel_err,
                pass: z.abs() <= Z_TOL || rel_err <= REL_TOL,
            });
        }
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let pass_fraction = if checks.is_empty() {
        1.0
    } else {
        passed as f64 / checks.len() as f64
    };
    CompareReport {
        checks,
        pass_fraction,
        verdict: pass_fraction >= PASS_FRACTION,
    }
}

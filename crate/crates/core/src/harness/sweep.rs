use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{sample_market, MarketParams};
use crate::solver::{Branch, SampleProjections};
use crate::theory::{self, EnsembleMoments, TheoryPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Minimal risk ε as a function of the target return R.
    PrimalOverR,
    /// Extremal return R′ as a function of the risk level ε′.
    DualOverEps,
}

impl SweepKind {
    pub fn label(self) -> &'static str {
        match self {
            SweepKind::PrimalOverR => "primal",
            SweepKind::DualOverEps => "dual",
        }
    }

    /// The statistic a sweep point's `mean_primary` measures.
    pub fn primary_stat(self) -> Stat {
        match self {
            SweepKind::PrimalOverR => Stat::Epsilon,
            SweepKind::DualOverEps => Stat::RPrime,
        }
    }
}

/// Quantities averaged per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Epsilon,
    RPrime,
    QW,
    Sharpe,
}

impl Stat {
    pub fn as_str(self) -> &'static str {
        match self {
            Stat::Epsilon => "epsilon",
            Stat::RPrime => "r_prime",
            Stat::QW => "q_w",
            Stat::Sharpe => "sharpe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    /// Number of disorder samples C.
    pub n_samples: usize,
    pub params: MarketParams,
    /// Only used by dual sweeps.
    #[serde(default)]
    pub branch: Branch,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep("grid is empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSweep("grid contains a non-finite value".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep("grid must be strictly increasing".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidSweep(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub x_value: f64,
    pub mean_primary: f64,
    pub se_primary: f64,
    pub mean_qw: f64,
    pub se_qw: f64,
    pub mean_sharpe: f64,
    pub se_sharpe: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

impl PointStats {
    pub fn stat(&self, kind: SweepKind, stat: Stat) -> Option<(f64, f64)> {
        match stat {
            s if s == kind.primary_stat() => Some((self.mean_primary, self.se_primary)),
            Stat::QW => Some((self.mean_qw, self.se_qw)),
            Stat::Sharpe => Some((self.mean_sharpe, self.se_sharpe)),
            _ => None,
        }
    }
}

/// A solver refusal on one sample. `x_value` is `None` when the whole sample
/// failed (for instance a singular Wishart matrix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample_index: u64,
    pub x_value: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub params: MarketParams,
    /// Excluded from every serialized report so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub branch: Branch,
    pub n_samples: usize,
    pub per_point: Vec<PointStats>,
    pub theory_quenched: Vec<Option<TheoryPoint>>,
    pub theory_annealed: Vec<Option<TheoryPoint>>,
    pub failures: Vec<SampleFailure>,
    pub provenance: Provenance,
}

/// Theory value at one grid point, or `None` outside the formula's domain
/// (e.g. a risk level below the large-N minimum-variance risk).
///
/// The annealed dual is only defined for the maximizing branch; its minimizing
/// counterpart is taken as the mirror image `2m − R′^OR`.
pub fn theory_point(
    kind: SweepKind,
    moments: &EnsembleMoments,
    x: f64,
    branch: Branch,
    regime: theory::Regime,
) -> Option<TheoryPoint> {
    use theory::Regime::*;
    let point = match (kind, regime) {
        (SweepKind::PrimalOverR, Quenched) => theory::quenched_primal(moments, x),
        (SweepKind::PrimalOverR, Annealed) => theory::annealed_primal(moments, x),
        (SweepKind::DualOverEps, Quenched) => theory::quenched_dual(moments, x, branch),
        (SweepKind::DualOverEps, Annealed) => theory::annealed_dual(moments, x).map(|mut p| {
            if branch == Branch::Minimize {
                p.epsilon_or_return = 2.0 * moments.mean_of_means - p.epsilon_or_return;
                p.sharpe = p.epsilon_or_return / (2.0 * x).sqrt();
            }
            p
        }),
    };
    point.ok()
}

type PointOutcome = std::result::Result<[f64; 3], String>;

fn evaluate_sample(spec: &SweepSpec, index: u64) -> Vec<PointOutcome> {
    let proj = sample_market(&spec.params, index).and_then(|s| SampleProjections::new(&s));
    let proj = match proj {
        Ok(p) => p,
        Err(e) => return vec![Err(e.to_string()); spec.grid.len()],
    };
    spec.grid
        .iter()
        .map(|&x| {
            let out = match spec.kind {
                SweepKind::PrimalOverR => proj.primal(x).map(|s| [s.epsilon, s.q_w, s.sharpe]),
                SweepKind::DualOverEps => proj
                    .dual(x, spec.branch)
                    .map(|s| [s.r_extremal, s.q_w, s.sharpe]),
            };
            out.map_err(|e| e.to_string())
        })
        .collect()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let sd = (ss / (n - 1.0)).sqrt();
    (mean, sd / n.sqrt())
}

/// Configuration average over `spec.n_samples` disorder samples.
///
/// Samples are evaluated in parallel on the current rayon pool; aggregation
/// runs in sample-index order afterwards, so the result does not depend on
/// the number of threads.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let started = Instant::now();
    let moments = spec.params.moments()?;

    let per_sample: Vec<Vec<PointOutcome>> = (0..spec.n_samples as u64)
        .into_par_iter()
        .map(|c| evaluate_sample(spec, c))
        .collect();

    let mut failures = Vec::new();
    let mut per_point = Vec::with_capacity(spec.grid.len());
    for (j, &x) in spec.grid.iter().enumerate() {
        let mut cols: [Vec<f64>; 3] = Default::default();
        for (c, outcomes) in per_sample.iter().enumerate() {
            match &outcomes[j] {
                Ok(vals) => {
                    for (col, v) in cols.iter_mut().zip(vals) {
                        col.push(*v);
                    }
                }
                Err(msg) => failures.push(SampleFailure {
                    sample_index: c as u64,
                    x_value: Some(x),
                    message: msg.clone(),
                }),
            }
        }
        let n_ok = cols[0].len();
        if n_ok < 2 {
            return Err(Error::InsufficientValidSamples { x_value: x, n_ok });
        }
        let (mean_primary, se_primary) = mean_and_se(&cols[0]);
        let (mean_qw, se_qw) = mean_and_se(&cols[1]);
        let (mean_sharpe, se_sharpe) = mean_and_se(&cols[2]);
        per_point.push(PointStats {
            x_value: x,
            mean_primary,
            se_primary,
            mean_qw,
            se_qw,
            mean_sharpe,
            se_sharpe,
            n_ok,
            n_failed: spec.n_samples - n_ok,
        });
    }

    let curve = |regime| {
        spec.grid
            .iter()
            .map(|&x| theory_point(spec.kind, &moments, x, spec.branch, regime))
            .collect::<Vec<_>>()
    };

    Ok(SweepResult {
        kind: spec.kind,
        branch: spec.branch,
        n_samples: spec.n_samples,
        per_point,
        theory_quenched: curve(theory::Regime::Quenched),
        theory_annealed: curve(theory::Regime::Annealed),
        failures,
        provenance: Provenance {
            master_seed: spec.params.master_seed,
            params: spec.params.clone(),
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_primal;

    fn small_spec(kind: SweepKind, grid: Vec<f64>, n_samples: usize) -> SweepSpec {
        SweepSpec {
            kind,
            grid,
            n_samples,
            params: MarketParams {
                n_assets: 4,
                n_scenarios: 8,
                master_seed: 11,
                ..MarketParams::default()
            },
            branch: Branch::Maximize,
        }
    }

    #[test]
    fn mean_is_hand_average_of_two_solves() {
        let spec = small_spec(SweepKind::PrimalOverR, vec![1.0], 2);
        let res = run_sweep(&spec).unwrap();
        let e0 = solve_primal(&sample_market(&spec.params, 0).unwrap(), 1.0).unwrap().epsilon;
        let e1 = solve_primal(&sample_market(&spec.params, 1).unwrap(), 1.0).unwrap().epsilon;
        let pt = &res.per_point[0];
        assert_eq!(pt.mean_primary, (e0 + e1) / 2.0);
        assert_eq!(pt.se_primary, (e0 - e1).abs() / 2.0);
        assert_eq!((pt.n_ok, pt.n_failed), (2, 0));
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            small_spec(SweepKind::PrimalOverR, vec![], 3),
            small_spec(SweepKind::PrimalOverR, vec![1.0, 1.0], 3),
            small_spec(SweepKind::PrimalOverR, vec![2.0, 1.0], 3),
            small_spec(SweepKind::PrimalOverR, vec![1.0], 1),
        ];
        for spec in bad {
            assert!(matches!(run_sweep(&spec), Err(Error::InvalidSweep(_))));
        }
    }

    #[test]
    fn infeasible_points_are_counted_not_dropped() {
        // eps' = 1e-3 lies far below any sample's minimum-variance risk.
        let spec = small_spec(SweepKind::DualOverEps, vec![1e-3], 3);
        assert_eq!(
            run_sweep(&spec).unwrap_err(),
            Error::InsufficientValidSamples { x_value: 1e-3, n_ok: 0 }
        );
        let spec = small_spec(SweepKind::DualOverEps, vec![50.0], 3);
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.per_point[0].n_ok + res.per_point[0].n_failed, 3);
    }

    #[test]
    fn annealed_minimize_branch_is_mirrored() {
        let m = EnsembleMoments::new(3.0, 1.0, 1.0, 1.0).unwrap();
        let p = theory_point(SweepKind::DualOverEps, &m, 3.0, Branch::Minimize, theory::Regime::Annealed)
            .unwrap();
        assert_eq!(p.epsilon_or_return, 0.0);
        assert!(theory_point(SweepKind::DualOverEps, &m, 1.0, Branch::Maximize, theory::Regime::Annealed)
            .is_none());
    }
}

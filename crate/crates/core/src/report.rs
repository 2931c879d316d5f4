//! Plot-ready CSV and JSON reports.
//!
//! Sweep and theory tables share one CSV schema, one row per grid point and
//! statistic:
//!
//! ```text
//! kind,x,stat,mean,stderr,theory_quenched,theory_annealed,n_ok,n_failed
//! ```
//!
//! Cells that do not apply (Monte Carlo columns in a theory table, a theory
//! value outside its domain) are left empty. Numbers are written in their
//! shortest round-trip form, so re-parsing recovers every bit.

use std::io::{self, Write};

use serde::Serialize;

use crate::harness::{PointStats, Stat, SweepKind, SweepResult};
use crate::market::MarketParams;
use crate::solver::Branch;
use crate::theory::{EnsembleMoments, Regime, TheoryPoint};

pub const CSV_HEADER: &str = "kind,x,stat,mean,stderr,theory_quenched,theory_annealed,n_ok,n_failed";
pub const AUDIT_HEADER: &str = "sample,r,branch,return_residual,portfolio_residual";
pub const ORACLE_HEADER: &str = "sample,r,epsilon_solver,epsilon_oracle,epsilon_diff,portfolio_diff";

/// Shortest decimal string that parses back to the same `f64` (at most 17
/// significant digits). Very large or very small magnitudes use exponent form.
pub fn format_number(v: f64) -> String {
    let mag = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&mag) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn cell<T, F: Fn(T) -> String>(v: Option<T>, f: F) -> String {
    v.map(f).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub kind: &'static str,
    pub x: f64,
    pub stat: Stat,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub theory_quenched: Option<f64>,
    pub theory_annealed: Option<f64>,
    pub n_ok: Option<usize>,
    pub n_failed: Option<usize>,
}

impl Row {
    pub fn to_csv(&self) -> String {
        [
            self.kind.to_string(),
            format_number(self.x),
            self.stat.as_str().to_string(),
            cell(self.mean, format_number),
            cell(self.stderr, format_number),
            cell(self.theory_quenched, format_number),
            cell(self.theory_annealed, format_number),
            cell(self.n_ok, |n| n.to_string()),
            cell(self.n_failed, |n| n.to_string()),
        ]
        .join(",")
    }
}

pub fn kind_label(kind: SweepKind, branch: Branch) -> &'static str {
    match (kind, branch) {
        (SweepKind::PrimalOverR, _) => "primal",
        (SweepKind::DualOverEps, Branch::Maximize) => "dual",
        (SweepKind::DualOverEps, Branch::Minimize) => "dual_min",
    }
}

fn theory_value(point: &Option<TheoryPoint>, stat: Stat) -> Option<f64> {
    point.as_ref().map(|t| match stat {
        Stat::QW => t.q_w,
        Stat::Sharpe => t.sharpe,
        Stat::Epsilon | Stat::RPrime => t.epsilon_or_return,
    })
}

fn stats_for(kind: SweepKind) -> [Stat; 3] {
    [kind.primary_stat(), Stat::QW, Stat::Sharpe]
}

fn point_rows(
    kind: SweepKind,
    branch: Branch,
    x: f64,
    stats: Option<&PointStats>,
    quenched: &Option<TheoryPoint>,
    annealed: &Option<TheoryPoint>,
) -> Vec<Row> {
    stats_for(kind)
        .into_iter()
        .map(|stat| {
            let mc = stats.and_then(|p| p.stat(kind, stat));
            Row {
                kind: kind_label(kind, branch),
                x,
                stat,
                mean: mc.map(|m| m.0),
                stderr: mc.map(|m| m.1),
                theory_quenched: theory_value(quenched, stat),
                theory_annealed: theory_value(annealed, stat),
                n_ok: stats.map(|p| p.n_ok),
                n_failed: stats.map(|p| p.n_failed),
            }
        })
        .collect()
}

pub fn sweep_rows(result: &SweepResult) -> Vec<Row> {
    result
        .per_point
        .iter()
        .zip(&result.theory_quenched)
        .zip(&result.theory_annealed)
        .flat_map(|((pt, q), a)| point_rows(result.kind, result.branch, pt.x_value, Some(pt), q, a))
        .collect()
}

/// Theory-only table: the primal curve over `grid` followed by the dual curve
/// over the same values read as risk levels.
pub fn theory_rows(moments: &EnsembleMoments, grid: &[f64], branch: Branch) -> Vec<Row> {
    use crate::harness::theory_point;
    let mut rows = Vec::new();
    for kind in [SweepKind::PrimalOverR, SweepKind::DualOverEps] {
        for &x in grid {
            let q = theory_point(kind, moments, x, branch, Regime::Quenched);
            let a = theory_point(kind, moments, x, branch, Regime::Annealed);
            rows.extend(point_rows(kind, branch, x, None, &q, &a));
        }
    }
    rows
}

pub fn write_csv<W: Write>(mut out: W, header: &str, lines: impl IntoIterator<Item = String>) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonProvenance<'a> {
    pub seed: u64,
    pub params: &'a MarketParams,
    pub version: &'static str,
}

/// JSON document mirroring a CSV table.
#[derive(Debug, Clone, Serialize)]
pub struct JsonReport<'a, R: Serialize> {
    pub subcommand: &'a str,
    pub provenance: JsonProvenance<'a>,
    pub branch: Branch,
    pub verdict: Option<bool>,
    pub rows: &'a [R],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failures: Option<&'a [crate::harness::SampleFailure]>,
}

pub fn write_json<W: Write, R: Serialize>(mut out: W, report: &JsonReport<'_, R>) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub sample: u64,
    pub r: f64,
    pub branch: Branch,
    pub return_residual: f64,
    pub portfolio_residual: f64,
}

impl AuditRow {
    pub fn to_csv(&self) -> String {
        let branch = match self.branch {
            Branch::Maximize => "max",
            Branch::Minimize => "min",
        };
        format!(
            "{},{},{},{},{}",
            self.sample,
            format_number(self.r),
            branch,
            format_number(self.return_residual),
            format_number(self.portfolio_residual)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub sample: u64,
    pub r: f64,
    pub epsilon_solver: f64,
    pub epsilon_oracle: f64,
    pub epsilon_diff: f64,
    pub portfolio_diff: f64,
}

impl OracleRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.sample,
            format_number(self.r),
            format_number(self.epsilon_solver),
            format_number(self.epsilon_oracle),
            format_number(self.epsilon_diff),
            format_number(self.portfolio_diff)
        )
    }
}

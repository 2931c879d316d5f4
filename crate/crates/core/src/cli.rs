//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when the run succeeded but its check failed
//! (theory mismatch, duality or oracle residual above tolerance), 1 on usage
//! or runtime errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::Error;
use crate::harness::{compare_with_theory, duality_audit, qp_oracle, run_sweep, SweepKind, SweepSpec};
use crate::market::{sample_market, Distribution, MarketParams};
use crate::report::{self, AuditRow, JsonProvenance, JsonReport, OracleRow, Row};
use crate::solver::{solve_primal, Branch};

/// Residual bound for the duality audit and the oracle check.
pub const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    PrimalSweep,
    DualSweep,
    Theory,
    DualityAudit,
    OracleCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::PrimalSweep => "primal-sweep",
            Mode::DualSweep => "dual-sweep",
            Mode::Theory => "theory",
            Mode::DualityAudit => "duality-audit",
            Mode::OracleCheck => "oracle-check",
        }
    }

    fn default_grid(self) -> Vec<f64> {
        match self {
            Mode::DualSweep => vec![1.0, 1.5, 2.0, 3.0],
            _ => vec![0.0, 0.5, 1.0, 1.5, 2.0],
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "replica-portfolio", version, about = "Mean-variance portfolio optimization in a random market")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Configuration average of the minimal risk over a grid of target returns.
    PrimalSweep(RunArgs),
    /// Configuration average of the extremal return over a grid of risk levels.
    DualSweep(RunArgs),
    /// Quenched and annealed large-N curves only.
    Theory(RunArgs),
    /// Primal -> dual round trip residuals on seeded samples.
    DualityAudit(RunArgs),
    /// Closed-form primal solver versus the elimination QP oracle.
    OracleCheck(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Number of assets N.
    #[arg(long, default_value_t = 250)]
    n_assets: usize,
    /// Number of scenarios p (must exceed N).
    #[arg(long, default_value_t = 750)]
    n_scenarios: usize,
    /// Number of disorder samples C.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Variance of the modified return rate.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sdtilde2: f64,
    /// Mean of the asset mean returns.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    mean: f64,
    /// Variance of the asset mean returns.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma2: f64,
    /// "start:stop:count" (inclusive) or a comma-separated list.
    #[arg(long, value_parser = parse_grid_arg, allow_hyphen_values = true)]
    grid: Option<GridArg>,
    #[arg(long, value_enum, default_value = "max")]
    branch: BranchArg,
    #[arg(long, value_enum, default_value = "gaussian")]
    dist: DistArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for sample-level parallelism (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone)]
struct GridArg(Vec<f64>);

fn parse_grid_arg(s: &str) -> Result<GridArg, String> {
    parse_grid(s).map(GridArg)
}

/// Validated configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: MarketParams,
    pub grid: Vec<f64>,
    pub n_samples: usize,
    pub branch: Branch,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

/// Parse failure carrying the exit code (0 for `--help` / `--version`).
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: 1,
        }
    }
}

/// Parses a grid given as `start:stop:count` or `v1,v2,...`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err("expected start:stop:count".into());
        };
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("`{count}` is not a point count"))?;
        match count {
            0 => return Err("grid is empty".into()),
            1 if start != stop => return Err("a single-point grid needs start == stop".into()),
            1 => vec![start],
            _ => {
                let step = (stop - start) / (count - 1) as f64;
                (0..count)
                    .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
                    .collect()
            }
        }
    } else {
        let vals: Vec<f64> = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<_, _>>()?;
        if vals.is_empty() {
            return Err("grid is empty".into());
        }
        vals
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(grid)
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("replica-portfolio"))
        .chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind::*;
        match e.kind() {
            DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => CliError {
                message: e.to_string(),
                exit_code: if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 },
            },
            _ => {
                let rendered = e.to_string();
                let first = rendered.lines().next().unwrap_or("invalid arguments");
                CliError::usage(first.to_string())
            }
        }
    })?;
    let (mode, args) = match cli.command {
        Command::PrimalSweep(a) => (Mode::PrimalSweep, a),
        Command::DualSweep(a) => (Mode::DualSweep, a),
        Command::Theory(a) => (Mode::Theory, a),
        Command::DualityAudit(a) => (Mode::DualityAudit, a),
        Command::OracleCheck(a) => (Mode::OracleCheck, a),
    };

    let dist = match args.dist {
        DistArg::Gaussian => Distribution::Gaussian,
        DistArg::Uniform => Distribution::UniformMatchedMoments,
    };
    let params = MarketParams {
        n_assets: args.n_assets,
        n_scenarios: args.n_scenarios,
        return_variance: args.sdtilde2,
        mean_of_means: args.mean,
        variance_of_means: args.sigma2,
        return_dist: dist,
        mean_dist: dist,
        master_seed: args.seed,
    };
    params.validate().map_err(|e| {
        let flag = match &e {
            Error::ScenarioRatio { .. } => "--n-scenarios",
            Error::InvalidParameter { name: "n_assets", .. } => "--n-assets",
            Error::InvalidParameter { name: "return_variance", .. } => "--sdtilde2",
            Error::InvalidParameter { name: "variance_of_means", .. } => "--sigma2",
            Error::InvalidParameter { name: "mean_of_means", .. } => "--mean",
            _ => "arguments",
        };
        let msg = match e {
            Error::ScenarioRatio { .. } => "n_scenarios must exceed n_assets".to_string(),
            other => other.to_string(),
        };
        CliError::usage(format!("error: {flag}: {msg}"))
    })?;
    if args.samples < 2 && matches!(mode, Mode::PrimalSweep | Mode::DualSweep) {
        return Err(CliError::usage("error: --samples: a sweep needs at least 2 samples"));
    }
    if args.samples == 0 {
        return Err(CliError::usage("error: --samples: must be positive"));
    }
    if mode == Mode::OracleCheck && args.n_assets < 3 {
        return Err(CliError::usage("error: --n-assets: the oracle check needs at least 3 assets"));
    }
    if args.threads == Some(0) {
        return Err(CliError::usage("error: --threads: must be positive"));
    }

    Ok(RunConfig {
        mode,
        params,
        grid: args.grid.map(|g| g.0).unwrap_or_else(|| mode.default_grid()),
        n_samples: args.samples,
        branch: match args.branch {
            BranchArg::Max => Branch::Maximize,
            BranchArg::Min => Branch::Minimize,
        },
        out: args.out,
        format: args.format,
        threads: args.threads,
    })
}

/// Rendered output of a run plus whether its check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub body: String,
    pub passed: bool,
    pub summary: String,
}

fn render<R: serde::Serialize>(
    config: &RunConfig,
    header: &str,
    rows: &[R],
    csv: impl Fn(&R) -> String,
    verdict: Option<bool>,
    failures: Option<&[crate::harness::SampleFailure]>,
) -> String {
    let mut buf = Vec::new();
    match config.format {
        Format::Csv => report::write_csv(&mut buf, header, rows.iter().map(csv)),
        Format::Json => report::write_json(
            &mut buf,
            &JsonReport {
                subcommand: config.mode.name(),
                provenance: JsonProvenance {
                    seed: config.params.master_seed,
                    params: &config.params,
                    version: crate::VERSION,
                },
                branch: config.branch,
                verdict,
                rows,
                failures,
            },
        ),
    }
    .expect("writing to memory");
    String::from_utf8(buf).expect("reports are UTF-8")
}

fn run_sweep_mode(config: &RunConfig, kind: SweepKind) -> Result<RunOutput, Error> {
    let spec = SweepSpec {
        kind,
        grid: config.grid.clone(),
        n_samples: config.n_samples,
        params: config.params.clone(),
        branch: config.branch,
    };
    let result = run_sweep(&spec)?;
    let cmp = compare_with_theory(&result);
    let rows: Vec<Row> = report::sweep_rows(&result);
    let body = render(config, report::CSV_HEADER, &rows, Row::to_csv, Some(cmp.verdict), Some(&result.failures));
    let passed = cmp.checks.iter().filter(|c| c.pass).count();
    Ok(RunOutput {
        body,
        passed: cmp.verdict,
        summary: format!(
            "{}: {} ({}/{} checks within {} SE or {}% of theory, {} failed solves)",
            config.mode.name(),
            if cmp.verdict { "pass" } else { "FAIL" },
            passed,
            cmp.checks.len(),
            crate::harness::Z_TOL,
            crate::harness::REL_TOL * 100.0,
            result.failures.len()
        ),
    })
}

fn run_theory(config: &RunConfig) -> Result<RunOutput, Error> {
    let moments = config.params.moments()?;
    let rows = report::theory_rows(&moments, &config.grid, config.branch);
    Ok(RunOutput {
        body: render(config, report::CSV_HEADER, &rows, Row::to_csv, None, None),
        passed: true,
        summary: format!("theory: {} rows", rows.len()),
    })
}

fn run_audit(config: &RunConfig) -> Result<RunOutput, Error> {
    let per_sample: Vec<Vec<AuditRow>> = (0..config.n_samples as u64)
        .into_par_iter()
        .map(|c| {
            let sample = sample_market(&config.params, c)?;
            Ok(duality_audit(&sample, &config.grid)?
                .into_iter()
                .map(|rec| AuditRow {
                    sample: c,
                    r: rec.target_return,
                    branch: rec.branch,
                    return_residual: rec.return_residual,
                    portfolio_residual: rec.portfolio_residual,
                })
                .collect())
        })
        .collect::<Result<_, Error>>()?;
    let rows: Vec<AuditRow> = per_sample.into_iter().flatten().collect();
    let worst = rows
        .iter()
        .map(|r| r.return_residual.max(r.portfolio_residual))
        .fold(0.0, f64::max);
    let passed = worst <= CHECK_TOL;
    Ok(RunOutput {
        body: render(config, report::AUDIT_HEADER, &rows, AuditRow::to_csv, Some(passed), None),
        passed,
        summary: format!("duality-audit: {} (worst residual {worst:e})", if passed { "pass" } else { "FAIL" }),
    })
}

fn run_oracle(config: &RunConfig) -> Result<RunOutput, Error> {
    let per_sample: Vec<Vec<OracleRow>> = (0..config.n_samples as u64)
        .into_par_iter()
        .map(|c| {
            let sample = sample_market(&config.params, c)?;
            config
                .grid
                .iter()
                .map(|&r| {
                    let exact = solve_primal(&sample, r)?;
                    let oracle = qp_oracle(&sample, r)?;
                    let portfolio_diff = exact
                        .portfolio
                        .iter()
                        .zip(&oracle.portfolio)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    Ok(OracleRow {
                        sample: c,
                        r,
                        epsilon_solver: exact.epsilon,
                        epsilon_oracle: oracle.epsilon,
                        epsilon_diff: (exact.epsilon - oracle.epsilon).abs(),
                        portfolio_diff,
                    })
                })
                .collect()
        })
        .collect::<Result<_, Error>>()?;
    let rows: Vec<OracleRow> = per_sample.into_iter().flatten().collect();
    let worst = rows
        .iter()
        .map(|r| r.epsilon_diff.max(r.portfolio_diff))
        .fold(0.0, f64::max);
    let passed = worst <= CHECK_TOL;
    Ok(RunOutput {
        body: render(config, report::ORACLE_HEADER, &rows, OracleRow::to_csv, Some(passed), None),
        passed,
        summary: format!("oracle-check: {} (worst difference {worst:e})", if passed { "pass" } else { "FAIL" }),
    })
}

/// Runs a validated configuration on a pool of `config.threads` workers.
pub fn execute(config: &RunConfig) -> Result<RunOutput, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter { name: "threads", reason: e.to_string() })?;
    pool.install(|| match config.mode {
        Mode::PrimalSweep => run_sweep_mode(config, SweepKind::PrimalOverR),
        Mode::DualSweep => run_sweep_mode(config, SweepKind::DualOverEps),
        Mode::Theory => run_theory(config),
        Mode::DualityAudit => run_audit(config),
        Mode::OracleCheck => run_oracle(config),
    })
}

fn write_output(config: &RunConfig, body: &str) -> io::Result<()> {
    match &config.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(body.as_bytes())?;
            f.flush()
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.exit_code == 0 {
                print!("{}", e.message);
            } else {
                eprintln!("{}", e.message.trim_end());
            }
            return e.exit_code;
        }
    };
    let output = match execute(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = write_output(&config, &output.body) {
        let target = config
            .out
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "stdout".into());
        eprintln!("error: --out: cannot write {target}: {e}");
        return 1;
    }
    eprintln!("{}", output.summary);
    if output.passed {
        0
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_grid() {
        let cfg = parse_args(["primal-sweep", "--grid", "0:2:5"]).unwrap();
        assert_eq!(cfg.grid, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(cfg.mode, Mode::PrimalSweep);
        assert_eq!(cfg.params, MarketParams::default());
        assert_eq!(cfg.n_samples, 100);
    }

    #[test]
    fn dual_min_branch() {
        let cfg = parse_args(["dual-sweep", "--grid", "1:3:3", "--branch", "min"]).unwrap();
        assert_eq!(cfg.mode, Mode::DualSweep);
        assert_eq!(cfg.branch, Branch::Minimize);
        assert_eq!(cfg.grid, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn scenario_guard_names_the_flag() {
        let err = parse_args(["primal-sweep", "--n-scenarios", "100", "--n-assets", "250"]).unwrap_err();
        assert_eq!(err.exit_code, 1);
        assert!(err.message.contains("n_scenarios must exceed n_assets"), "{}", err.message);
        assert!(err.message.contains("--n-scenarios"));
    }

    #[test]
    fn malformed_and_empty_grids() {
        for bad in ["0:2", "0:2:0", "a:2:3", "", "2,1", "1:1:3"] {
            let err = parse_args(["primal-sweep", "--grid", bad]).unwrap_err();
            assert!(err.message.contains("--grid"), "{bad}: {}", err.message);
            assert!(!err.message.contains('\n'));
        }
    }

    #[test]
    fn unknown_flag_is_one_line() {
        let err = parse_args(["theory", "--bogus", "1"]).unwrap_err();
        assert_eq!(err.exit_code, 1);
        assert!(err.message.contains("--bogus"));
        assert!(!err.message.contains('\n'));
    }

    #[test]
    fn comma_grid_and_negative_values() {
        assert_eq!(parse_grid("1,1.5,2,3").unwrap(), vec![1.0, 1.5, 2.0, 3.0]);
        let cfg = parse_args(["theory", "--grid", "-1:1:3", "--mean", "-0.5"]).unwrap();
        assert_eq!(cfg.grid, vec![-1.0, 0.0, 1.0]);
        assert_eq!(cfg.params.mean_of_means, -0.5);
    }

    #[test]
    fn sweeps_need_two_samples() {
        let err = parse_args(["primal-sweep", "--samples", "1"]).unwrap_err();
        assert!(err.message.contains("--samples"));
    }
}

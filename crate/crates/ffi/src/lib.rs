//! C ABI over `replica-portfolio`.
//!
//! Every function returns an [`RpStatus`]; on anything but `RP_STATUS_OK` a
//! description of the failure is kept per thread and can be copied out with
//! [`rp_last_error_message`]. Samples and sweep results are opaque handles
//! that the caller releases with the matching `*_free` function.
//!
//! The header `include/replica_portfolio.h` is regenerated by the build script.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use replica_portfolio::nalgebra::{DMatrix, DVector};
use replica_portfolio::{
    self as rp, harness, Branch, Distribution, EnsembleMoments, Error, MarketParams, MarketSample,
    SweepKind, SweepResult, SweepSpec,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularWishart = 3,
    DegenerateMeanVector = 4,
    InfeasibleRiskLevel = 5,
    InvalidScenarioRatio = 6,
    UndefinedTangency = 7,
    IllConditionedElimination = 8,
    InsufficientValidSamples = 9,
    BufferTooSmall = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpDistribution {
    Gaussian = 0,
    Uniform = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpBranch {
    Maximize = 0,
    Minimize = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpSweepKind {
    PrimalOverR = 0,
    DualOverEps = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpMarketParams {
    pub n_assets: usize,
    pub n_scenarios: usize,
    pub return_variance: f64,
    pub mean_of_means: f64,
    pub variance_of_means: f64,
    pub return_dist: RpDistribution,
    pub mean_dist: RpDistribution,
    pub master_seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpMoments {
    pub alpha: f64,
    pub return_variance: f64,
    pub mean_of_means: f64,
    pub variance_of_means: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpProjectionScalars {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d_discriminant: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpPrimalSolution {
    pub target_return: f64,
    pub epsilon: f64,
    pub k: f64,
    pub theta: f64,
    pub q_w: f64,
    pub sharpe: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpDualSolution {
    pub target_risk: f64,
    pub r_extremal: f64,
    pub branch: RpBranch,
    pub k: f64,
    pub theta: f64,
    pub q_w: f64,
    pub sharpe: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpTheoryPoint {
    pub x_value: f64,
    pub epsilon_or_return: f64,
    pub q_w: f64,
    pub sharpe: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpMaxSharpe {
    pub s_max: f64,
    pub r_star: f64,
    pub eps_star: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpPointStats {
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

/// Opaque disorder sample.
pub struct RpSample(MarketSample);

/// Opaque sweep result.
pub struct RpSweepResult(SweepResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ScenarioRatio { .. }
            | Error::InvalidParameter { .. }
            | Error::DimensionMismatch(_)
            | Error::InvalidSweep(_) => RpStatus::InvalidArgument,
            Error::SingularWishart => RpStatus::SingularWishart,
            Error::DegenerateMeanVector { .. } => RpStatus::DegenerateMeanVector,
            Error::InfeasibleRiskLevel { .. } => RpStatus::InfeasibleRiskLevel,
            Error::InvalidScenarioRatio(_) => RpStatus::InvalidScenarioRatio,
            Error::UndefinedTangency(_) => RpStatus::UndefinedTangency,
            Error::IllConditionedElimination { .. } => RpStatus::IllConditionedElimination,
            Error::InsufficientValidSamples { .. } => RpStatus::InsufficientValidSamples,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RpStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            RpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside replica-portfolio".into());
            RpStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Copies `src` into an optional caller buffer of `len` doubles.
unsafe fn copy_portfolio(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Failure> {
    if dst.is_null() {
        return Ok(());
    }
    if len < src.len() {
        return Err(Failure(
            RpStatus::BufferTooSmall,
            format!("portfolio buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn branch(b: RpBranch) -> Branch {
    match b {
        RpBranch::Maximize => Branch::Maximize,
        RpBranch::Minimize => Branch::Minimize,
    }
}

fn dist(d: RpDistribution) -> Distribution {
    match d {
        RpDistribution::Gaussian => Distribution::Gaussian,
        RpDistribution::Uniform => Distribution::UniformMatchedMoments,
    }
}

fn market_params(p: &RpMarketParams) -> MarketParams {
    MarketParams {
        n_assets: p.n_assets,
        n_scenarios: p.n_scenarios,
        return_variance: p.return_variance,
        mean_of_means: p.mean_of_means,
        variance_of_means: p.variance_of_means,
        return_dist: dist(p.return_dist),
        mean_dist: dist(p.mean_dist),
        master_seed: p.master_seed,
    }
}

fn moments(m: &RpMoments) -> Result<EnsembleMoments, Failure> {
    Ok(EnsembleMoments::new(m.alpha, m.return_variance, m.mean_of_means, m.variance_of_means)?)
}

fn theory(p: rp::TheoryPoint) -> RpTheoryPoint {
    RpTheoryPoint {
        x_value: p.x_value,
        epsilon_or_return: p.epsilon_or_return,
        q_w: p.q_w,
        sharpe: p.sharpe,
    }
}

fn primal(s: &rp::PrimalSolution) -> RpPrimalSolution {
    RpPrimalSolution {
        target_return: s.target_return,
        epsilon: s.epsilon,
        k: s.k,
        theta: s.theta,
        q_w: s.q_w,
        sharpe: s.sharpe,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes (without the NUL) of the calling thread's last error
/// message, or 0 if the last call succeeded.
#[no_mangle]
pub extern "C" fn rp_last_error_length() -> usize {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (truncated, always
/// NUL-terminated). Returns the number of bytes written without the NUL.
#[no_mangle]
pub unsafe extern "C" fn rp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let bytes = slot.as_ref().map_or(&[][..], |c| c.as_bytes());
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Draws sample `sample_index` of the ensemble into a new handle.
#[no_mangle]
pub unsafe extern "C" fn rp_sample_generate(
    params: *const RpMarketParams,
    sample_index: u64,
    out: *mut *mut RpSample,
) -> RpStatus {
    guard(|| {
        let params = market_params(deref(params, "params")?);
        let sample = rp::sample_market(&params, sample_index)?;
        write_out(out, Box::into_raw(Box::new(RpSample(sample))), "out")
    })
}

/// Builds a sample from an explicit scaled return matrix (`n_assets` rows of
/// `n_scenarios` values, row-major) and mean vector.
#[no_mangle]
pub unsafe extern "C" fn rp_sample_from_parts(
    n_assets: usize,
    n_scenarios: usize,
    x_scaled_row_major: *const f64,
    means: *const f64,
    out: *mut *mut RpSample,
) -> RpStatus {
    guard(|| {
        if x_scaled_row_major.is_null() {
            return Err(null("x_scaled_row_major"));
        }
        if means.is_null() {
            return Err(null("means"));
        }
        let count = n_assets.checked_mul(n_scenarios).ok_or_else(|| {
            Failure(RpStatus::InvalidArgument, "matrix size overflows".into())
        })?;
        let x = std::slice::from_raw_parts(x_scaled_row_major, count);
        let r = std::slice::from_raw_parts(means, n_assets);
        let sample = MarketSample::new(
            DMatrix::from_row_slice(n_assets, n_scenarios, x),
            DVector::from_column_slice(r),
            0,
        )?;
        write_out(out, Box::into_raw(Box::new(RpSample(sample))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_sample_free(sample: *mut RpSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of assets N of a sample, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rp_sample_n_assets(sample: *const RpSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.n_assets())
}

#[no_mangle]
pub unsafe extern "C" fn rp_projection_scalars(
    sample: *const RpSample,
    out: *mut RpProjectionScalars,
) -> RpStatus {
    guard(|| {
        let s = rp::projection_scalars(&deref(sample, "sample")?.0)?;
        write_out(
            out,
            RpProjectionScalars { a: s.a, b: s.b, c: s.c, d_discriminant: s.d_discriminant },
            "out",
        )
    })
}

/// Minimal risk at expected return `target_return`. `portfolio` may be null;
/// otherwise it must hold at least N values.
#[no_mangle]
pub unsafe extern "C" fn rp_solve_primal(
    sample: *const RpSample,
    target_return: f64,
    out: *mut RpPrimalSolution,
    portfolio: *mut f64,
    portfolio_len: usize,
) -> RpStatus {
    guard(|| {
        let sol = rp::solve_primal(&deref(sample, "sample")?.0, target_return)?;
        copy_portfolio(&sol.portfolio, portfolio, portfolio_len)?;
        write_out(out, primal(&sol), "out")
    })
}

/// Same contract as [`rp_solve_primal`], via the constraint-elimination oracle.
#[no_mangle]
pub unsafe extern "C" fn rp_qp_oracle(
    sample: *const RpSample,
    target_return: f64,
    out: *mut RpPrimalSolution,
    portfolio: *mut f64,
    portfolio_len: usize,
) -> RpStatus {
    guard(|| {
        let sol = rp::qp_oracle(&deref(sample, "sample")?.0, target_return)?;
        copy_portfolio(&sol.portfolio, portfolio, portfolio_len)?;
        write_out(out, primal(&sol), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_solve_dual(
    sample: *const RpSample,
    target_risk: f64,
    which: RpBranch,
    out: *mut RpDualSolution,
    portfolio: *mut f64,
    portfolio_len: usize,
) -> RpStatus {
    guard(|| {
        let sol = rp::solve_dual(&deref(sample, "sample")?.0, target_risk, branch(which))?;
        copy_portfolio(&sol.portfolio, portfolio, portfolio_len)?;
        write_out(
            out,
            RpDualSolution {
                target_risk: sol.target_risk,
                r_extremal: sol.r_extremal,
                branch: which,
                k: sol.k,
                theta: sol.theta,
                q_w: sol.q_w,
                sharpe: sol.sharpe,
            },
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_quenched_primal(
    m: *const RpMoments,
    target_return: f64,
    out: *mut RpTheoryPoint,
) -> RpStatus {
    guard(|| {
        let p = rp::quenched_primal(&moments(deref(m, "moments")?)?, target_return)?;
        write_out(out, theory(p), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_quenched_dual(
    m: *const RpMoments,
    eps_prime: f64,
    which: RpBranch,
    out: *mut RpTheoryPoint,
) -> RpStatus {
    guard(|| {
        let p = rp::quenched_dual(&moments(deref(m, "moments")?)?, eps_prime, branch(which))?;
        write_out(out, theory(p), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_annealed_primal(
    m: *const RpMoments,
    target_return: f64,
    out: *mut RpTheoryPoint,
) -> RpStatus {
    guard(|| {
        let p = rp::annealed_primal(&moments(deref(m, "moments")?)?, target_return)?;
        write_out(out, theory(p), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_annealed_dual(
    m: *const RpMoments,
    eps_prime: f64,
    out: *mut RpTheoryPoint,
) -> RpStatus {
    guard(|| {
        let p = rp::annealed_dual(&moments(deref(m, "moments")?)?, eps_prime)?;
        write_out(out, theory(p), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_max_sharpe(m: *const RpMoments, out: *mut RpMaxSharpe) -> RpStatus {
    guard(|| {
        let p = rp::max_sharpe(&moments(deref(m, "moments")?)?)?;
        write_out(
            out,
            RpMaxSharpe { s_max: p.s_max, r_star: p.r_star, eps_star: p.eps_star },
            "out",
        )
    })
}

/// Runs a configuration average over `n_samples` samples. `which` is only
/// read for dual sweeps.
#[no_mangle]
pub unsafe extern "C" fn rp_sweep_run(
    params: *const RpMarketParams,
    kind: RpSweepKind,
    which: RpBranch,
    grid: *const f64,
    grid_len: usize,
    n_samples: usize,
    out: *mut *mut RpSweepResult,
) -> RpStatus {
    guard(|| {
        let params = market_params(deref(params, "params")?);
        if grid.is_null() && grid_len > 0 {
            return Err(null("grid"));
        }
        let grid = if grid_len == 0 { Vec::new() } else { std::slice::from_raw_parts(grid, grid_len).to_vec() };
        let spec = SweepSpec {
            kind: match kind {
                RpSweepKind::PrimalOverR => SweepKind::PrimalOverR,
                RpSweepKind::DualOverEps => SweepKind::DualOverEps,
            },
            grid,
            n_samples,
            params,
            branch: branch(which),
        };
        let result = rp::run_sweep(&spec)?;
        write_out(out, Box::into_raw(Box::new(RpSweepResult(result))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_sweep_point_count(result: *const RpSweepResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.per_point.len())
}

#[no_mangle]
pub unsafe extern "C" fn rp_sweep_point(
    result: *const RpSweepResult,
    index: usize,
    out: *mut RpPointStats,
) -> RpStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        let p = r.per_point.get(index).ok_or_else(|| {
            Failure(
                RpStatus::InvalidArgument,
                format!("point {index} out of range ({} points)", r.per_point.len()),
            )
        })?;
        write_out(
            out,
            RpPointStats {
                x_value: p.x_value,
                mean_primary: p.mean_primary,
                se_primary: p.se_primary,
                mean_qw: p.mean_qw,
                se_qw: p.se_qw,
                mean_sharpe: p.mean_sharpe,
                se_sharpe: p.se_sharpe,
                n_ok: p.n_ok,
                n_failed: p.n_failed,
            },
            "out",
        )
    })
}

/// Quenched theory at point `index`; `*has_value` is false where the formula
/// is undefined (e.g. an infeasible risk level).
#[no_mangle]
pub unsafe extern "C" fn rp_sweep_theory_quenched(
    result: *const RpSweepResult,
    index: usize,
    out: *mut RpTheoryPoint,
    has_value: *mut bool,
) -> RpStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        let t = r.theory_quenched.get(index).ok_or_else(|| {
            Failure(RpStatus::InvalidArgument, format!("point {index} out of range"))
        })?;
        write_out(has_value, t.is_some(), "has_value")?;
        write_out(out, t.map(theory).unwrap_or_default(), "out")
    })
}

/// Compares the sweep with its quenched theory curve.
#[no_mangle]
pub unsafe extern "C" fn rp_sweep_compare(
    result: *const RpSweepResult,
    verdict: *mut bool,
    pass_fraction: *mut f64,
) -> RpStatus {
    guard(|| {
        let report = harness::compare_with_theory(&deref(result, "result")?.0);
        write_out(verdict, report.verdict, "verdict")?;
        write_out(pass_fraction, report.pass_fraction, "pass_fraction")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_sweep_free(result: *mut RpSweepResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

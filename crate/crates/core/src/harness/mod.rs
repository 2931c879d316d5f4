//! Quenched Monte Carlo configuration averages and finite-N verification:
//! parameter sweeps, theory comparison, the duality audit and an independent
//! QP oracle for the primal solver.

mod audit;
mod compare;
mod oracle;
mod sweep;

pub use audit::{duality_audit, AuditRecord};
pub use compare::{compare_with_theory, CompareReport, StatCheck, PASS_FRACTION, REL_TOL, Z_TOL};
pub use oracle::{qp_oracle, solve_partial_pivot};
pub use sweep::{
    run_sweep, theory_point, PointStats, Provenance, SampleFailure, Stat, SweepKind, SweepResult,
    SweepSpec,
};

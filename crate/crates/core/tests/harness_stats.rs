mod common;

use common::*;
use replica_portfolio::{
    compare_with_theory, duality_audit, projection_scalars, run_sweep, sample_market, Branch,
    MarketParams, SweepKind, SweepSpec,
};

fn spec(kind: SweepKind, grid: Vec<f64>, params: MarketParams) -> SweepSpec {
    SweepSpec {
        kind,
        grid,
        n_samples: 100,
        params,
        branch: Branch::Maximize,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let s = SweepSpec {
        n_samples: 24,
        ..spec(
            SweepKind::DualOverEps,
            vec![0.6, 1.0, 2.0],
            MarketParams { n_assets: 30, n_scenarios: 60, master_seed: 5, ..MarketParams::default() },
        )
    };
    let one = in_pool(1, || run_sweep(&s).unwrap());
    let many = in_pool(4, || run_sweep(&s).unwrap());
    assert_eq!(one.per_point, many.per_point);
    assert_eq!(one.failures, many.failures);
    assert_eq!(one.theory_quenched, many.theory_quenched);
}

#[test]
fn risk_self_averages_with_n() {
    let sds: Vec<f64> = [50usize, 100, 250]
        .iter()
        .map(|&n| {
            let params = MarketParams { n_assets: n, n_scenarios: 3 * n, master_seed: 17, ..MarketParams::default() };
            let res = run_sweep(&spec(SweepKind::PrimalOverR, vec![1.0], params)).unwrap();
            let pt = &res.per_point[0];
            pt.se_primary * (pt.n_ok as f64).sqrt()
        })
        .collect();
    assert!(sds[0] > sds[1] && sds[1] > sds[2], "{sds:?}");
}

#[test]
fn concentration_separates_quenched_from_annealed() {
    let res = run_sweep(&spec(SweepKind::PrimalOverR, vec![1.0], desk_params(21))).unwrap();
    let pt = &res.per_point[0];
    let annealed = res.theory_annealed[0].unwrap().q_w;
    assert_eq!(annealed, 1.0);
    assert!((pt.mean_qw - annealed) / pt.se_qw > 3.0);
    assert!((pt.mean_qw - 1.5).abs() <= 3.0 * pt.se_qw, "{} ± {}", pt.mean_qw, pt.se_qw);
}

#[test]
fn annealed_curve_is_rejected_as_theory() {
    let mut res = run_sweep(&spec(SweepKind::PrimalOverR, vec![0.0, 0.5, 1.0, 1.5, 2.0], desk_params(22))).unwrap();
    assert!(compare_with_theory(&res).verdict);
    res.theory_quenched = res.theory_annealed.clone();
    let report = compare_with_theory(&res);
    assert!(!report.verdict);
    let eps_checks: Vec<_> = report
        .checks
        .iter()
        .filter(|c| c.stat == replica_portfolio::harness::Stat::Epsilon)
        .collect();
    assert_eq!(eps_checks.len(), 5);
    assert!(eps_checks.iter().all(|c| !c.pass));
}

#[test]
fn projection_scalars_average_to_large_n_values() {
    let params = desk_params(23);
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..100 {
        let s = projection_scalars(&sample_market(&params, i).unwrap()).unwrap();
        a.push(s.a);
        b.push(s.b);
        c.push(s.c);
    }
    for (label, v, want) in [("a", &a, 0.5), ("b", &b, 0.5), ("c", &c, 1.0)] {
        let (m, _) = mean_se(v);
        assert!((m - want).abs() <= 0.03 * want, "{label} = {m}");
    }
}

#[test]
fn desk_scale_primal_and_dual_points() {
    let p = run_sweep(&spec(SweepKind::PrimalOverR, vec![1.0], desk_params(24))).unwrap();
    let pt = &p.per_point[0];
    assert!((pt.mean_primary - 1.0).abs() <= 3.0 * pt.se_primary);
    let d = run_sweep(&spec(SweepKind::DualOverEps, vec![2.0], desk_params(24))).unwrap();
    let pt = &d.per_point[0];
    assert_eq!(pt.n_failed, 0);
    assert!((pt.mean_primary - 2.0).abs() <= 3.0 * pt.se_primary);
}

#[test]
fn minimize_branch_sweep_tracks_lower_curve() {
    let s = SweepSpec {
        branch: Branch::Minimize,
        ..spec(SweepKind::DualOverEps, vec![2.0, 3.0], desk_params(25))
    };
    let res = run_sweep(&s).unwrap();
    assert!(compare_with_theory(&res).verdict);
    assert!((res.theory_quenched[0].unwrap().epsilon_or_return - 0.0).abs() < 1e-15);
}

#[test]
fn duality_audit_on_seeded_instances() {
    for c in 0..20 {
        let s = small_sample(c);
        let vertex = projection_scalars(&s).unwrap().min_variance_return();
        let grid: Vec<f64> = [-1.0, -0.35, 0.0, 0.2, 1.5].iter().map(|d| vertex + d).collect();
        for rec in duality_audit(&s, &grid).unwrap() {
            assert!(rec.return_residual <= 1e-8 && rec.portfolio_residual <= 1e-8, "{c}: {rec:?}");
        }
    }
}

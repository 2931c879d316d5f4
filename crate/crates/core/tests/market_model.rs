mod common;

use common::*;
use nalgebra::DVector;
use replica_portfolio::{
    market::WishartFactor, projection_scalars, sample_market, wishart_apply_inverse, MarketParams,
};

#[test]
fn gaussian_moments_of_one_desk_sample() {
    let params = desk_params(7);
    let s = sample_market(&params, 0).unwrap();
    let root_n = (params.n_assets as f64).sqrt();
    let xs: Vec<f64> = s.x_scaled().iter().map(|v| v * root_n).collect();
    let count = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / count;
    let var = xs.iter().map(|v| v * v).sum::<f64>() / count - mean * mean;
    // SE of the mean is sqrt(σ̃²/(Np)); of the variance σ̃²·sqrt(2/(Np)).
    assert!(mean.abs() < 5.0 * (1.0 / count).sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 0.05, "variance {var}");
    assert!((var - 1.0).abs() < 5.0 * (2.0 / count).sqrt(), "variance {var}");

    let r_mean = s.means().mean();
    assert!((r_mean - 1.0).abs() < 5.0 / root_n, "mean of means {r_mean}");
}

#[test]
fn moment_fidelity_over_many_samples() {
    let params = desk_params(8);
    let n = params.n_assets as f64;
    let mut x_means = Vec::new();
    let mut x_vars = Vec::new();
    let mut r_means = Vec::new();
    let mut r_vars = Vec::new();
    for c in 0..100 {
        let s = sample_market(&params, c).unwrap();
        let xs: Vec<f64> = s.x_scaled().iter().map(|v| v * n.sqrt()).collect();
        let k = xs.len() as f64;
        x_means.push(xs.iter().sum::<f64>() / k);
        x_vars.push(xs.iter().map(|v| v * v).sum::<f64>() / k);
        let r = s.means();
        r_means.push(r.mean());
        r_vars.push(r.iter().map(|v| (v - r.mean()).powi(2)).sum::<f64>() / (n - 1.0));
    }
    for (label, vals, target) in [
        ("x mean", &x_means, 0.0),
        ("x variance", &x_vars, 1.0),
        ("r mean", &r_means, 1.0),
        ("r variance", &r_vars, 1.0),
    ] {
        let (m, se) = mean_se(vals);
        assert!((m - target).abs() <= 5.0 * se, "{label}: {m} ± {se}");
    }
}

#[test]
fn wishart_solve_matches_elimination_oracle() {
    let params = MarketParams {
        n_assets: 4,
        n_scenarios: 8,
        master_seed: 3,
        ..MarketParams::default()
    };
    let s = sample_market(&params, 0).unwrap();
    let e = DVector::from_element(4, 1.0);
    let y = &wishart_apply_inverse(&s, std::slice::from_ref(&e)).unwrap()[0];
    let oracle = gauss_solve(&s.wishart(), &e);
    assert!(max_abs_diff(y.as_slice(), oracle.as_slice()) <= 1e-10);
}

#[test]
fn solve_residuals_are_tiny() {
    let s = sample_market(&desk_params(9), 0).unwrap();
    let j = s.wishart();
    let rhs = vec![
        DVector::from_element(250, 1.0),
        s.means().clone(),
        DVector::from_fn(250, |i, _| (i as f64).sin()),
    ];
    let sols = wishart_apply_inverse(&s, &rhs).unwrap();
    for (v, y) in rhs.iter().zip(&sols) {
        assert!((&j * y - v).norm() <= 1e-10 * v.norm());
    }
}

#[test]
fn wishart_identity_for_one_desk_sample() {
    let s = sample_market(&desk_params(10), 0).unwrap();
    let y = WishartFactor::new(&s)
        .unwrap()
        .solve(&DVector::from_element(250, 1.0))
        .unwrap();
    let a = y.sum() / 250.0;
    // single-sample fluctuation is ~10%; the C=100 average is in the acceptance suite
    assert!((a - 0.5).abs() < 0.1 * 0.5 * 3.0, "a = {a}");
}

#[test]
fn uniform_shape_gives_same_large_n_scalars() {
    let gaussian = desk_params(11);
    let uniform = MarketParams {
        return_dist: replica_portfolio::Distribution::UniformMatchedMoments,
        mean_dist: replica_portfolio::Distribution::UniformMatchedMoments,
        ..gaussian.clone()
    };
    for params in [gaussian, uniform] {
        let a: Vec<f64> = (0..20)
            .map(|c| projection_scalars(&sample_market(&params, c).unwrap()).unwrap().a)
            .collect();
        let (m, se) = mean_se(&a);
        assert!((m - 0.5).abs() < 4.0 * se + 0.005, "{:?}: {m} ± {se}", params.return_dist);
    }
}

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use replica_portfolio::{sample_market, MarketParams, MarketSample};

pub const SMALL_SEED: u64 = 20_240_601;

pub fn small_params() -> MarketParams {
    MarketParams {
        n_assets: 6,
        n_scenarios: 12,
        master_seed: SMALL_SEED,
        ..MarketParams::default()
    }
}

/// Seeded N=6, p=12 instance number `c`.
pub fn small_sample(c: u64) -> MarketSample {
    sample_market(&small_params(), c).unwrap()
}

pub fn desk_params(seed: u64) -> MarketParams {
    MarketParams {
        master_seed: seed,
        ..MarketParams::default()
    }
}

/// N=2, p=3, J = I, r = (0, 2).
pub fn identity_sample() -> MarketSample {
    let mut x = DMatrix::zeros(2, 3);
    x[(0, 0)] = 1.0;
    x[(1, 1)] = 1.0;
    MarketSample::new(x, DVector::from_vec(vec![0.0, 2.0]), 0).unwrap()
}

/// Plain Gaussian elimination with partial pivoting on an owned copy of `a`.
/// Kept deliberately naive; it checks the Cholesky path.
pub fn gauss_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)]).chain([b[i]]).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / pivot[col];
            for (dst, src) in row[col..].iter_mut().zip(&pivot[col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = DVector::zeros(n);
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][n] - s) / m[row][row];
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

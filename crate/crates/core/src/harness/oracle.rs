//! Reduced-space QP oracle for the primal problem.
//!
//! The two equality constraints are eliminated by solving for a pivot pair of
//! coordinates, which leaves an unconstrained positive-definite quadratic in
//! the N−2 free coordinates. Its normal equations are solved by Gaussian
//! elimination. Nothing here goes through the Cholesky path or the
//! projection scalars used by the closed-form solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::market::MarketSample;
use crate::solver::PrimalSolution;

const PIVOT_TOL: f64 = 1e-12;

/// Solves `a x = b` for a dense row-major n×n matrix by Gaussian elimination
/// with partial pivoting. Returns `None` for an exactly singular pivot.
pub fn solve_partial_pivot(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Some(x)
}

/// Minimal-risk portfolio at expected return `target_return`, computed by
/// constraint elimination instead of Lagrange multipliers.
///
/// Intended for small N (≤ 50); the reduced Hessian is formed explicitly.
pub fn qp_oracle(sample: &MarketSample, target_return: f64) -> Result<PrimalSolution> {
    let n = sample.n_assets();
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n_assets",
            reason: format!("the elimination oracle needs at least 3 assets, got {n}"),
        });
    }
    let r = sample.means();
    let x = sample.x_scaled();
    let nf = n as f64;

    // Pivot pair: largest and smallest mean return.
    let (hi, lo) = (0..n).fold((0, 0), |(hi, lo), i| {
        (if r[i] > r[hi] { i } else { hi }, if r[i] < r[lo] { i } else { lo })
    });
    let spread = r[hi] - r[lo];
    let scale = r[hi].abs().max(r[lo].abs());
    if !(spread > PIVOT_TOL * scale) || hi == lo {
        return Err(Error::IllConditionedElimination { spread });
    }
    let free: Vec<usize> = (0..n).filter(|&i| i != hi && i != lo).collect();

    // w = w0 + Z f, with the pivots solving
    //   w_hi + w_lo = N − Σ_f w_f,   r_hi w_hi + r_lo w_lo = NR − Σ_f r_f w_f.
    let mut w0 = DVector::zeros(n);
    w0[hi] = nf * (target_return - r[lo]) / spread;
    w0[lo] = nf * (r[hi] - target_return) / spread;
    let mut z = DMatrix::zeros(n, free.len());
    for (col, &f) in free.iter().enumerate() {
        z[(f, col)] = 1.0;
        z[(hi, col)] = (r[lo] - r[f]) / spread;
        z[(lo, col)] = (r[f] - r[hi]) / spread;
    }

    // minimize ‖Xᵀ(w0 + Z f)‖²
    let b_mat = x.transpose() * &z;
    let g = x.transpose() * &w0;
    let hess = b_mat.transpose() * &b_mat;
    let rhs = -(b_mat.transpose() * g);
    let m = free.len();
    let hess_rows: Vec<f64> = (0..m * m).map(|idx| hess[(idx / m, idx % m)]).collect();
    let f = solve_partial_pivot(hess_rows, rhs.iter().copied().collect())
        .ok_or(Error::IllConditionedElimination { spread })?;
    let w = &w0 + &z * DVector::from_vec(f);

    let xtw = x.transpose() * &w;
    let epsilon = xtw.norm_squared() / (2.0 * nf);

    // Recover the multipliers from J w = k e + θ r in the least-squares sense.
    let jw = x * &xtw;
    let (sum_r, sum_rr) = (r.sum(), r.norm_squared());
    let (rhs_e, rhs_r) = (jw.sum(), r.dot(&jw));
    let det = nf * sum_rr - sum_r * sum_r;
    let k = (rhs_e * sum_rr - rhs_r * sum_r) / det;
    let theta = (nf * rhs_r - sum_r * rhs_e) / det;

    let portfolio: Vec<f64> = w.iter().copied().collect();
    let q_w = portfolio.iter().map(|v| v * v).sum::<f64>() / nf;
    Ok(PrimalSolution {
        target_return,
        epsilon,
        portfolio,
        k,
        theta,
        q_w,
        sharpe: target_return / (2.0 * epsilon).sqrt(),
    })
}

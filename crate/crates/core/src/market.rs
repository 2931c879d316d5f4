//! Random-market ensemble and reproducible disorder realizations.
//!
//! A sample consists of the scaled return-rate matrix `X = {x_{iμ}/√N}`
//! (N assets by p scenarios) and the vector of asset mean returns `r`.
//! Every sample draws from its own ChaCha20 stream selected by the sample
//! index, so sample `c` never depends on how many samples were drawn before
//! it or on which thread drew it.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::EnsembleMoments;

/// Shape of the distribution used for returns or for mean returns.
///
/// Only the first two moments enter the large-N theory; the uniform option
/// matches them with a different shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    #[default]
    Gaussian,
    UniformMatchedMoments,
}

impl Distribution {
    fn draw<R: Rng>(self, rng: &mut R, mean: f64, variance: f64) -> f64 {
        match self {
            Distribution::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            Distribution::UniformMatchedMoments => {
                // U(mean - h, mean + h) has variance h²/3.
                let half_width = (3.0 * variance).sqrt();
                let u: f64 = rng.random();
                mean + half_width * (2.0 * u - 1.0)
            }
        }
    }
}

/// Generative description of the market ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub n_assets: usize,
    pub n_scenarios: usize,
    /// Variance σ̃² of the modified return rate x_{iμ}.
    pub return_variance: f64,
    /// Mean m of the asset mean returns r_i.
    pub mean_of_means: f64,
    /// Variance σ² of the asset mean returns r_i.
    pub variance_of_means: f64,
    pub return_dist: Distribution,
    pub mean_dist: Distribution,
    pub master_seed: u64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            n_assets: 250,
            n_scenarios: 750,
            return_variance: 1.0,
            mean_of_means: 1.0,
            variance_of_means: 1.0,
            return_dist: Distribution::Gaussian,
            mean_dist: Distribution::Gaussian,
            master_seed: 0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_assets == 0 {
            return Err(Error::InvalidParameter {
                name: "n_assets",
                reason: "must be positive".into(),
            });
        }
        if self.n_scenarios <= self.n_assets {
            return Err(Error::ScenarioRatio {
                n_assets: self.n_assets,
                n_scenarios: self.n_scenarios,
            });
        }
        if !(self.return_variance > 0.0 && self.return_variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "return_variance",
                reason: format!("must be positive and finite, got {}", self.return_variance),
            });
        }
        if !(self.variance_of_means > 0.0 && self.variance_of_means.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "variance_of_means",
                reason: format!("must be positive and finite, got {}", self.variance_of_means),
            });
        }
        if !self.mean_of_means.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean_of_means",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Scenario ratio α = p/N.
    pub fn alpha(&self) -> f64 {
        self.n_scenarios as f64 / self.n_assets as f64
    }

    pub fn moments(&self) -> Result<EnsembleMoments> {
        EnsembleMoments::new(
            self.alpha(),
            self.return_variance,
            self.mean_of_means,
            self.variance_of_means,
        )
    }
}

/// One disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSample {
    x_scaled: DMatrix<f64>,
    means: DVector<f64>,
    sample_index: u64,
}

impl MarketSample {
    /// Builds a sample from an explicit scaled return matrix (N x p) and mean vector.
    pub fn new(x_scaled: DMatrix<f64>, means: DVector<f64>, sample_index: u64) -> Result<Self> {
        let (n, p) = x_scaled.shape();
        if n == 0 || means.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "x_scaled has {n} rows but means has {} entries",
                means.len()
            )));
        }
        if p <= n {
            return Err(Error::ScenarioRatio {
                n_assets: n,
                n_scenarios: p,
            });
        }
        Ok(Self {
            x_scaled,
            means,
            sample_index,
        })
    }

    pub fn x_scaled(&self) -> &DMatrix<f64> {
        &self.x_scaled
    }

    pub fn means(&self) -> &DVector<f64> {
        &self.means
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    pub fn n_assets(&self) -> usize {
        self.x_scaled.nrows()
    }

    pub fn n_scenarios(&self) -> usize {
        self.x_scaled.ncols()
    }

    /// The Wishart matrix J = X Xᵀ.
    pub fn wishart(&self) -> DMatrix<f64> {
        &self.x_scaled * self.x_scaled.transpose()
    }
}

/// Draws sample `sample_index` of the ensemble.
///
/// The generator for sample `c` is ChaCha20 keyed by `master_seed` on stream
/// `c`; entries of X are drawn row by row, then the N mean returns.
pub fn sample_market(params: &MarketParams, sample_index: u64) -> Result<MarketSample> {
    params.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(params.master_seed);
    rng.set_stream(sample_index);

    let n = params.n_assets;
    let p = params.n_scenarios;
    let scale = 1.0 / (n as f64).sqrt();
    let mut entries = Vec::with_capacity(n * p);
    for _ in 0..n * p {
        entries.push(scale * params.return_dist.draw(&mut rng, 0.0, params.return_variance));
    }
    let x_scaled = DMatrix::from_row_slice(n, p, &entries);
    let means = DVector::from_iterator(
        n,
        (0..n).map(|_| {
            params
                .mean_dist
                .draw(&mut rng, params.mean_of_means, params.variance_of_means)
        }),
    );
    MarketSample::new(x_scaled, means, sample_index)
}

/// Cholesky factor of the Wishart matrix of one sample, reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct WishartFactor {
    chol: Cholesky<f64, Dyn>,
}

impl WishartFactor {
    pub fn new(sample: &MarketSample) -> Result<Self> {
        let j = sample.wishart();
        let chol = Cholesky::new(j).ok_or(Error::SingularWishart)?;
        let l = chol.l_dirty();
        // nalgebra only rejects non-positive pivots; a pivot that is not finite
        // is just as singular.
        if (0..l.nrows()).any(|i| !(l[(i, i)].is_finite() && l[(i, i)] > 0.0)) {
            return Err(Error::SingularWishart);
        }
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Solves J y = v.
    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {} but J is {}x{}",
                v.len(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(v))
    }
}

/// Solves J y = v for every v with a single factorization of J = X Xᵀ.
pub fn wishart_apply_inverse(
    sample: &MarketSample,
    vectors: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let factor = WishartFactor::new(sample)?;
    vectors.iter().map(|v| factor.solve(v)).collect()
}

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Squared-exponential covariance `exp(-|x1 - x2|^2 / (2 l^2))`.
pub fn rbf_kernel(x1: f64, x2: f64, length_scale: f64) -> Result<f64> {
    if !(length_scale > 0.0) {
        return Err(Error::input(format!(
            "RBF length scale must be positive, got {length_scale}"
        )));
    }
    let d = x1 - x2;
    Ok((-d * d / (2.0 * length_scale * length_scale)).exp())
}

/// Grid-independent part of a Gaussian random field prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrfPrior {
    pub length_scale: f64,
    #[serde(default = "default_jitter")]
    pub jitter: f64,
    /// Standard deviation multiplier applied to every draw.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_jitter() -> f64 {
    1e-10
}

fn default_scale() -> f64 {
    1.0
}

impl GrfPrior {
    pub fn new(length_scale: f64) -> Self {
        GrfPrior {
            length_scale,
            ..GrfPrior::default()
        }
    }
}

impl Default for GrfPrior {
    fn default() -> Self {
        GrfPrior {
            length_scale: 1e-3,
            jitter: default_jitter(),
            scale: default_scale(),
        }
    }
}

/// Mean-zero GRF with RBF covariance, discretised on `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrfConfig {
    pub grid: Vec<f64>,
    pub length_scale: f64,
    pub jitter: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl GrfConfig {
    pub fn new(grid: Vec<f64>, prior: GrfPrior) -> Result<Self> {
        let config = GrfConfig {
            grid,
            length_scale: prior.length_scale,
            jitter: prior.jitter,
            scale: prior.scale,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("GRF grid is empty"));
        }
        if self.grid.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::config("GRF grid points must lie in [0, 1]"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("GRF grid must be strictly increasing"));
        }
        if !(self.length_scale > 0.0) {
            return Err(Error::config("GRF length scale must be positive"));
        }
        if !(self.jitter >= 0.0) {
            return Err(Error::config("GRF jitter must be non-negative"));
        }
        if !(self.scale >= 0.0) {
            return Err(Error::config("GRF scale must be non-negative"));
        }
        Ok(())
    }

    /// Kernel matrix with `jitter` added to the diagonal.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let l2 = 2.0 * self.length_scale * self.length_scale;
        DMatrix::from_fn(n, n, |i, j| {
            let d = self.grid[i] - self.grid[j];
            let k = (-d * d / l2).exp();
            if i == j {
                k + self.jitter
            } else {
                k
            }
        })
    }

    /// Factorises the covariance once so that many draws can be taken cheaply.
    pub fn sampler(&self) -> Result<GrfSampler> {
        self.validate()?;
        let chol = self.covariance().cholesky().ok_or_else(|| {
            Error::Numerical(format!(
                "GRF covariance (l = {}, jitter = {}) is not positive definite; \
                 increase the jitter",
                self.length_scale, self.jitter
            ))
        })?;
        Ok(GrfSampler {
            lower: chol.l() * self.scale,
        })
    }
}

/// Draws `f = scale * L z` with `L` the Cholesky factor of the covariance and `z`
/// standard normal.
#[derive(Debug, Clone)]
pub struct GrfSampler {
    lower: DMatrix<f64>,
}

impl GrfSampler {
    pub fn len(&self) -> usize {
        self.lower.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.nrows() == 0
    }

    pub fn sample(&self, rng: &mut rng::Rng) -> Vec<f64> {
        let n = self.len();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        (0..n)
            .map(|i| (0..=i).map(|j| self.lower[(i, j)] * z[j]).sum())
            .collect()
    }
}

/// One draw of the field on the config's grid; deterministic in `seed`.
pub fn sample_grf(config: &GrfConfig, seed: u64) -> Result<Vec<f64>> {
    Ok(config.sampler()?.sample(&mut rng::seeded(seed)))
}

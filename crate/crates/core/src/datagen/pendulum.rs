use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Forced pendulum `y'' = -k sin(y) + f(t)` on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumConfig {
    pub k: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// RK4 steps per forcing sample interval.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub y0: f64,
    #[serde(default)]
    pub v0: f64,
}

fn default_t_end() -> f64 {
    1.0
}

fn default_substeps() -> usize {
    1
}

impl Default for PendulumConfig {
    fn default() -> Self {
        PendulumConfig {
            k: 1.0,
            t_end: default_t_end(),
            substeps: default_substeps(),
            y0: 0.0,
            v0: 0.0,
        }
    }
}

/// Angle `y` at each forcing sample time, integrated with classical RK4.
///
/// `f_samples` are forcing values on a uniform grid over `[0, t_end]`; between
/// samples the forcing is linear. Steps are aligned with the sample intervals so the
/// interpolant is smooth inside every step.
pub fn solve_pendulum(config: &PendulumConfig, f_samples: &[f64]) -> Result<Vec<f64>> {
    if f_samples.len() < 2 {
        return Err(Error::input("pendulum forcing needs at least two samples"));
    }
    if config.substeps == 0 || !(config.t_end > 0.0) {
        return Err(Error::config("substeps and t_end must be positive"));
    }
    let intervals = f_samples.len() - 1;
    let interval = config.t_end / intervals as f64;
    let h = interval / config.substeps as f64;
    let k = config.k;

    // derivative of (y, v) at fractional position `frac` of sample interval `idx`
    let deriv = |idx: usize, frac: f64, y: f64, v: f64| {
        let f = f_samples[idx] + frac * (f_samples[idx + 1] - f_samples[idx]);
        (v, -k * y.sin() + f)
    };

    let mut out = Vec::with_capacity(f_samples.len());
    let (mut y, mut v) = (config.y0, config.v0);
    out.push(y);
    for idx in 0..intervals {
        for sub in 0..config.substeps {
            let a = sub as f64 / config.substeps as f64;
            let mid = (sub as f64 + 0.5) / config.substeps as f64;
            let b = (sub + 1) as f64 / config.substeps as f64;
            let (k1y, k1v) = deriv(idx, a, y, v);
            let (k2y, k2v) = deriv(idx, mid, y + 0.5 * h * k1y, v + 0.5 * h * k1v);
            let (k3y, k3v) = deriv(idx, mid, y + 0.5 * h * k2y, v + 0.5 * h * k2v);
            let (k4y, k4v) = deriv(idx, b, y + h * k3y, v + h * k3v);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        out.push(y);
    }
    Ok(out)
}

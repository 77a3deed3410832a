use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{perturbation_bound, JSource};
use crate::datagen::Dataset;
use crate::deeponet::{j_upper_bound, DeepOnet};
use crate::nn::MlpParams;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub theta: f64,
    pub trials: usize,
    /// Largest observed increase of the empirical risk.
    pub max_observed: f64,
    /// Running maximum after each trial.
    pub running_max: Vec<f64>,
    pub bound: f64,
    pub j: f64,
    pub j_source: JSource,
    pub violations: usize,
    pub holds: bool,
}

/// Analytic weight-Lipschitz constant valid for every weight vector within
/// `slack` (in each coordinate) of `net`'s current weights, for inputs of norm at
/// most `input_norm`. The bias path is accounted for by treating it as one extra
/// unit input.
fn analytic_j(net: &MlpParams, slack: f64, input_norm: f64) -> Result<f64> {
    let w = (net.max_abs() + slack).max(1.0);
    let r = (input_norm * input_norm + 1.0).sqrt();
    j_upper_bound(w, net.flat().len(), 1, net.spec().depth(), r)
}

fn max_row_norm(rows: ndarray::ArrayView2<'_, f64>) -> f64 {
    rows.rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt())
        .fold(0.0, f64::max)
}

/// Uniform point of the Euclidean ball of radius `radius` in `R^len`.
fn ball_step(rng: &mut rng::Rng, len: usize, radius: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let scale = if norm > 0.0 {
        radius * u.powf(1.0 / len as f64) / norm
    } else {
        0.0
    };
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

/// Empirical check of the risk-perturbation bound: moves each net's weights by a
/// random vector of norm at most `theta / 2` and compares the increase of the
/// empirical risk with `q C J theta (B + 2 q C^2)`, where `J` is the analytic
/// weight-Lipschitz bound and `C` the output bound of the model's activations.
pub fn verify_perturbation(
    model: &DeepOnet,
    theta: f64,
    data: &Dataset,
    trials: usize,
    seed: u64,
) -> Result<PerturbationCheck> {
    if !(theta >= 0.0) {
        return Err(Error::input("theta must be non-negative"));
    }
    let c = model.output_bound().ok_or_else(|| {
        Error::input("perturbation check needs sigmoid or tanh outputs on both nets")
    })?;
    let slack = theta / 2.0;
    let j = analytic_j(&model.branch, slack, max_row_norm(data.sensors()))?.max(analytic_j(
        &model.trunk,
        slack,
        max_row_norm(data.points()),
    )?);
    let bound = perturbation_bound(model.q() as f64, c, j, theta, data.label_bound());
    let base = model.empirical_risk(data)?;

    let mut rng = rng::seeded(seed);
    let mut best = 0.0f64;
    let mut running_max = Vec::with_capacity(trials);
    let mut violations = 0;
    for _ in 0..trials {
        let mut moved = model.clone();
        for net in [&mut moved.branch, &mut moved.trunk] {
            let step = ball_step(&mut rng, net.flat().len(), slack);
            net.flat_mut()
                .iter_mut()
                .zip(&step)
                .for_each(|(w, s)| *w += s);
        }
        let increase = moved.empirical_risk(data)? - base;
        if increase > bound {
            violations += 1;
        }
        best = best.max(increase);
        running_max.push(best);
    }
    Ok(PerturbationCheck {
        theta,
        trials,
        max_observed: best,
        running_max,
        bound,
        j,
        j_source: JSource::Analytic,
        violations,
        holds: violations == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingCheck {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub t: f64,
    pub trials: usize,
    /// Fraction of trials with `mean - E[mean] >= t`.
    pub empirical_tail: f64,
    /// `exp(-2 n t^2 / (b - a)^2)`
    pub bound: f64,
    /// Monte Carlo standard error of a tail probability equal to the bound.
    pub std_error: f64,
    pub holds: bool,
}

/// Samples `trials` means of `n` i.i.d. uniform `[a, b]` variables and compares the
/// upper-tail frequency at deviation `t` with the Hoeffding bound plus three Monte
/// Carlo standard errors.
pub fn hoeffding_mc_check(
    a: f64,
    b: f64,
    n: usize,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<HoeffdingCheck> {
    if !(b > a) || n == 0 || trials == 0 || !(t >= 0.0) {
        return Err(Error::input("need a < b, n >= 1, trials >= 1 and t >= 0"));
    }
    let bound = (-2.0 * n as f64 * t * t / ((b - a) * (b - a))).exp();
    let mean = 0.5 * (a + b);
    let mut rng = rng::seeded(seed);
    let mut hits = 0usize;
    for _ in 0..trials {
        let sum: f64 = (0..n).map(|_| rng.random_range(a..b)).sum();
        if sum / n as f64 - mean >= t {
            hits += 1;
        }
    }
    let empirical_tail = hits as f64 / trials as f64;
    let std_error = (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(HoeffdingCheck {
        a,
        b,
        n,
        t,
        trials,
        empirical_tail,
        bound,
        std_error,
        holds: empirical_tail <= bound + 3.0 * std_error,
    })
}

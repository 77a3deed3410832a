//! Weight-Lipschitz constants: a uniform `J` with
//! `sup_x ||f_{w1}(x) - f_{w2}(x)||_inf <= J ||w1 - w2||`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::nn::{MlpParams, MlpSpec};
use crate::{rng, Error, Result};

/// Inputs drawn per sampled weight pair in [`estimate_j`].
const INPUTS_PER_PAIR: usize = 8;

/// Analytic weight-Lipschitz bound for a depth-`depth` network with `p` parameters,
/// each bounded in magnitude by `w >= 1`, at most `q_tied` matrix/bias entries tied
/// to one parameter, and inputs of norm at most `r`:
///
/// `(w * sqrt(p * q_tied))^(2 depth) * q_tied * r * sqrt(p)`
///
/// Evaluated in log space; returns `f64::INFINITY` when the value overflows.
pub fn j_upper_bound(w: f64, p: usize, q_tied: usize, depth: usize, r: f64) -> Result<f64> {
    if !(w >= 1.0) {
        return Err(Error::input(format!(
            "weight bound must be at least 1, got {w}"
        )));
    }
    if p == 0 || q_tied == 0 || depth == 0 || !(r > 0.0) {
        return Err(Error::input("p, Q, depth and R must all be positive"));
    }
    let (p, q) = (p as f64, q_tied as f64);
    let log_norm_bound = depth as f64 * (w.ln() + 0.5 * (p * q).ln());
    let log_j = 2.0 * log_norm_bound + q.ln() + r.ln() + 0.5 * p.ln();
    Ok(log_j.exp())
}

/// Axis-aligned box of network inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl InputBox {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        InputBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Largest Euclidean norm of a point in the box.
    pub fn max_norm(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Monte Carlo estimate of `J`. It is a maximum over sampled pairs and inputs and
/// therefore a lower bound on the true constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JEstimate {
    pub estimate: f64,
    pub pairs_used: usize,
    /// Pairs with `w1 == w2`, which carry no information.
    pub pairs_skipped: usize,
    /// Running maximum after each sampled pair.
    pub running_max: Vec<f64>,
}

/// Samples weight pairs uniformly from the Euclidean ball of radius `weight_bound`
/// and inputs uniformly from `domain`, returning the largest observed ratio
/// `||f_{w1}(x) - f_{w2}(x)||_inf / ||w1 - w2||`.
pub fn estimate_j(
    spec: &MlpSpec,
    weight_bound: f64,
    domain: &InputBox,
    pairs: usize,
    seed: u64,
) -> Result<JEstimate> {
    estimate_j_masked(spec, weight_bound, domain, pairs, seed, &[])
}

/// Like [`estimate_j`], with the parameters flagged in `frozen` pinned to zero.
/// An empty mask freezes nothing.
pub fn estimate_j_masked(
    spec: &MlpSpec,
    weight_bound: f64,
    domain: &InputBox,
    pairs: usize,
    seed: u64,
    frozen: &[bool],
) -> Result<JEstimate> {
    spec.validate()?;
    let p = spec.param_count();
    if pairs == 0 {
        return Err(Error::input("at least one weight pair is required"));
    }
    if !(weight_bound > 0.0) {
        return Err(Error::input("weight bound must be positive"));
    }
    if domain.dim() != spec.input_dim() || domain.hi.len() != domain.dim() {
        return Err(Error::input(
            "input box dimension does not match the network",
        ));
    }
    if !frozen.is_empty() && frozen.len() != p {
        return Err(Error::input(
            "frozen mask length differs from the parameter count",
        ));
    }
    let free: Vec<usize> = (0..p).filter(|&i| frozen.get(i) != Some(&true)).collect();

    let mut rng = rng::seeded(seed);
    let mut best = 0.0f64;
    let mut skipped = 0;
    let mut running_max = Vec::with_capacity(pairs);
    let mut x = vec![0.0; domain.dim()];

    for _ in 0..pairs {
        let w1 = sample_ball(&mut rng, p, &free, weight_bound);
        let w2 = sample_ball(&mut rng, p, &free, weight_bound);
        let dist = w1
            .iter()
            .zip(&w2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let net1 = MlpParams::from_flat(spec.clone(), w1)?;
        let net2 = MlpParams::from_flat(spec.clone(), w2)?;
        for _ in 0..INPUTS_PER_PAIR {
            for (xi, (lo, hi)) in x.iter_mut().zip(domain.lo.iter().zip(&domain.hi)) {
                *xi = lo + (hi - lo) * rng.random::<f64>();
            }
            if dist == 0.0 {
                continue;
            }
            let y1 = net1.forward(&x)?;
            let y2 = net2.forward(&x)?;
            let sup = y1
                .iter()
                .zip(&y2)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            best = best.max(sup / dist);
        }
        if dist == 0.0 {
            skipped += 1;
        }
        running_max.push(best);
    }
    Ok(JEstimate {
        estimate: best,
        pairs_used: pairs - skipped,
        pairs_skipped: skipped,
        running_max,
    })
}

/// Uniform point of the radius-`radius` ball spanned by the coordinates in `free`.
fn sample_ball(rng: &mut rng::Rng, p: usize, free: &[usize], radius: f64) -> Vec<f64> {
    let mut w = vec![0.0; p];
    if free.is_empty() {
        return w;
    }
    let mut norm2 = 0.0;
    for &i in free {
        let z: f64 = rng.sample(StandardNormal);
        w[i] = z;
        norm2 += z * z;
    }
    let u: f64 = rng.random();
    let scale = radius * u.powf(1.0 / free.len() as f64) / norm2.sqrt();
    for &i in free {
        w[i] *= scale;
    }
    w
}

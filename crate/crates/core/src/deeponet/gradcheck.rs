//! Central finite-difference check of [`DeepOnet::loss_grads`].

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::DeepOnet;
use crate::datagen::{Dataset, DatasetMeta};
use crate::nn::{HiddenActivation, MlpParams, MlpSpec, OutputActivation};
use crate::{rng, Result};

/// Hook applied to the analytic gradients before they are compared.
pub type Tamper<'a> = &'a dyn Fn(&mut [f64]);

pub const FD_STEP: f64 = 1e-6;

/// Magnitude below which gradient differences are measured absolutely rather than
/// relative to the gradient.
pub const RELATIVE_FLOOR: f64 = 1e-2;

/// `|a - b| / max(|a|, |b|, RELATIVE_FLOOR)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub cases: usize,
    pub coordinates_checked: usize,
    /// Coordinates whose finite-difference stencil straddled a ReLU kink.
    pub coordinates_skipped: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// A random DeepONet (widths <= 8, q <= 4) together with a small random batch.
pub fn random_case(seed: u64) -> Result<(DeepOnet, Dataset)> {
    let mut rng = rng::seeded(seed);
    let q = rng.random_range(1..=4usize);
    let m = rng.random_range(1..=8usize);
    let d2 = rng.random_range(1..=3usize);
    let hidden = if rng.random::<bool>() {
        HiddenActivation::Relu
    } else {
        HiddenActivation::Tanh
    };
    let out = match rng.random_range(0..3) {
        0 => OutputActivation::Sigmoid,
        1 => OutputActivation::Tanh,
        _ => OutputActivation::Linear,
    };
    let dims = |input: usize, rng: &mut rng::Rng| {
        let depth = rng.random_range(1..=3usize);
        let mut d = vec![input];
        d.extend((1..depth).map(|_| rng.random_range(1..=8usize)));
        d.push(q);
        d
    };
    let bd = dims(m, &mut rng);
    let td = dims(d2, &mut rng);
    let model = DeepOnet::init(
        MlpSpec::new(bd, hidden, out)?,
        MlpSpec::new(td, hidden, out)?,
        rng.random(),
    )?;
    let n = rng.random_range(1..=6usize);
    let s = Array2::from_shape_simple_fn((n, m), || rng.sample::<f64, _>(StandardNormal));
    let p = Array2::from_shape_simple_fn((n, d2), || rng.random_range(-1.0..1.0));
    let y = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    Ok((model, Dataset::new(s, p, y, DatasetMeta::default())?))
}

/// Hidden-unit on/off pattern of a network over a batch.
fn relu_pattern(net: &MlpParams, x: &Array2<f64>) -> Result<Vec<bool>> {
    if net.spec().hidden_activation != HiddenActivation::Relu {
        return Ok(Vec::new());
    }
    let trace = net.forward_traced(x.view())?;
    let acts = trace.activations();
    Ok(acts[1..acts.len() - 1]
        .iter()
        .flat_map(|a| a.iter().map(|&v| v > 0.0))
        .collect())
}

/// Compares `loss_grads` against central differences of `empirical_risk` for every
/// parameter of `cases` random models. `tamper` is applied to the analytic
/// gradients before comparison and exists so callers can confirm that the check
/// detects a broken gradient.
pub fn check_random_models(
    cases: usize,
    seed: u64,
    tolerance: f64,
    tamper: Option<Tamper<'_>>,
) -> Result<GradCheckReport> {
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut skipped = 0;
    for case in 0..cases {
        let (model, data) = random_case(rng::derive_seed(seed, case as u64))?;
        let mut grads = model.loss_grads(&data)?;
        if let Some(f) = tamper {
            f(&mut grads.branch);
            f(&mut grads.trunk);
        }
        for (which, analytic) in [(0, &grads.branch), (1, &grads.trunk)] {
            for (i, &g) in analytic.iter().enumerate() {
                let eval = |delta: f64| -> Result<(f64, Vec<bool>)> {
                    let mut m = model.clone();
                    let (net, input) = if which == 0 {
                        (&mut m.branch, data.sensors().to_owned())
                    } else {
                        (&mut m.trunk, data.points().to_owned())
                    };
                    net.flat_mut()[i] += delta;
                    let pattern = relu_pattern(net, &input)?;
                    Ok((m.empirical_risk(&data)?, pattern))
                };
                let (plus, pat_plus) = eval(FD_STEP)?;
                let (minus, pat_minus) = eval(-FD_STEP)?;
                if pat_plus != pat_minus {
                    skipped += 1;
                    continue;
                }
                let fd = (plus - minus) / (2.0 * FD_STEP);
                worst = worst.max(relative_error(g, fd));
                checked += 1;
            }
        }
    }
    Ok(GradCheckReport {
        cases,
        coordinates_checked: checked,
        coordinates_skipped: skipped,
        max_relative_error: worst,
        tolerance,
        holds: worst < tolerance,
    })
}

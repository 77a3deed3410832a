use serde::{Deserialize, Serialize};

use crate::datagen::{AdrConfig, GrfPrior};
use crate::nn::{param_count, HiddenActivation, MlpSpec, OutputActivation};
use crate::{Error, Result};

/// Exponent `e` of the ratio `q / n^e` held fixed along a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponent {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "2/3")]
    TwoThirds,
    #[serde(rename = "1/6")]
    Sixth,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Half => 0.5,
            Exponent::TwoThirds => 2.0 / 3.0,
            Exponent::Sixth => 1.0 / 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub q: u64,
    pub n: u64,
}

/// Training-set sizes `n = round(n0 (q / q0)^(1/e))`, which keep `q / n^e` at its
/// anchor value.
pub fn make_plan(anchor: Anchor, q_list: &[u64], exponent: Exponent) -> Result<Vec<(u64, u64)>> {
    if anchor.q == 0 || anchor.n == 0 {
        return Err(Error::config("plan anchor needs q0 >= 1 and n0 >= 1"));
    }
    let power = 1.0 / exponent.value();
    Ok(q_list
        .iter()
        .map(|&q| {
            let n = anchor.n as f64 * (q as f64 / anchor.q as f64).powf(power);
            (q, n.round() as u64)
        })
        .collect())
}

fn uniform_dims(input: usize, width: usize, depth: usize, output: usize) -> Vec<usize> {
    let mut dims = vec![input];
    dims.extend(std::iter::repeat_n(width, depth - 1));
    dims.push(output);
    dims
}

/// Parameters of a DeepONet whose branch and trunk both have `depth` weight
/// layers of hidden width `width`.
pub fn deeponet_param_count(
    width: usize,
    q: usize,
    depth: usize,
    branch_in: usize,
    trunk_in: usize,
) -> usize {
    param_count(&uniform_dims(branch_in, width, depth, q))
        + param_count(&uniform_dims(trunk_in, width, depth, q))
}

/// Uniform hidden width whose DeepONet parameter count is closest to `target`
/// (ties go to the narrower net).
pub fn size_architecture(
    target: usize,
    q: usize,
    depth: usize,
    branch_in: usize,
    trunk_in: usize,
) -> Result<usize> {
    if depth < 2 {
        return Err(Error::config("a hidden width needs depth >= 2"));
    }
    if q == 0 || branch_in == 0 || trunk_in == 0 {
        return Err(Error::config(
            "q and both input dimensions must be positive",
        ));
    }
    let count = |w| deeponet_param_count(w, q, depth, branch_in, trunk_in);
    if target < count(1) {
        return Err(Error::config(format!(
            "a budget of {target} parameters is below the smallest net ({}) at q = {q}",
            count(1)
        )));
    }
    let mut w = 1;
    while count(w + 1) <= target {
        w += 1;
    }
    if count(w + 1) - target < target - count(w) {
        w += 1;
    }
    Ok(w)
}

/// One `(q, n)` cell of a plan together with its sized architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSpec {
    pub q: u64,
    pub n: u64,
    pub width: usize,
    pub param_count: usize,
}

/// Largest relative deviation of any cell's parameter count from the budget.
pub const PARAM_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub exponent: Exponent,
    pub anchor: Anchor,
    pub q_list: Vec<u64>,
    pub target_params: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_branch_in")]
    pub branch_in: usize,
    #[serde(default = "default_trunk_in")]
    pub trunk_in: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_points_per_function")]
    pub points_per_function: usize,
    /// Seed of the shared training data; cells with larger `n` extend the data of
    /// smaller ones.
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub pde: AdrConfig,
    #[serde(default)]
    pub grf: GrfPrior,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_hidden")]
    pub hidden_activation: HiddenActivation,
    #[serde(default = "default_output")]
    pub output_activation: OutputActivation,
}

fn default_depth() -> usize {
    5
}
fn default_branch_in() -> usize {
    40
}
fn default_trunk_in() -> usize {
    2
}
fn default_epochs() -> usize {
    120
}
fn default_batch_size() -> usize {
    256
}
fn default_lr() -> f64 {
    1e-3
}
fn default_points_per_function() -> usize {
    100
}
fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}
fn default_hidden() -> HiddenActivation {
    HiddenActivation::Relu
}
fn default_output() -> OutputActivation {
    OutputActivation::Tanh
}

impl ExperimentPlan {
    /// A plan with every optional field at its default.
    pub fn new(exponent: Exponent, anchor: Anchor, q_list: Vec<u64>, target_params: usize) -> Self {
        ExperimentPlan {
            exponent,
            anchor,
            q_list,
            target_params,
            depth: default_depth(),
            branch_in: default_branch_in(),
            trunk_in: default_trunk_in(),
            epochs: default_epochs(),
            batch_size: default_batch_size(),
            lr: default_lr(),
            points_per_function: default_points_per_function(),
            data_seed: 0,
            noise_std: 0.0,
            pde: AdrConfig::default(),
            grf: GrfPrior::default(),
            seeds: default_seeds(),
            hidden_activation: default_hidden(),
            output_activation: default_output(),
        }
    }

    /// Sizes every cell, checking that `n` grows with `q` and that each parameter
    /// count stays within [`PARAM_TOLERANCE`] of the budget.
    pub fn cells(&self) -> Result<Vec<CellSpec>> {
        if self.q_list.is_empty() {
            return Err(Error::config("plan has no q values"));
        }
        if self.q_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("q values must be strictly increasing"));
        }
        if self.batch_size == 0 || self.points_per_function == 0 {
            return Err(Error::config(
                "batch size and points per function must be positive",
            ));
        }
        if self.branch_in > self.pde.nx {
            return Err(Error::config(format!(
                "{} sensors do not fit on a grid of {} nodes",
                self.branch_in, self.pde.nx
            )));
        }
        if self.trunk_in != 2 {
            return Err(Error::config(
                "ADR query points are (x, t), so trunk_in must be 2",
            ));
        }
        self.pde.validate()?;

        let pairs = make_plan(self.anchor, &self.q_list, self.exponent)?;
        if pairs.windows(2).any(|w| w[0].1 >= w[1].1) {
            return Err(Error::config("plan sizes n must grow strictly with q"));
        }
        pairs
            .into_iter()
            .map(|(q, n)| {
                if n == 0 {
                    return Err(Error::config(format!("cell q = {q} rounds to n = 0")));
                }
                let (depth, bi, ti) = (self.depth, self.branch_in, self.trunk_in);
                let width = size_architecture(self.target_params, q as usize, depth, bi, ti)?;
                let count = deeponet_param_count(width, q as usize, depth, bi, ti);
                let deviation =
                    (count as f64 - self.target_params as f64).abs() / self.target_params as f64;
                if deviation > PARAM_TOLERANCE {
                    return Err(Error::config(format!(
                        "cell q = {q} has {count} parameters, more than 5% away from {}",
                        self.target_params
                    )));
                }
                Ok(CellSpec {
                    q,
                    n,
                    width,
                    param_count: count,
                })
            })
            .collect()
    }

    pub(crate) fn branch_spec(&self, cell: &CellSpec) -> Result<MlpSpec> {
        MlpSpec::uniform(
            self.branch_in,
            cell.width,
            self.depth,
            cell.q as usize,
            self.hidden_activation,
            self.output_activation,
        )
    }

    pub(crate) fn trunk_spec(&self, cell: &CellSpec) -> Result<MlpSpec> {
        MlpSpec::uniform(
            self.trunk_in,
            cell.width,
            self.depth,
            cell.q as usize,
            self.hidden_activation,
            self.output_activation,
        )
    }
}

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::datagen::Dataset;
use crate::nn::{MlpParams, MlpSpec};
use crate::{rng, Error, Result};

/// Rows evaluated per chunk when scoring a whole dataset.
const EVAL_CHUNK: usize = 4096;

/// `h(s, p) = <Branch(s), Trunk(p)>` with branch and trunk sharing the output
/// dimension `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepOnet {
    pub branch: MlpParams,
    pub trunk: MlpParams,
}

/// Gradients of the mean squared error over one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrads {
    pub branch: Vec<f64>,
    pub trunk: Vec<f64>,
    pub loss: f64,
}

impl DeepOnet {
    pub fn new(branch: MlpParams, trunk: MlpParams) -> Result<Self> {
        let (qb, qt) = (branch.spec().output_dim(), trunk.spec().output_dim());
        if qb != qt {
            return Err(Error::config(format!(
                "branch outputs {qb} features but trunk outputs {qt}"
            )));
        }
        Ok(DeepOnet { branch, trunk })
    }

    /// Fresh random model; branch and trunk get independent streams derived from
    /// `seed`.
    pub fn init(branch: MlpSpec, trunk: MlpSpec, seed: u64) -> Result<Self> {
        Self::new(
            MlpParams::init(branch, rng::derive_seed(seed, 1))?,
            MlpParams::init(trunk, rng::derive_seed(seed, 2))?,
        )
    }

    pub fn q(&self) -> usize {
        self.branch.spec().output_dim()
    }

    pub fn sensor_dim(&self) -> usize {
        self.branch.spec().input_dim()
    }

    pub fn point_dim(&self) -> usize {
        self.trunk.spec().input_dim()
    }

    /// Sup-norm bound `C` on branch and trunk outputs, available when both end in a
    /// bounded activation.
    pub fn output_bound(&self) -> Option<f64> {
        let b = self.branch.spec().output_activation.sup_bound()?;
        let t = self.trunk.spec().output_activation.sup_bound()?;
        Some(b.max(t))
    }

    pub fn param_count(&self) -> usize {
        self.branch.flat().len() + self.trunk.flat().len()
    }

    pub fn forward(&self, s: &[f64], p: &[f64]) -> Result<f64> {
        let b = self.branch.forward(s)?;
        let t = self.trunk.forward(p)?;
        Ok(b.iter().zip(&t).map(|(x, y)| x * y).sum())
    }

    pub fn predict_batch(
        &self,
        sensors: ArrayView2<'_, f64>,
        points: ArrayView2<'_, f64>,
    ) -> Result<Array1<f64>> {
        if sensors.nrows() != points.nrows() {
            return Err(Error::input("sensor and point batches differ in length"));
        }
        let b = self.branch.forward_batch(sensors)?;
        let t = self.trunk.forward_batch(points)?;
        Ok((&b * &t).sum_axis(Axis(1)))
    }

    /// Mean squared residual `(1/n) sum_i (y_i - h(s_i, p_i))^2`.
    pub fn empirical_risk(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::input("empirical risk of an empty dataset"));
        }
        self.check_dataset(data)?;
        let mut total = 0.0;
        let n = data.len();
        let mut start = 0;
        while start < n {
            let end = (start + EVAL_CHUNK).min(n);
            let pred = self.predict_batch(
                data.sensors().slice(s![start..end, ..]),
                data.points().slice(s![start..end, ..]),
            )?;
            let labels = data.labels().slice_move(s![start..end]);
            total += pred
                .iter()
                .zip(labels.iter())
                .fold(0.0, |acc, (&h, &y)| acc + (y - h) * (y - h));
            start = end;
        }
        Ok(total / n as f64)
    }

    /// Exact gradient of the batch mean squared error.
    pub fn loss_grads(&self, data: &Dataset) -> Result<LossGrads> {
        self.check_dataset(data)?;
        self.loss_grads_arrays(data.sensors(), data.points(), data.labels())
    }

    pub fn loss_grads_arrays(
        &self,
        sensors: ArrayView2<'_, f64>,
        points: ArrayView2<'_, f64>,
        labels: ArrayView1<'_, f64>,
    ) -> Result<LossGrads> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::input("loss gradient of an empty batch"));
        }
        if sensors.nrows() != n || points.nrows() != n {
            return Err(Error::input("batch arrays disagree in length"));
        }
        let b_trace = self.branch.forward_traced(sensors)?;
        let t_trace = self.trunk.forward_traced(points)?;
        let b_out = b_trace.output();
        let t_out = t_trace.output();

        let residual: Array1<f64> = (b_out * t_out).sum_axis(Axis(1)) - labels;
        let loss = residual.dot(&residual) / n as f64;

        // dL/dB_i = (2/n) r_i T_i and symmetrically for the trunk
        let scale = (&residual * (2.0 / n as f64)).insert_axis(Axis(1));
        let b_grad_out: Array2<f64> = t_out * &scale;
        let t_grad_out: Array2<f64> = b_out * &scale;

        let mut branch = vec![0.0; self.branch.flat().len()];
        let mut trunk = vec![0.0; self.trunk.flat().len()];
        self.branch
            .backward_traced(&b_trace, b_grad_out.view(), &mut branch)?;
        self.trunk
            .backward_traced(&t_trace, t_grad_out.view(), &mut trunk)?;
        Ok(LossGrads {
            branch,
            trunk,
            loss,
        })
    }

    fn check_dataset(&self, data: &Dataset) -> Result<()> {
        if data.sensor_dim() != self.sensor_dim() || data.point_dim() != self.point_dim() {
            return Err(Error::input(format!(
                "dataset has (m, d2) = ({}, {}) but the model expects ({}, {})",
                data.sensor_dim(),
                data.point_dim(),
                self.sensor_dim(),
                self.point_dim()
            )));
        }
        Ok(())
    }
}

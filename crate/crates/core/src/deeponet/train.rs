use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Checkpoint, DeepOnet};
use crate::datagen::Dataset;
use crate::nn::AdamState;
use crate::{rng, Error, Result};

/// Stream label for the per-epoch shuffling generator.
const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Seed of the mini-batch shuffling.
    #[serde(default)]
    pub seed: u64,
    /// When set, both nets are projected onto the Euclidean ball of this radius
    /// after every optimizer step.
    #[serde(default)]
    pub project_to_ball: Option<f64>,
}

fn default_batch_size() -> usize {
    256
}

fn default_lr() -> f64 {
    1e-3
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 120,
            batch_size: default_batch_size(),
            lr: default_lr(),
            seed: 0,
            project_to_ball: None,
        }
    }
}

/// Mini-batch Adam training of a [`DeepOnet`], resumable from a [`Checkpoint`].
///
/// Epoch `e` shuffles with its own random stream, so a run split across a
/// checkpoint reproduces the uninterrupted run bit for bit.
#[derive(Debug, Clone)]
pub struct Trainer {
    model: DeepOnet,
    branch_opt: AdamState,
    trunk_opt: AdamState,
    shuffle_seed: u64,
    init_seed: u64,
    loss_curve: Vec<f64>,
}

impl Trainer {
    pub fn new(model: DeepOnet, lr: f64, shuffle_seed: u64) -> Self {
        let branch_opt = AdamState::new(model.branch.flat().len()).with_lr(lr);
        let trunk_opt = AdamState::new(model.trunk.flat().len()).with_lr(lr);
        Trainer {
            model,
            branch_opt,
            trunk_opt,
            shuffle_seed,
            init_seed: 0,
            loss_curve: Vec::new(),
        }
    }

    /// Records the seed the model was initialised from, for checkpoint provenance.
    pub fn with_init_seed(mut self, seed: u64) -> Self {
        self.init_seed = seed;
        self
    }

    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Self> {
        let model = ckpt.model()?;
        let fresh = |len: usize| AdamState::new(len).with_lr(ckpt.lr);
        let branch_opt = ckpt
            .branch_optimizer
            .clone()
            .unwrap_or_else(|| fresh(model.branch.flat().len()));
        let trunk_opt = ckpt
            .trunk_optimizer
            .clone()
            .unwrap_or_else(|| fresh(model.trunk.flat().len()));
        if branch_opt.len() != model.branch.flat().len()
            || trunk_opt.len() != model.trunk.flat().len()
        {
            return Err(Error::input(
                "checkpoint optimizer state does not match the model",
            ));
        }
        Ok(Trainer {
            model,
            branch_opt,
            trunk_opt,
            shuffle_seed: ckpt.train_seed,
            init_seed: ckpt.init_seed,
            loss_curve: ckpt.loss_curve,
        })
    }

    pub fn model(&self) -> &DeepOnet {
        &self.model
    }

    pub fn into_model(self) -> DeepOnet {
        self.model
    }

    pub fn epochs_done(&self) -> usize {
        self.loss_curve.len()
    }

    /// Full-training-set empirical risk recorded at the end of each epoch.
    pub fn loss_curve(&self) -> &[f64] {
        &self.loss_curve
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::from_model(&self.model)
            .with_seeds(self.init_seed, self.shuffle_seed)
            .with_training_state(
                self.loss_curve.clone(),
                self.branch_opt.clone(),
                self.trunk_opt.clone(),
            )
    }

    /// Trains for `epochs` more epochs.
    pub fn train(
        &mut self,
        data: &Dataset,
        epochs: usize,
        batch_size: usize,
        project_to_ball: Option<f64>,
    ) -> Result<()> {
        if batch_size == 0 {
            return Err(Error::config("batch size must be positive"));
        }
        if data.is_empty() {
            return Err(Error::input("cannot train on an empty dataset"));
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..epochs {
            let epoch = self.loss_curve.len() as u64;
            order.sort_unstable();
            order.shuffle(&mut rng::substream(
                self.shuffle_seed ^ SHUFFLE_STREAM,
                epoch,
            ));

            for chunk in order.chunks(batch_size) {
                let s = data.sensors().select(Axis(0), chunk);
                let p = data.points().select(Axis(0), chunk);
                let y = data.labels().select(Axis(0), chunk);
                let grads = self.model.loss_grads_arrays(s.view(), p.view(), y.view())?;
                if !grads.loss.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite batch loss in epoch {}",
                        epoch + 1
                    )));
                }
                self.branch_opt
                    .step(self.model.branch.flat_mut(), &grads.branch)?;
                self.trunk_opt
                    .step(self.model.trunk.flat_mut(), &grads.trunk)?;
                if let Some(radius) = project_to_ball {
                    self.model.branch.project_to_ball(radius);
                    self.model.trunk.project_to_ball(radius);
                }
            }

            let loss = self.model.empirical_risk(data)?;
            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite training loss after epoch {}",
                    epoch + 1
                )));
            }
            self.loss_curve.push(loss);
        }
        Ok(())
    }

    pub fn run(&mut self, data: &Dataset, config: &TrainConfig) -> Result<()> {
        self.train(
            data,
            config.epochs,
            config.batch_size,
            config.project_to_ball,
        )
    }
}

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DeepOnet;
use crate::nn::{AdamState, MlpParams, MlpSpec};
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "deeponet-checkpoint/1";

/// Serialised model: both specs, seeds, and the flat parameter vectors.
///
/// Numbers are written in shortest round-trip decimal form, so save/load is exact.
/// Optimizer state and the loss curve are optional and allow a run to resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub q: usize,
    pub branch_spec: MlpSpec,
    pub trunk_spec: MlpSpec,
    pub init_seed: u64,
    pub train_seed: u64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub loss_curve: Vec<f64>,
    pub branch: Vec<f64>,
    pub trunk: Vec<f64>,
    #[serde(default)]
    pub branch_optimizer: Option<AdamState>,
    #[serde(default)]
    pub trunk_optimizer: Option<AdamState>,
}

fn default_lr() -> f64 {
    1e-3
}

impl Checkpoint {
    pub fn from_model(model: &DeepOnet) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            q: model.q(),
            branch_spec: model.branch.spec().clone(),
            trunk_spec: model.trunk.spec().clone(),
            init_seed: 0,
            train_seed: 0,
            lr: default_lr(),
            loss_curve: Vec::new(),
            branch: model.branch.flat().to_vec(),
            trunk: model.trunk.flat().to_vec(),
            branch_optimizer: None,
            trunk_optimizer: None,
        }
    }

    pub fn with_seeds(mut self, init_seed: u64, train_seed: u64) -> Self {
        self.init_seed = init_seed;
        self.train_seed = train_seed;
        self
    }

    pub fn with_training_state(
        mut self,
        loss_curve: Vec<f64>,
        branch_optimizer: AdamState,
        trunk_optimizer: AdamState,
    ) -> Self {
        self.lr = branch_optimizer.lr;
        self.loss_curve = loss_curve;
        self.branch_optimizer = Some(branch_optimizer);
        self.trunk_optimizer = Some(trunk_optimizer);
        self
    }

    pub fn model(&self) -> Result<DeepOnet> {
        let model = DeepOnet::new(
            MlpParams::from_flat(self.branch_spec.clone(), self.branch.clone())?,
            MlpParams::from_flat(self.trunk_spec.clone(), self.trunk.clone())?,
        )?;
        if model.q() != self.q {
            return Err(Error::input(format!(
                "checkpoint header says q = {} but the nets output {}",
                self.q,
                model.q()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::format(
                path,
                format!("unknown checkpoint format {:?}", ckpt.format),
            ));
        }
        Ok(ckpt)
    }
}

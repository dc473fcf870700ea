//! Mini-batch training with Adam and validation-based early stopping.
//!
//! The trainer is deterministic given (config, dataset): initialization,
//! the train/validation carve, and every epoch shuffle draw from fixed
//! substreams of `config.seed`, so two runs produce bit-identical models
//! and logs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{apply_norm, compute_norm_stats, Dataset};
use crate::error::{Error, Result};
use crate::rng::{shuffle_in_place, substream};

use super::{
    adam_step, init_xavier, loss, loss_and_backward, AdamState, MlpArch, MlpModel,
    TrainExample,
};

/// Training hyperparameters. The defaults are the reference configuration:
/// batches of 40, up to 2000 epochs with patience 100, L2 weight 0.01,
/// learning rate 1e-4, and an 80/20 train/validation carve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// L2 regularization weight over all weights and biases.
    pub lambda: f64,
    pub learning_rate: f64,
    /// Fraction of the provided data held out for validation. A fraction
    /// whose floor yields zero samples disables validation and early
    /// stopping; the final-epoch parameters are returned then.
    pub validation_fraction: f64,
    /// Drives initialization, the validation carve, and epoch shuffles.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 40,
            max_epochs: 2000,
            patience: 100,
            lambda: 0.01,
            learning_rate: 1e-4,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument(
                "batch_size, max_epochs, and patience must be at least 1".into(),
            ));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: TrainConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        config.validate().map_err(|e| Error::json(path, e))?;
        Ok(config)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Per-epoch loss history and the early-stopping outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    /// Epoch-average training loss (regularization included), one entry
    /// per epoch run.
    pub train_loss: Vec<f64>,
    /// Validation MSE (no regularization); empty when validation is
    /// disabled.
    pub val_loss: Vec<f64>,
    /// Epoch index of the returned parameter snapshot; None without
    /// validation (the final epoch is returned then).
    pub best_epoch: Option<usize>,
    pub best_val_loss: Option<f64>,
    pub epochs_run: usize,
}

/// Deterministic train/validation index carve: a seeded shuffle of 0..n,
/// with the last ⌊fraction·n⌋ indices forming the validation side.
fn validation_split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = substream(seed, 1);
    shuffle_in_place(&mut idx, &mut rng);
    let n_val = (fraction * n as f64).floor() as usize;
    let val = idx.split_off(n - n_val);
    (idx, val)
}

/// Trains a position regressor on the dataset.
///
/// Normalization statistics are computed from the full provided dataset
/// before the validation carve and are stored in the returned model, so
/// inference on raw RSS vectors is self-contained. Targets are the sample
/// (x, y) coordinates in meters.
///
/// Per epoch: shuffle, mini-batches of `batch_size` (a trailing partial
/// batch is kept and weighted by its actual size), one Adam update per
/// batch. Validation loss is tracked every epoch; after `patience` epochs
/// without improvement training stops and the best-validation snapshot is
/// returned.
pub fn train(
    data: &Dataset,
    arch: &MlpArch,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainLog)> {
    config.validate()?;
    arch.validate()?;
    if arch.input_dim != data.n_sensors() {
        return Err(Error::DimensionMismatch(format!(
            "arch expects {} inputs but the dataset has {} RSS columns",
            arch.input_dim,
            data.n_sensors()
        )));
    }
    if arch.output_dim != 2 {
        return Err(Error::InvalidArgument(
            "training targets are planar (x, y) coordinates; output_dim must be 2".into(),
        ));
    }
    if data.len() < config.batch_size {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} samples, fewer than one batch of {}",
            data.len(),
            config.batch_size
        )));
    }

    let stats = compute_norm_stats(data);
    let examples: Vec<TrainExample> = data
        .samples()
        .iter()
        .map(|s| TrainExample {
            input: apply_norm(&s.rss, &stats),
            target: vec![s.position.x, s.position.y],
        })
        .collect();

    let (train_idx, val_idx) =
        validation_split(data.len(), config.validation_fraction, config.seed);
    let mut train_ex: Vec<TrainExample> =
        train_idx.iter().map(|&i| examples[i].clone()).collect();
    let val_ex: Vec<TrainExample> = val_idx.iter().map(|&i| examples[i].clone()).collect();

    let mut model = init_xavier(arch, &mut substream(config.seed, 0))?;
    model.norm = stats;
    let mut adam = AdamState::new(&model);
    let mut shuffle_rng = substream(config.seed, 2);

    let mut log = TrainLog {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: None,
        best_val_loss: None,
        epochs_run: 0,
    };
    let mut best_params: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    let mut stall = 0usize;

    for epoch in 0..config.max_epochs {
        shuffle_in_place(&mut train_ex, &mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in train_ex.chunks(config.batch_size) {
            let (batch_loss, grads) = loss_and_backward(&model, batch, config.lambda)?;
            adam_step(&mut adam, &mut model, &grads, config.learning_rate);
            epoch_loss += batch_loss * batch.len() as f64;
        }
        log.train_loss.push(epoch_loss / train_ex.len() as f64);
        log.epochs_run = epoch + 1;

        if !val_ex.is_empty() {
            let vl = loss(&model, &val_ex, 0.0)?;
            log.val_loss.push(vl);
            let improved = log.best_val_loss.map_or(true, |best| vl < best);
            if improved {
                log.best_val_loss = Some(vl);
                log.best_epoch = Some(epoch);
                best_params = Some((model.weights.clone(), model.biases.clone()));
                stall = 0;
            } else {
                stall += 1;
                if stall >= config.patience {
                    break;
                }
            }
        }
    }

    if let Some((w, b)) = best_params {
        model.weights = w;
        model.biases = b;
    }
    Ok((model, log))
}

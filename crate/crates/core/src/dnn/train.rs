//! Mini-batch training with a step learning-rate schedule and best-epoch
//! selection by validation BER.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::loss::{batch_loss, grad, Example};
use super::model::{Gradient, SplitModel};
use crate::error::{Error, Result};
use crate::tensor::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    #[default]
    Adam,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    /// Epochs at which the learning rate is divided by `drop_factor`.
    pub lr_drops: Vec<usize>,
    pub drop_factor: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Put all STAs of a CSI sample in one loss term instead of pooling them.
    pub multi_sta: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 40,
            batch_size: 16,
            lr0: 1e-3,
            lr_drops: vec![20, 30],
            drop_factor: 10.0,
            optimizer: Optimizer::Adam,
            seed: 0,
            multi_sta: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be positive"));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) || !(self.drop_factor >= 1.0) {
            return Err(Error::invalid("lr0 must be positive and drop_factor at least 1"));
        }
        if self.lr_drops.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("lr_drops must be strictly increasing"));
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let drops = self.lr_drops.iter().filter(|&&d| d <= epoch).count() as i32;
        self.lr0 / self.drop_factor.powi(drops)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_ber: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the epoch with the lowest validation BER.
    pub model: SplitModel,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    /// Training loss of the initial parameters.
    pub initial_train_loss: f64,
}

enum OptState {
    Sgd,
    Adam { m: Gradient, v: Gradient, t: i32 },
}

impl OptState {
    fn new(kind: Optimizer, model: &SplitModel) -> Self {
        match kind {
            Optimizer::Sgd => OptState::Sgd,
            Optimizer::Adam => OptState::Adam {
                m: model.zero_grad(),
                v: model.zero_grad(),
                t: 0,
            },
        }
    }

    fn step(&mut self, model: &mut SplitModel, g: &Gradient, lr: f64) {
        match self {
            OptState::Sgd => {
                for (layer, gl) in model.layers.iter_mut().zip(&g.layers) {
                    for (p, d) in layer.weights.iter_mut().zip(&gl.weights) {
                        *p -= lr * d;
                    }
                    for (p, d) in layer.bias.iter_mut().zip(&gl.bias) {
                        *p -= lr * d;
                    }
                }
            }
            OptState::Adam { m, v, t } => {
                *t += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(*t);
                let c2 = 1.0 - ADAM_BETA2.powi(*t);
                let update = |p: &mut [f64], d: &[f64], m: &mut [f64], v: &mut [f64]| {
                    for i in 0..p.len() {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * d[i];
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * d[i] * d[i];
                        let mh = m[i] / c1;
                        let vh = v[i] / c2;
                        p[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
                    }
                };
                for (j, layer) in model.layers.iter_mut().enumerate() {
                    let (gl, ml, vl) = (&g.layers[j], &mut m.layers[j], &mut v.layers[j]);
                    update(&mut layer.weights, &gl.weights, &mut ml.weights, &mut vl.weights);
                    update(&mut layer.bias, &gl.bias, &mut ml.bias, &mut vl.bias);
                }
            }
        }
    }
}

fn mean_loss(model: &SplitModel, data: &[Example]) -> Result<f64> {
    let refs: Vec<&Example> = data.iter().collect();
    batch_loss(model, &refs)
}

/// Trains `model` and returns the parameters with the lowest validation BER
/// as reported by `ber_probe` after every epoch (earliest epoch on ties).
pub fn train(
    mut model: SplitModel,
    train_set: &[Example],
    val_set: &[Example],
    cfg: &TrainConfig,
    ber_probe: &mut dyn FnMut(&SplitModel) -> Result<f64>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    model.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::invalid("training and validation sets must be non-empty"));
    }
    let initial_train_loss = mean_loss(&model, train_set)?;
    let mut opt = OptState::new(cfg.optimizer, &model);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, SplitModel)> = None;

    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        Rng::new(cfg.seed, epoch as u64 + 1).shuffle(&mut order);
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (l, g) = grad(&model, &batch)?;
            weighted += l * batch.len() as f64;
            opt.step(&mut model, &g, lr);
        }
        let val_loss = mean_loss(&model, val_set)?;
        let val_ber = ber_probe(&model)?;
        history.push(EpochRecord {
            epoch,
            lr,
            train_loss: weighted / train_set.len() as f64,
            val_loss,
            val_ber,
        });
        if best.as_ref().is_none_or(|(b, _, _)| val_ber < *b) {
            best = Some((val_ber, epoch, model.clone()));
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        model,
        best_epoch,
        history,
        initial_train_loss,
    })
}

/// Writes the history as CSV with columns `epoch,lr,train_loss,val_loss,val_ber`.
pub fn write_history_csv<W: Write>(history: &[EpochRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rec in history {
        w.serialize(rec).map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::{Activation, ArchSpec};

    #[test]
    fn default_schedule() {
        let c = TrainConfig::default();
        for e in 0..40 {
            let expected = match e {
                0..=19 => 1e-3,
                20..=29 => 1e-4,
                _ => 1e-5,
            };
            assert_eq!(c.lr_at(e), expected, "epoch {e}");
        }
    }

    #[test]
    fn empty_sets_rejected() {
        let arch = ArchSpec::new(vec![2, 1, 1, 2], 1, Activation::Relu).unwrap();
        let m = SplitModel::build(&arch, 0).unwrap();
        let ex = vec![Example::single(vec![1.0, 0.0], vec![1.0, 1.0])];
        let mut probe = |_: &SplitModel| Ok(0.0);
        assert!(train(m.clone(), &[], &ex, &TrainConfig::default(), &mut probe).is_err());
        assert!(train(m, &ex, &[], &TrainConfig::default(), &mut probe).is_err());
    }

    #[test]
    fn history_csv_header() {
        let rec = EpochRecord {
            epoch: 0,
            lr: 1e-3,
            train_loss: 1.0,
            val_loss: 2.0,
            val_ber: 0.25,
        };
        let mut buf = Vec::new();
        write_history_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "epoch,lr,train_loss,val_loss,val_ber");
    }
}

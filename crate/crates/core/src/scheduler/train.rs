use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{correlation_layer, Action, CorrelationMap, SchedulerModel, SchedulerState};
use crate::featmap::{conv2d_backward, Tensor3};
use crate::{seed, Error, Result};

/// SGD hyperparameters. `gamma` is the reward discount and must stay 0: the
/// scheduler is trained as a classifier of the immediate action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub gamma: f64,
    /// Reweight classes inversely to their frequency.
    pub balance_classes: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            momentum: 0.9,
            weight_decay: 5e-4,
            batch_size: 32,
            epochs: 10,
            seed: 0,
            gamma: 0.0,
            balance_classes: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean (class-weighted) cross-entropy over the training set after each epoch.
    pub loss_curve: Vec<f64>,
    /// Argmax accuracy on the training set after the last epoch.
    pub train_accuracy: f64,
}

/// Gradients laid out like [`SchedulerModel::params`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub arrays: [Vec<f64>; 6],
}

impl Gradients {
    fn zeros_like(model: &SchedulerModel) -> Gradients {
        let p = model.params();
        Gradients { arrays: std::array::from_fn(|i| vec![0.0; p[i].len()]) }
    }

    fn add(&mut self, other: &Gradients) {
        for (a, b) in self.arrays.iter_mut().zip(&other.arrays) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, s: f64) {
        self.arrays.iter_mut().flatten().for_each(|x| *x *= s);
    }
}

/// Per-class loss weights `n / (2 * n_class)`; all ones when balancing is off.
pub fn class_weights(labels: &[Action], balance: bool) -> Result<[f64; 2]> {
    let n_track = labels.iter().filter(|&&a| a == Action::Track).count();
    let n_detect = labels.len() - n_track;
    if n_track == 0 || n_detect == 0 {
        return Err(Error::DegenerateDataset(format!("{} detect and {} track samples", n_detect, n_track)));
    }
    if !balance {
        return Ok([1.0, 1.0]);
    }
    let n = labels.len() as f64;
    Ok([n / (2.0 * n_detect as f64), n / (2.0 * n_track as f64)])
}

fn sample_gradient(model: &SchedulerModel, corr: &CorrelationMap, label: Action, weight: f64) -> Result<(f64, Gradients)> {
    let fw = model.forward(corr)?;
    let y = label.index();
    let loss = -weight * fw.probs[y].max(f64::MIN_POSITIVE).ln();
    let g_logits = [weight * (fw.probs[0] - (y == 0) as u8 as f64), weight * (fw.probs[1] - (y == 1) as u8 as f64)];
    let n = model.fc_inputs();
    let x = fw.hidden2.data();
    let mut grads = Gradients::zeros_like(model);
    let mut g_hidden2 = vec![0.0; n];
    for k in 0..2 {
        let w = &model.fc_weights[k * n..(k + 1) * n];
        for j in 0..n {
            grads.arrays[4][k * n + j] = g_logits[k] * x[j];
            g_hidden2[j] += g_logits[k] * w[j];
        }
        grads.arrays[5][k] = g_logits[k];
    }
    let (h2, w2, c2) = fw.hidden2.dims();
    let g_hidden2 = Tensor3::from_vec(h2, w2, c2, g_hidden2)?;
    let g2 = conv2d_backward(&fw.hidden1, &model.conv2, &fw.hidden2, &g_hidden2, true);
    let g1 = conv2d_backward(&corr.map, &model.conv1, &fw.hidden1, g2.input.as_ref().expect("requested"), false);
    grads.arrays[0] = g1.weights;
    grads.arrays[1] = g1.bias;
    grads.arrays[2] = g2.weights;
    grads.arrays[3] = g2.bias;
    Ok((loss, grads))
}

/// Mean weighted cross-entropy of a batch and its gradient. Samples are reduced
/// in slice order.
pub fn batch_gradient(model: &SchedulerModel, batch: &[(&CorrelationMap, Action)], weights: [f64; 2]) -> Result<(f64, Gradients)> {
    let mut total = Gradients::zeros_like(model);
    let mut loss = 0.0;
    for (corr, label) in batch {
        let (l, g) = sample_gradient(model, corr, *label, weights[label.index()])?;
        loss += l;
        total.add(&g);
    }
    let inv = 1.0 / batch.len().max(1) as f64;
    total.scale(inv);
    Ok((loss * inv, total))
}

fn dataset_loss(model: &SchedulerModel, data: &[(CorrelationMap, Action)], weights: [f64; 2]) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (corr, label) in data {
        let p = model.forward(corr)?.probs;
        loss -= weights[label.index()] * p[label.index()].max(f64::MIN_POSITIVE).ln();
        let predicted = if p[1] > p[0] { Action::Track } else { Action::Detect };
        correct += (predicted == *label) as usize;
    }
    let n = data.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// SGD with momentum and weight decay on precomputed correlation volumes.
pub fn train_on_maps(model: &mut SchedulerModel, data: &[(CorrelationMap, Action)], cfg: &TrainConfig) -> Result<TrainReport> {
    if cfg.gamma != 0.0 {
        return Err(Error::Config(format!("gamma must be 0, got {}", cfg.gamma)));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let labels: Vec<Action> = data.iter().map(|(_, a)| *a).collect();
    let weights = class_weights(&labels, cfg.balance_classes)?;
    let mut velocity = Gradients::zeros_like(model);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = seed::rng(cfg.seed, &[0x7a1e]);
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&CorrelationMap, Action)> = chunk.iter().map(|&i| (&data[i].0, data[i].1)).collect();
            let (_, grads) = batch_gradient(model, &batch, weights)?;
            for ((param, grad), vel) in model.params_mut().into_iter().zip(&grads.arrays).zip(velocity.arrays.iter_mut()) {
                for ((p, g), v) in param.iter_mut().zip(grad).zip(vel.iter_mut()) {
                    *v = cfg.momentum * *v + g + cfg.weight_decay * *p;
                    *p -= cfg.learning_rate * *v;
                }
            }
        }
        loss_curve.push(dataset_loss(model, data, weights)?.0);
    }
    let (_, train_accuracy) = dataset_loss(model, data, weights)?;
    Ok(TrainReport { loss_curve, train_accuracy })
}

/// Computes correlation volumes for every labeled state, then trains.
pub fn train(model: &mut SchedulerModel, data: &[(SchedulerState, Action)], cfg: &TrainConfig) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::DegenerateDataset("no samples".into()));
    }
    let maps = data
        .iter()
        .map(|(s, a)| {
            if s.keyframe_feature.dims() != model.feature_dims {
                return Err(Error::ShapeMismatch("sample features do not match the model".into()));
            }
            Ok((correlation_layer(&s.keyframe_feature, &s.current_feature, model.d)?, *a))
        })
        .collect::<Result<Vec<_>>>()?;
    train_on_maps(model, &maps, cfg)
}

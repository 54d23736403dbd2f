//! Mini-batch SGD with momentum on the cross-entropy loss.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DropoutMasks, Network, NetworkConfig};
use crate::dataio::Dataset;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            momentum: 0.9,
            batch_size: 64,
            epochs: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate must be > 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::param("momentum must lie in [0, 1)"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::param("batch_size and epochs must be >= 1"));
        }
        Ok(())
    }
}

/// What training produced, stored alongside the weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingMeta {
    /// Mean mini-batch loss of every epoch, dropout active.
    pub loss_history: Vec<f64>,
    pub train_config: Option<TrainConfig>,
    pub train_examples: usize,
}

/// Trains `h_a` from scratch: init from `net.seed`, shuffling and dropout masks
/// from `train.seed`.
pub fn train(net: &NetworkConfig, train: &TrainConfig, data: &Dataset) -> Result<Network> {
    net.validate()?;
    train.validate()?;
    if data.is_empty() {
        return Err(Error::param("training set is empty"));
    }
    let mut model = Network::init(net)?;
    if data.dim() != model.input_dim() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: data.dim(),
        });
    }
    if data.classes > model.classes() {
        return Err(Error::param(format!(
            "dataset has {} classes, network outputs {}",
            data.classes,
            model.classes()
        )));
    }
    for (class, &c) in data.class_counts().iter().enumerate() {
        if c == 0 {
            return Err(Error::EmptyClass { class });
        }
    }

    let hidden = model.hidden_sizes();
    let rate = net.dropout_train;
    let mut velocity: Vec<(Array2<f64>, Array1<f64>)> = model
        .layers
        .iter()
        .map(|l| (Array2::zeros(l.weights.raw_dim()), Array1::zeros(l.bias.len())))
        .collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(train.epochs);

    for epoch in 0..train.epochs {
        let mut rng = seed::rng(seed::derive(train.seed, &[seed::tag("epoch"), epoch as u64]));
        order.shuffle(&mut rng);
        let (mut loss_sum, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(train.batch_size) {
            let x = data.features.select(Axis(0), chunk);
            let masks = (rate > 0.0).then(|| DropoutMasks::sample(&hidden, chunk.len(), rate, &mut rng));
            let cache = model.forward_cached(x.view(), masks.as_ref());
            let b = chunk.len() as f64;

            let mut loss = 0.0;
            let mut delta = cache.probs;
            for (mut row, &i) in delta.rows_mut().into_iter().zip(chunk) {
                let y = data.labels[i];
                loss -= row[y].max(f64::MIN_POSITIVE).ln();
                row[y] -= 1.0;
            }
            loss /= b;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1, loss });
            }
            loss_sum += loss;
            batches += 1;
            delta /= b;

            for i in (0..model.layers.len()).rev() {
                let grad_w = delta.t().dot(&cache.inputs[i]);
                let grad_b = delta.sum_axis(Axis(0));
                if i > 0 {
                    let mut next = delta.dot(&model.layers[i].weights);
                    if let Some(m) = &masks {
                        next *= m.layer(i - 1);
                    }
                    let act = model.activation;
                    Zip::from(&mut next)
                        .and(&cache.pre[i - 1])
                        .and(&cache.hidden[i - 1])
                        .for_each(|d, &z, &h| *d *= act.derivative(z, h));
                    delta = next;
                }
                let (vw, vb) = &mut velocity[i];
                vw.zip_mut_with(&grad_w, |v, &g| *v = train.momentum * *v - train.learning_rate * g);
                vb.zip_mut_with(&grad_b, |v, &g| *v = train.momentum * *v - train.learning_rate * g);
                model.layers[i].weights += &*vw;
                model.layers[i].bias += &*vb;
            }
        }
        let epoch_loss = loss_sum / batches as f64;
        if model.layers.iter().any(|l| l.weights.iter().any(|w| !w.is_finite())) {
            return Err(Error::Divergence { epoch: epoch + 1, loss: epoch_loss });
        }
        history.push(epoch_loss);
    }

    model.meta = TrainingMeta {
        loss_history: history,
        train_config: Some(train.clone()),
        train_examples: data.len(),
    };
    Ok(model)
}

/// Fraction of rows whose mask-free argmax equals the label.
pub fn accuracy(model: &Network, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let pred = model.predict_labels(data.features.view())?;
    let hits = pred.iter().zip(&data.labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / data.len() as f64)
}

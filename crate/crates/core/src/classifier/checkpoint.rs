//! Versioned JSON checkpoints. Weights are stored row-major (`out x in`) and
//! round-trip bit-exactly.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Network, TrainingMeta};
use crate::{Error, Result};

const FORMAT: &str = "dddm-mlp";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    format: String,
    version: u32,
    layer_sizes: Vec<usize>,
    activation: Activation,
    dropout_train: f64,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    #[serde(default)]
    training: TrainingMeta,
}

impl Network {
    pub fn to_json(&self) -> Result<String> {
        let ck = Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            layer_sizes: self.layer_sizes(),
            activation: self.activation,
            dropout_train: self.dropout_train,
            weights: self.layers.iter().map(|l| l.weights.iter().copied().collect()).collect(),
            biases: self.layers.iter().map(|l| l.bias.to_vec()).collect(),
            training: self.meta.clone(),
        };
        Ok(serde_json::to_string(&ck)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        let bad = |detail: String| Error::Format { what: "checkpoint", detail };
        if ck.format != FORMAT {
            return Err(bad(format!("format tag {:?}", ck.format)));
        }
        if ck.version != VERSION {
            return Err(bad(format!("unsupported version {}", ck.version)));
        }
        let n = ck.layer_sizes.len();
        if n < 2 || ck.weights.len() != n - 1 || ck.biases.len() != n - 1 {
            return Err(bad("layer count does not match layer_sizes".into()));
        }
        let mut layers = Vec::with_capacity(n - 1);
        for (i, (w, b)) in ck.weights.into_iter().zip(ck.biases).enumerate() {
            let (fan_in, fan_out) = (ck.layer_sizes[i], ck.layer_sizes[i + 1]);
            let weights = Array2::from_shape_vec((fan_out, fan_in), w)
                .map_err(|_| bad(format!("layer {i} weights are not {fan_out}x{fan_in}")))?;
            if b.len() != fan_out {
                return Err(bad(format!("layer {i} bias length {} != {fan_out}", b.len())));
            }
            if weights.iter().chain(&b).any(|v| !v.is_finite()) {
                return Err(bad(format!("layer {i} has non-finite parameters")));
            }
            layers.push(Layer { weights, bias: Array1::from(b) });
        }
        let mut net = Network::from_layers(layers, ck.activation, ck.dropout_train)?;
        net.meta = ck.training;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

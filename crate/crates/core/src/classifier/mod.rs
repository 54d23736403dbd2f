//! Dense feed-forward classifier with dropout after every hidden layer.
//!
//! A network trained with dropout rate `a` is evaluated either
//! deterministically or with an independent test-phase rate `b`, giving the
//! stochastic classifier that feeds the accumulator. Dropout is inverted:
//! kept units are scaled by `1 / (1 - rate)`, so `b = 0` is exactly the
//! deterministic pass.

mod checkpoint;
mod train;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::evidence::ProbabilityVector;
use crate::{seed, Error, Result};

pub use train::{accuracy, train, TrainConfig, TrainingMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `h`.
    fn derivative(self, z: f64, h: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - h * h,
            Activation::Sigmoid => h * (1.0 - h),
        }
    }
}

/// Architecture and dropout rates of one classifier `h_{a,b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Input size, hidden sizes..., class count.
    pub layer_sizes: Vec<usize>,
    pub dropout_train: f64,
    pub dropout_test: f64,
    pub activation: Activation,
    pub seed: u64,
}

impl NetworkConfig {
    /// 784-256-128-10 ReLU network.
    pub fn mnist(dropout_train: f64, dropout_test: f64, seed: u64) -> Self {
        Self {
            layer_sizes: vec![784, 256, 128, 10],
            dropout_train,
            dropout_test,
            activation: Activation::Relu,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(Error::param("need at least input and output layers, all non-empty"));
        }
        check_rate(self.dropout_train)?;
        check_rate(self.dropout_test)
    }
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::param(format!("dropout rate {rate} outside [0, 1)")))
    }
}

/// One affine layer; `weights` is `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Trained (or hand-built) weights plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    activation: Activation,
    dropout_train: f64,
    meta: TrainingMeta,
}

/// Per-row keep/drop masks for every hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    rate: f64,
    /// `masks[layer]` is `rows x width`, entries 0 or `1 / (1 - rate)`.
    masks: Vec<Array2<f64>>,
}

impl DropoutMasks {
    /// Masks drawn row by row, hidden layer by hidden layer, so row `r` of a
    /// batch consumes the generator exactly as the `r`-th single-row call would.
    pub fn sample<R: RngCore>(hidden: &[usize], rows: usize, rate: f64, rng: &mut R) -> Self {
        let scale = 1.0 / (1.0 - rate);
        let keep_below = ((1.0 - rate) * 4_294_967_296.0).round() as u64;
        let mut masks: Vec<Array2<f64>> = hidden.iter().map(|&w| Array2::zeros((rows, w))).collect();
        for r in 0..rows {
            for m in masks.iter_mut() {
                for v in m.row_mut(r).iter_mut() {
                    if (rng.next_u32() as u64) < keep_below {
                        *v = scale;
                    }
                }
            }
        }
        Self { rate, masks }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn layer(&self, i: usize) -> &Array2<f64> {
        &self.masks[i]
    }
}

/// Cached forward pass for backprop.
pub(crate) struct ForwardCache {
    /// Input to each layer (post-mask for hidden layers).
    pub inputs: Vec<Array2<f64>>,
    /// Pre-activations of hidden layers.
    pub pre: Vec<Array2<f64>>,
    /// Post-activation, pre-mask outputs of hidden layers.
    pub hidden: Vec<Array2<f64>>,
    pub probs: Array2<f64>,
}

fn softmax_rows(mut z: Array2<f64>) -> Array2<f64> {
    for mut row in z.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    z
}

impl Network {
    /// Random initialization: He-uniform for ReLU, Glorot-uniform otherwise.
    pub fn init(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::rng(seed::derive(config.seed, &[seed::tag("init")]));
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = match config.activation {
                    Activation::Relu => (6.0 / fan_in as f64).sqrt(),
                    _ => (6.0 / (fan_in + fan_out) as f64).sqrt(),
                };
                Layer {
                    weights: Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-limit..limit)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self {
            layers,
            activation: config.activation,
            dropout_train: config.dropout_train,
            meta: TrainingMeta::default(),
        })
    }

    /// Network from explicit layers.
    pub fn from_layers(layers: Vec<Layer>, activation: Activation, dropout_train: f64) -> Result<Self> {
        check_rate(dropout_train)?;
        if layers.is_empty() {
            return Err(Error::param("a network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.weights.nrows() {
                return Err(Error::Dimension {
                    expected: l.weights.nrows(),
                    got: l.bias.len(),
                });
            }
            if i > 0 && l.weights.ncols() != layers[i - 1].weights.nrows() {
                return Err(Error::Dimension {
                    expected: layers[i - 1].weights.nrows(),
                    got: l.weights.ncols(),
                });
            }
        }
        Ok(Self {
            layers,
            activation,
            dropout_train,
            meta: TrainingMeta::default(),
        })
    }

    /// All weights and biases zero.
    pub fn zeros(layer_sizes: &[usize], activation: Activation) -> Result<Self> {
        let layers = layer_sizes
            .windows(2)
            .map(|w| Layer {
                weights: Array2::zeros((w[1], w[0])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Self::from_layers(layers, activation, 0.0)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn dropout_train(&self) -> f64 {
        self.dropout_train
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(|l| l.weights.nrows()));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn classes(&self) -> usize {
        self.layers.last().unwrap().weights.nrows()
    }

    /// Widths of the hidden layers (the dropout sites).
    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.weights.nrows())
            .collect()
    }

    fn check_input(&self, d: usize) -> Result<()> {
        if d != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: d,
            });
        }
        Ok(())
    }

    fn affine(layer: &Layer, a: &ArrayView2<f64>) -> Array2<f64> {
        let mut z = a.dot(&layer.weights.t());
        z += &layer.bias;
        z
    }

    /// Batch forward pass keeping what backprop needs.
    pub(crate) fn forward_cached(&self, x: ArrayView2<f64>, masks: Option<&DropoutMasks>) -> ForwardCache {
        let n_hidden = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(n_hidden);
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut a = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = Self::affine(layer, &a.view());
            inputs.push(a);
            if i == n_hidden {
                return ForwardCache {
                    inputs,
                    pre,
                    hidden,
                    probs: softmax_rows(z),
                };
            }
            let h = z.mapv(|v| self.activation.apply(v));
            a = match masks {
                Some(m) => &h * m.layer(i),
                None => h.clone(),
            };
            pre.push(z);
            hidden.push(h);
        }
        unreachable!("loop returns at the output layer")
    }

    /// Class probabilities for each row, with optional masks.
    pub fn forward_batch(&self, x: ArrayView2<f64>, masks: Option<&DropoutMasks>) -> Result<Array2<f64>> {
        self.check_input(x.ncols())?;
        if let Some(m) = masks {
            if m.masks.len() != self.layers.len() - 1 || m.masks.iter().any(|mm| mm.nrows() != x.nrows()) {
                return Err(Error::param("dropout masks do not match the batch"));
            }
        }
        let n_hidden = self.layers.len() - 1;
        let mut a = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = Self::affine(layer, &a.view());
            if i == n_hidden {
                return Ok(softmax_rows(z));
            }
            a = z.mapv(|v| self.activation.apply(v));
            if let Some(m) = masks {
                a *= m.layer(i);
            }
        }
        unreachable!("loop returns at the output layer")
    }

    /// Mask-free pass.
    pub fn forward_deterministic(&self, x: ArrayView1<f64>) -> Result<ProbabilityVector> {
        let probs = self.forward_batch(x.insert_axis(Axis(0)), None)?;
        ProbabilityVector::new(probs.row(0).to_vec())
    }

    /// One pass with fresh Bernoulli(1 - rate) masks drawn from `seed`.
    pub fn forward_stochastic(&self, x: ArrayView1<f64>, rate: f64, seed: u64) -> Result<ProbabilityVector> {
        let mut rng = seed::rng(seed);
        Ok(self.sample_predictions(x, rate, 1, &mut rng)?.remove(0))
    }

    /// `n` stochastic passes on one input, consuming `rng` as `n` consecutive
    /// single passes would.
    ///
    /// Dropout never touches the input, so the first layer's pre-activation is
    /// computed once and shared by all copies.
    pub fn sample_predictions<R: RngCore>(
        &self,
        x: ArrayView1<f64>,
        rate: f64,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<ProbabilityVector>> {
        check_rate(rate)?;
        self.check_input(x.len())?;
        let first = Self::affine(&self.layers[0], &x.insert_axis(Axis(0)));
        let probs = if self.layers.len() == 1 {
            softmax_rows(first)
        } else {
            let h1 = first.mapv(|v| self.activation.apply(v));
            let masks = (rate > 0.0).then(|| DropoutMasks::sample(&self.hidden_sizes(), n, rate, rng));
            let mut a = h1.broadcast((n, h1.ncols())).unwrap().to_owned();
            if let Some(m) = &masks {
                a *= m.layer(0);
            }
            let last = self.layers.len() - 1;
            let mut out = None;
            for (i, layer) in self.layers.iter().enumerate().skip(1) {
                let z = Self::affine(layer, &a.view());
                if i == last {
                    out = Some(softmax_rows(z));
                    break;
                }
                a = z.mapv(|v| self.activation.apply(v));
                if let Some(m) = &masks {
                    a *= m.layer(i);
                }
            }
            out.unwrap()
        };
        probs
            .rows()
            .into_iter()
            .map(|r| ProbabilityVector::new(r.to_vec()))
            .collect()
    }

    /// Deterministic argmax label for every row.
    pub fn predict_labels(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        let probs = self.forward_batch(x, None)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|r| crate::evidence::argmax(r.as_slice().unwrap()))
            .collect())
    }

    /// Post-activation output of every layer on the mask-free pass; the last
    /// entry is the softmax output.
    pub fn hidden_activations(&self, x: ArrayView1<f64>) -> Result<Vec<Array1<f64>>> {
        self.check_input(x.len())?;
        let cache = self.forward_cached(x.insert_axis(Axis(0)), None);
        let mut out: Vec<Array1<f64>> = cache.hidden.iter().map(|h| h.row(0).to_owned()).collect();
        out.push(cache.probs.row(0).to_owned());
        Ok(out)
    }

    /// Gradient of the cross-entropy loss w.r.t. each input row, on the
    /// mask-free pass.
    pub fn input_gradients(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<Array2<f64>> {
        self.check_input(x.ncols())?;
        if labels.len() != x.nrows() {
            return Err(Error::Dimension {
                expected: x.nrows(),
                got: labels.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= self.classes()) {
            return Err(Error::param(format!("label {l} >= {} classes", self.classes())));
        }
        let cache = self.forward_cached(x, None);
        let mut delta = cache.probs;
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y] -= 1.0;
        }
        for i in (0..self.layers.len()).rev() {
            let grad_in = delta.dot(&self.layers[i].weights);
            if i == 0 {
                return Ok(grad_in);
            }
            let (z, h) = (&cache.pre[i - 1], &cache.hidden[i - 1]);
            delta = grad_in;
            ndarray::Zip::from(&mut delta)
                .and(z)
                .and(h)
                .for_each(|d, &z, &h| *d *= self.activation.derivative(z, h));
        }
        unreachable!("loop returns at the first layer")
    }

    /// Single-input form of [`Network::input_gradients`].
    pub fn input_gradient(&self, x: ArrayView1<f64>, label: usize) -> Result<Array1<f64>> {
        Ok(self
            .input_gradients(x.insert_axis(Axis(0)), &[label])?
            .row(0)
            .to_owned())
    }

    /// Cross-entropy of the mask-free pass.
    pub fn loss(&self, x: ArrayView1<f64>, label: usize) -> Result<f64> {
        let p = self.forward_deterministic(x)?;
        Ok(-p[label].ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    fn random_net(sizes: &[usize], act: Activation, seed: u64) -> Network {
        let mut net = Network::init(&NetworkConfig {
            layer_sizes: sizes.to_vec(),
            dropout_train: 0.0,
            dropout_test: 0.0,
            activation: act,
            seed,
        })
        .unwrap();
        let mut rng = crate::seed::rng(seed ^ 0xb1a5);
        for l in net.layers_mut() {
            l.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
        net
    }

    #[test]
    fn zero_network_is_uniform() {
        let net = Network::zeros(&[5, 4, 3], Activation::Relu).unwrap();
        let p = net.forward_deterministic(array![0.1, 0.9, 0.3, 0.0, 1.0].view()).unwrap();
        for &v in p.as_slice() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    /// 2-2-2 ReLU network on x = (1, 2):
    ///   z1 = (0.5*1 - 0.25*2 + 0.1, 1*1 + 0.5*2 - 0.2) = (0.1, 1.8), h = (0.1, 1.8)
    ///   z2 = (2*0.1 - 1*1.8, -1*0.1 + 0.5*1.8 + 0.3) = (-1.6, 1.1)
    ///   softmax = (1, e^2.7) / (1 + e^2.7)
    #[test]
    fn hand_computed_forward() {
        let net = Network::from_layers(
            vec![
                Layer { weights: array![[0.5, -0.25], [1.0, 0.5]], bias: array![0.1, -0.2] },
                Layer { weights: array![[2.0, -1.0], [-1.0, 0.5]], bias: array![0.0, 0.3] },
            ],
            Activation::Relu,
            0.0,
        )
        .unwrap();
        let p = net.forward_deterministic(array![1.0, 2.0].view()).unwrap();
        let e = 2.7f64.exp();
        assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-12);
        assert!((p[1] - e / (1.0 + e)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_is_repeatable_and_normalized() {
        let net = random_net(&[6, 8, 4], Activation::Tanh, 3);
        let x = array![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let a = net.forward_deterministic(x.view()).unwrap();
        let b = net.forward_deterministic(x.view()).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert!((a.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_matches_deterministic_exactly() {
        let net = random_net(&[6, 8, 5, 4], Activation::Relu, 4);
        let x = array![0.9, 0.2, 0.3, 0.0, 0.5, 0.6];
        let det = net.forward_deterministic(x.view()).unwrap();
        for s in 0..5 {
            assert_eq!(net.forward_stochastic(x.view(), 0.0, s).unwrap().as_slice(), det.as_slice());
        }
    }

    #[test]
    fn stochastic_is_seeded() {
        let net = random_net(&[6, 16, 4], Activation::Relu, 5);
        let x = array![0.9, 0.2, 0.3, 0.0, 0.5, 0.6];
        let a = net.forward_stochastic(x.view(), 0.5, 1).unwrap();
        assert_eq!(a, net.forward_stochastic(x.view(), 0.5, 1).unwrap());
        assert_ne!(a, net.forward_stochastic(x.view(), 0.5, 2).unwrap());
    }

    #[test]
    fn batched_samples_match_single_calls() {
        let net = random_net(&[6, 16, 12, 4], Activation::Relu, 6);
        let x = array![0.9, 0.2, 0.3, 0.0, 0.5, 0.6];
        let mut rng = crate::seed::rng(77);
        let batch = net.sample_predictions(x.view(), 0.4, 5, &mut rng).unwrap();
        let mut rng = crate::seed::rng(77);
        for p in &batch {
            let single = net.sample_predictions(x.view(), 0.4, 1, &mut rng).unwrap();
            for (a, b) in p.as_slice().iter().zip(single[0].as_slice()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn inverted_dropout_preserves_expectation() {
        let h = array![[0.5, 1.0, 2.0, 0.0, 3.0]];
        let n = 20_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let rate = 0.6;
        let mut sum = Array1::<f64>::zeros(5);
        let mut sq = Array1::<f64>::zeros(5);
        for _ in 0..n {
            let m = DropoutMasks::sample(&[5], 1, rate, &mut rng);
            let v = (&h * m.layer(0)).row(0).to_owned();
            sum += &v;
            sq += &v.mapv(|a| a * a);
        }
        for j in 0..5 {
            let mean = sum[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            if h[[0, j]] == 0.0 {
                assert_eq!(mean, 0.0);
            } else {
                assert!((mean - h[[0, j]]).abs() < 3.0 * se, "unit {j}: {mean} vs {}", h[[0, j]]);
            }
        }
    }

    #[test]
    fn keep_fraction_matches_rate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = DropoutMasks::sample(&[1000], 100, 0.2, &mut rng);
        let kept = m.layer(0).iter().filter(|&&v| v > 0.0).count() as f64 / 100_000.0;
        assert!((kept - 0.8).abs() < 0.005);
        assert!(m.layer(0).iter().all(|&v| v == 0.0 || (v - 1.25).abs() < 1e-15));
    }

    #[test]
    fn activations_per_layer() {
        let net = random_net(&[6, 8, 5, 3], Activation::Sigmoid, 7);
        let x = array![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let acts = net.hidden_activations(x.view()).unwrap();
        assert_eq!(acts.len(), net.layer_sizes().len() - 1);
        assert_eq!(acts[0].len(), 8);
        assert_eq!(acts[2].as_slice().unwrap(), net.forward_deterministic(x.view()).unwrap().as_slice());
        assert_eq!(acts, net.hidden_activations(x.view()).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let net = random_net(&[6, 8, 3], Activation::Relu, 8);
        let x = array![0.1, 0.2];
        assert!(matches!(net.forward_deterministic(x.view()), Err(Error::Dimension { .. })));
        assert!(net.forward_stochastic(x.view(), 0.5, 0).is_err());
        assert!(net.input_gradient(Array1::<f64>::zeros(6).view(), 3).is_err());
        assert!(net.forward_stochastic(Array1::<f64>::zeros(6).view(), 1.0, 0).is_err());
    }

    fn central_difference(net: &Network, x: &Array1<f64>, y: usize, h: f64) -> Array1<f64> {
        Array1::from_shape_fn(x.len(), |i| {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            (net.loss(up.view(), y).unwrap() - net.loss(down.view(), y).unwrap()) / (2.0 * h)
        })
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (s, act) in [(1, Activation::Tanh), (2, Activation::Sigmoid), (3, Activation::Tanh)] {
            let net = random_net(&[7, 9, 6, 4], act, s);
            let x = Array1::from_shape_fn(7, |i| (i as f64 * 0.37 + s as f64 * 0.11).fract());
            let g = net.input_gradient(x.view(), 2).unwrap();
            let fd = central_difference(&net, &x, 2, 1e-5);
            for (a, b) in g.iter().zip(fd.iter()) {
                let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
                assert!(rel < 1e-4, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_network_gradient_is_zero() {
        // all weights zero: logits do not depend on the input
        let net = Network::zeros(&[4, 3, 2], Activation::Tanh).unwrap();
        let g = net.input_gradient(array![0.2, 0.4, 0.6, 0.8].view(), 1).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        let fd = central_difference(&net, &array![0.2, 0.4, 0.6, 0.8], 1, 1e-5);
        assert!(fd.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn duplicated_features_get_equal_gradients() {
        // columns 0 and 1 of the first layer are tied, inputs 0 and 1 equal
        let mut net = random_net(&[4, 6, 3], Activation::Tanh, 9);
        let col = net.layers()[0].weights.column(0).to_owned();
        net.layers_mut()[0].weights.column_mut(1).assign(&col);
        let g = net.input_gradient(array![0.3, 0.3, 0.9, 0.1].view(), 0).unwrap();
        assert_eq!(g[0], g[1]);
    }
}

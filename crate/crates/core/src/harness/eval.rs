//! Per-input evaluation of one-shot and accumulated classifiers.

use ndarray::ArrayView1;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::Network;
use crate::dataio::{Dataset, DatasetMeta};
use crate::evidence::{argmax, decide, DddmParams, LikelihoodTable, LikelihoodTableBuilder, ProbabilityVector};
use crate::{exec, seed, Error, Result};

/// Anything that emits a stream of noisy probability vectors for an input.
pub trait StochasticPredictor: Sync {
    fn classes(&self) -> usize;

    /// `n` independent predictions for `x`.
    fn sample(&self, x: ArrayView1<f64>, n: usize, rng: &mut seed::Rng) -> Result<Vec<ProbabilityVector>>;
}

/// `h_{a,b}`: a trained network evaluated with test-phase dropout rate `b`.
#[derive(Debug, Clone, Copy)]
pub struct DropoutClassifier<'a> {
    pub net: &'a Network,
    pub rate: f64,
}

impl<'a> DropoutClassifier<'a> {
    pub fn new(net: &'a Network, rate: f64) -> Self {
        Self { net, rate }
    }
}

impl StochasticPredictor for DropoutClassifier<'_> {
    fn classes(&self) -> usize {
        self.net.classes()
    }

    fn sample(&self, x: ArrayView1<f64>, n: usize, rng: &mut seed::Rng) -> Result<Vec<ProbabilityVector>> {
        self.net.sample_predictions(x, self.rate, n, rng)
    }
}

/// Synthetic predictor on one-hot inputs: the top label is the true class
/// (the argmax of `x`) with probability `accuracy`, otherwise a uniformly
/// chosen other class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyOracle {
    pub classes: usize,
    pub accuracy: f64,
}

impl NoisyOracle {
    pub fn new(classes: usize, accuracy: f64) -> Result<Self> {
        if classes < 2 || !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::param("oracle needs >= 2 classes and accuracy in [0, 1]"));
        }
        Ok(Self { classes, accuracy })
    }

    /// Balanced one-hot dataset of `n` inputs, labels cycling through the classes.
    pub fn dataset(&self, n: usize) -> Result<Dataset> {
        let mut features = ndarray::Array2::zeros((n, self.classes));
        let labels: Vec<usize> = (0..n).map(|i| i % self.classes).collect();
        for (i, &y) in labels.iter().enumerate() {
            features[[i, y]] = 1.0;
        }
        Dataset::new(
            features,
            labels,
            self.classes,
            DatasetMeta {
                source: format!("one-hot oracle inputs (C={}, n={n})", self.classes),
                normalization: "one-hot".into(),
            },
        )
    }
}

impl StochasticPredictor for NoisyOracle {
    fn classes(&self) -> usize {
        self.classes
    }

    fn sample(&self, x: ArrayView1<f64>, n: usize, rng: &mut seed::Rng) -> Result<Vec<ProbabilityVector>> {
        if x.len() != self.classes {
            return Err(Error::Dimension {
                expected: self.classes,
                got: x.len(),
            });
        }
        let truth = argmax(x.as_slice().expect("row is contiguous"));
        let c = self.classes;
        (0..n)
            .map(|_| {
                let top = if rng.random::<f64>() < self.accuracy {
                    truth
                } else {
                    let other = rng.random_range(0..c - 1);
                    if other >= truth {
                        other + 1
                    } else {
                        other
                    }
                };
                // top confidence strictly above the even split of the rest
                let p_top: f64 = rng.random_range(0.55..0.95);
                let rest = (1.0 - p_top) / (c - 1) as f64;
                let mut p = vec![rest; c];
                p[top] = p_top;
                ProbabilityVector::new(p)
            })
            .collect()
    }
}

/// Random stream for input `i` of an evaluation rooted at `seed`.
fn input_rng(seed: u64, i: usize) -> seed::Rng {
    seed::stream_rng(seed, i as u64)
}

/// One stochastic pass per input, argmax label, accuracy.
pub fn evaluate_one_shot(model: &dyn StochasticPredictor, data: &Dataset, seed: u64) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let hits = exec::try_map_indexed(data.len(), |i| {
        let p = model.sample(data.row(i), 1, &mut input_rng(seed, i))?;
        Ok::<_, Error>(p[0].argmax() == data.labels[i])
    })?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / data.len() as f64)
}

/// One-shot accuracy of `h_{a,b}`.
pub fn evaluate_dropout_classifier(net: &Network, b: f64, data: &Dataset, seed: u64) -> Result<f64> {
    evaluate_one_shot(&DropoutClassifier::new(net, b), data, seed)
}

/// Signature counts from `per_input` predictions of every row of `data`,
/// labelled with the row's true class.
pub fn fit_table(
    model: &dyn StochasticPredictor,
    data: &Dataset,
    per_input: usize,
    k: usize,
    smoothing: f64,
    seed: u64,
) -> Result<LikelihoodTable> {
    const CHUNK: usize = 100;
    let classes = model.classes();
    let chunks = data.len().div_ceil(CHUNK);
    let partial = exec::try_map_indexed(chunks, |c| {
        let mut builder = LikelihoodTableBuilder::new(classes, k)?;
        for i in c * CHUNK..((c + 1) * CHUNK).min(data.len()) {
            for p in model.sample(data.row(i), per_input, &mut input_rng(seed, i))? {
                builder.observe_prediction(&p, data.labels[i])?;
            }
        }
        Ok::<_, Error>(builder)
    })?;
    let mut builder = LikelihoodTableBuilder::new(classes, k)?;
    for b in &partial {
        builder.merge(b)?;
    }
    builder.build(smoothing)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVerdict {
    pub label: usize,
    pub winner: usize,
    pub mean_rt: f64,
    pub trial_accuracy: f64,
    pub forced_trials: usize,
}

/// Accumulated classifier `H_{a,b}` over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DddmEvaluation {
    /// Aggregate (majority-vote) accuracy.
    pub accuracy: f64,
    /// Mean per-trial accuracy.
    pub trial_accuracy: f64,
    pub mean_rt: f64,
    pub forced_fraction: f64,
    pub verdicts: Vec<InputVerdict>,
}

/// Per input: `predictions` stochastic passes, trials sampled from them,
/// each trial accumulated, trials aggregated.
pub fn evaluate_accumulated(
    model: &dyn StochasticPredictor,
    table: &LikelihoodTable,
    data: &Dataset,
    params: &DddmParams,
    seed: u64,
) -> Result<DddmEvaluation> {
    params.validate()?;
    if table.classes() != model.classes() {
        return Err(Error::Dimension {
            expected: model.classes(),
            got: table.classes(),
        });
    }
    let verdicts = exec::try_map_indexed(data.len(), |i| {
        let pool = model.sample(data.row(i), params.predictions, &mut input_rng(seed, i))?;
        let label = data.labels[i];
        let d = decide(&pool, table, params, seed::derive(seed, &[seed::tag("trials"), i as u64]))?;
        Ok::<_, Error>(InputVerdict {
            label,
            winner: d.winner,
            mean_rt: d.mean_rt,
            trial_accuracy: d.trial_accuracy(label),
            forced_trials: d.outcomes.iter().filter(|o| o.forced).count(),
        })
    })?;
    let n = verdicts.len().max(1) as f64;
    Ok(DddmEvaluation {
        accuracy: verdicts.iter().filter(|v| v.winner == v.label).count() as f64 / n,
        trial_accuracy: verdicts.iter().map(|v| v.trial_accuracy).sum::<f64>() / n,
        mean_rt: verdicts.iter().map(|v| v.mean_rt).sum::<f64>() / n,
        forced_fraction: verdicts.iter().map(|v| v.forced_trials as f64).sum::<f64>() / (n * params.trials as f64),
        verdicts,
    })
}

/// [`evaluate_accumulated`] for `h_{a,b}`.
pub fn evaluate_dddm(
    net: &Network,
    b: f64,
    table: &LikelihoodTable,
    data: &Dataset,
    params: &DddmParams,
    seed: u64,
) -> Result<DddmEvaluation> {
    evaluate_accumulated(&DropoutClassifier::new(net, b), table, data, params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{accuracy, train, Activation, NetworkConfig, TrainConfig};
    use crate::dataio::synthetic_blobs;

    fn blob_net() -> (Network, Dataset) {
        let data = synthetic_blobs(3, 6, 50, 0.02, 3).unwrap();
        let cfg = NetworkConfig {
            layer_sizes: vec![6, 16, 3],
            dropout_train: 0.0,
            dropout_test: 0.0,
            activation: Activation::Relu,
            seed: 1,
        };
        let net = train(&cfg, &TrainConfig { epochs: 60, ..Default::default() }, &data).unwrap();
        (net, data)
    }

    #[test]
    fn zero_rate_one_shot_is_deterministic_accuracy() {
        let (net, data) = blob_net();
        let det = accuracy(&net, &data).unwrap();
        for s in 0..3 {
            assert_eq!(evaluate_dropout_classifier(&net, 0.0, &data, s).unwrap(), det);
        }
    }

    #[test]
    fn noiseless_accumulation_matches_deterministic() {
        let (net, data) = blob_net();
        // top-label signatures: every class concentrates its counts on one signature
        let params = DddmParams { k: 1, ..Default::default() };
        let table = fit_table(&DropoutClassifier::new(&net, 0.0), &data, 10, 1, 1.0, 1).unwrap();
        let eval = evaluate_dddm(&net, 0.0, &table, &data, &params, 2).unwrap();
        assert_eq!(eval.accuracy, accuracy(&net, &data).unwrap());
        assert_eq!(eval.accuracy, 1.0);
        assert_eq!(eval.mean_rt, 1.0);
        assert_eq!(eval.forced_fraction, 0.0);
    }

    #[test]
    fn evaluation_is_seeded() {
        let (net, data) = blob_net();
        let params = DddmParams { predictions: 20, trials: 3, trial_length: 10, ..Default::default() };
        let model = DropoutClassifier::new(&net, 0.6);
        let table = fit_table(&model, &data, 5, 3, 1.0, 1).unwrap();
        let a = evaluate_dddm(&net, 0.6, &table, &data, &params, 5).unwrap();
        assert_eq!(a, evaluate_dddm(&net, 0.6, &table, &data, &params, 5).unwrap());
        exec::set_mode(exec::Mode::Sequential);
        let seq = evaluate_dddm(&net, 0.6, &table, &data, &params, 5).unwrap();
        exec::set_mode(exec::Mode::Parallel);
        assert_eq!(a, seq);
        assert_eq!(table, fit_table(&model, &data, 5, 3, 1.0, 1).unwrap());
    }

    #[test]
    fn table_counts_every_prediction() {
        let (net, data) = blob_net();
        let table = fit_table(&DropoutClassifier::new(&net, 0.4), &data, 7, 2, 1.0, 3).unwrap();
        for c in 0..3 {
            assert_eq!(table.total(c), 50 * 7);
        }
    }

    #[test]
    fn oracle_hits_its_accuracy() {
        let oracle = NoisyOracle::new(3, 0.7).unwrap();
        let data = oracle.dataset(300).unwrap();
        let mut rng = seed::rng(4);
        let mut hits = 0;
        for i in 0..300 {
            for p in oracle.sample(data.row(i), 20, &mut rng).unwrap() {
                hits += (p.argmax() == data.labels[i]) as usize;
            }
        }
        let acc = hits as f64 / 6000.0;
        assert!((acc - 0.7).abs() < 3.0 * (0.21f64 / 6000.0).sqrt(), "{acc}");
    }
}

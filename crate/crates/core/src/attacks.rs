//! Adversarial example generators: FGSM, PGD, repeated uniform noise and
//! salt-and-pepper corruption.
//!
//! Gradient attacks differentiate the mask-free pass of the target network.
//! Success always means the deterministic prediction on `x_adv` differs from
//! the true label.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::classifier::Network;
use crate::dataio::{self, Dataset};
use crate::{exec, seed, Error, Result};

/// Rows per gradient batch in [`attack_dataset`].
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Fgsm,
    Pgd,
    Uniform,
    SaltPepper,
}

impl AttackKind {
    pub const ALL: [AttackKind; 4] = [AttackKind::Fgsm, AttackKind::Pgd, AttackKind::Uniform, AttackKind::SaltPepper];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Fgsm => "fgsm",
            AttackKind::Pgd => "pgd",
            AttackKind::Uniform => "uniform",
            AttackKind::SaltPepper => "salt_pepper",
        }
    }

    /// Whether `x_adv` stays in the L-infinity ball of radius epsilon.
    pub fn is_bounded(self) -> bool {
        self != AttackKind::SaltPepper
    }
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "salt-pepper" && *k == AttackKind::SaltPepper))
            .ok_or_else(|| Error::param(format!("unknown attack {s:?}; expected fgsm, pgd, uniform or salt_pepper")))
    }
}

/// Attack parameters. Unset optional fields take per-kind defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub kind: AttackKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Gradient steps (pgd) or candidate count (salt_pepper).
    #[serde(default)]
    pub steps: Option<usize>,
    /// PGD step size; defaults to `epsilon * 2.5 / steps`.
    #[serde(default)]
    pub step_size: Option<f64>,
    /// Uniform-noise draws.
    #[serde(default)]
    pub repeats: Option<usize>,
    /// PGD starts from a uniform point in the ball.
    #[serde(default = "yes")]
    pub random_start: bool,
    /// Salt-and-pepper reverts flipped pixels greedily after the first success.
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_epsilon() -> f64 {
    0.3
}

fn yes() -> bool {
    true
}

impl AttackConfig {
    /// MNIST settings: epsilon 0.3, 40 PGD steps, 100 noise repeats,
    /// 1000 salt-and-pepper candidates.
    pub fn new(kind: AttackKind) -> Self {
        Self {
            kind,
            epsilon: default_epsilon(),
            steps: None,
            step_size: None,
            repeats: None,
            random_start: true,
            refine: true,
            seed: 0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(match self.kind {
            AttackKind::Fgsm | AttackKind::Uniform => 1,
            AttackKind::Pgd => 40,
            AttackKind::SaltPepper => 1000,
        })
    }

    pub fn step_size(&self) -> f64 {
        self.step_size.unwrap_or(self.epsilon * 2.5 / self.steps() as f64)
    }

    pub fn repeats(&self) -> usize {
        self.repeats.unwrap_or(100)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon must be >= 0"));
        }
        if self.steps() == 0 || self.repeats() == 0 {
            return Err(Error::param("steps and repeats must be >= 1"));
        }
        if !(self.step_size() >= 0.0 && self.step_size().is_finite()) {
            return Err(Error::param("step_size must be >= 0"));
        }
        Ok(())
    }

    /// Short label such as `pgd@0.3`.
    pub fn label(&self) -> String {
        match self.kind {
            AttackKind::SaltPepper => format!("{}@{}", self.kind, self.steps()),
            _ => format!("{}@{}", self.kind, self.epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialExample {
    pub x_adv: Array1<f64>,
    pub success: bool,
    /// Forward plus gradient evaluations spent.
    pub queries: usize,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn misclassified(net: &Network, x: ArrayView2<f64>, labels: &[usize]) -> Result<Vec<bool>> {
    Ok(net.predict_labels(x)?.iter().zip(labels).map(|(p, y)| p != y).collect())
}

fn check_point(net: &Network, x: ArrayView1<f64>, y: usize) -> Result<()> {
    if x.len() != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: x.len(),
        });
    }
    if y >= net.classes() {
        return Err(Error::param(format!("label {y} >= {} classes", net.classes())));
    }
    Ok(())
}

/// One signed-gradient step of size `epsilon`, clipped to `[0, 1]`.
pub fn fgsm(net: &Network, x: ArrayView1<f64>, y: usize, epsilon: f64) -> Result<AdversarialExample> {
    check_point(net, x, y)?;
    let cfg = AttackConfig::new(AttackKind::Fgsm).with_epsilon(epsilon);
    Ok(run_batch(net, x.insert_axis(Axis(0)), &[y], &cfg, &[0])?.remove(0))
}

/// Iterated signed-gradient ascent projected onto the epsilon ball and the box.
pub fn pgd(
    net: &Network,
    x: ArrayView1<f64>,
    y: usize,
    epsilon: f64,
    steps: usize,
    step_size: f64,
    random_start: bool,
    seed: u64,
) -> Result<AdversarialExample> {
    check_point(net, x, y)?;
    let cfg = AttackConfig {
        steps: Some(steps),
        step_size: Some(step_size),
        random_start,
        ..AttackConfig::new(AttackKind::Pgd).with_epsilon(epsilon).with_seed(seed)
    };
    cfg.validate()?;
    Ok(run_batch(net, x.insert_axis(Axis(0)), &[y], &cfg, &[0])?.remove(0))
}

/// First of up to `repeats` uniform perturbations that causes a misclassification.
pub fn uniform_noise(
    net: &Network,
    x: ArrayView1<f64>,
    y: usize,
    epsilon: f64,
    repeats: usize,
    seed: u64,
) -> Result<AdversarialExample> {
    check_point(net, x, y)?;
    let cfg = AttackConfig {
        repeats: Some(repeats),
        ..AttackConfig::new(AttackKind::Uniform).with_epsilon(epsilon).with_seed(seed)
    };
    cfg.validate()?;
    uniform_one(net, x, y, &cfg, &mut seed::stream_rng(seed, 0))
}

/// Nested salt-and-pepper corruption over `steps` candidates with a linearly
/// growing flipped fraction.
pub fn salt_pepper(net: &Network, x: ArrayView1<f64>, y: usize, steps: usize, seed: u64) -> Result<AdversarialExample> {
    check_point(net, x, y)?;
    let cfg = AttackConfig {
        steps: Some(steps),
        ..AttackConfig::new(AttackKind::SaltPepper).with_seed(seed)
    };
    cfg.validate()?;
    salt_pepper_one(net, x, y, &cfg, &mut seed::stream_rng(seed, 0))
}

/// Gradient attacks over a batch; row `j` draws its random start from
/// stream `streams[j]`.
fn run_batch(
    net: &Network,
    x: ArrayView2<f64>,
    labels: &[usize],
    cfg: &AttackConfig,
    streams: &[u64],
) -> Result<Vec<AdversarialExample>> {
    let eps = cfg.epsilon;
    let (steps, alpha) = match cfg.kind {
        AttackKind::Fgsm => (1, eps),
        AttackKind::Pgd => (cfg.steps(), cfg.step_size()),
        _ => unreachable!("not a gradient attack"),
    };
    let lo = x.mapv(|v| (v - eps).max(0.0));
    let hi = x.mapv(|v| (v + eps).min(1.0));
    let mut cur = x.to_owned();
    if cfg.kind == AttackKind::Pgd && cfg.random_start && eps > 0.0 {
        for (mut row, &s) in cur.rows_mut().into_iter().zip(streams) {
            let mut rng = seed::stream_rng(cfg.seed, s);
            for v in row.iter_mut() {
                *v += rng.random_range(-eps..=eps);
            }
        }
        cur = cur.clamp_vals(&lo, &hi);
    }
    if eps > 0.0 {
        for _ in 0..steps {
            let g = net.input_gradients(cur.view(), labels)?;
            cur.zip_mut_with(&g, |c, &g| *c += alpha * sign(g));
            cur = cur.clamp_vals(&lo, &hi);
        }
    }
    let wrong = misclassified(net, cur.view(), labels)?;
    let queries = if eps > 0.0 { steps + 1 } else { 1 };
    Ok(cur
        .rows()
        .into_iter()
        .zip(wrong)
        .map(|(r, success)| AdversarialExample {
            x_adv: r.to_owned(),
            success,
            queries,
        })
        .collect())
}

trait ClampVals {
    fn clamp_vals(self, lo: &Array2<f64>, hi: &Array2<f64>) -> Self;
}

impl ClampVals for Array2<f64> {
    fn clamp_vals(mut self, lo: &Array2<f64>, hi: &Array2<f64>) -> Self {
        ndarray::Zip::from(&mut self)
            .and(lo)
            .and(hi)
            .for_each(|v, &l, &h| *v = v.max(l).min(h));
        self
    }
}

fn uniform_one<R: RngCore>(
    net: &Network,
    x: ArrayView1<f64>,
    y: usize,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<AdversarialExample> {
    let eps = cfg.epsilon;
    let repeats = cfg.repeats();
    let d = x.len();
    let mut done = 0;
    let mut last = x.to_owned();
    while done < repeats {
        let block = (repeats - done).min(32);
        let mut cand = Array2::zeros((block, d));
        for mut row in cand.rows_mut() {
            for (v, &xi) in row.iter_mut().zip(x) {
                let noise = if eps > 0.0 { rng.random_range(-eps..=eps) } else { 0.0 };
                *v = (xi + noise).clamp(0.0, 1.0);
            }
        }
        let wrong = misclassified(net, cand.view(), &vec![y; block])?;
        if let Some(j) = wrong.iter().position(|&w| w) {
            return Ok(AdversarialExample {
                x_adv: cand.row(j).to_owned(),
                success: true,
                queries: done + j + 1,
            });
        }
        last = cand.row(block - 1).to_owned();
        done += block;
    }
    Ok(AdversarialExample {
        x_adv: last,
        success: false,
        queries: repeats,
    })
}

/// Pixel order and forced values shared by all candidates of one input.
#[derive(Debug, Clone)]
pub struct SaltPepperNoise {
    pub order: Vec<usize>,
    /// `true` forces the pixel to 1, `false` to 0.
    pub salt: Vec<bool>,
}

impl SaltPepperNoise {
    pub fn sample<R: RngCore>(d: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(rng);
        let salt = (0..d).map(|_| rng.random::<bool>()).collect();
        Self { order, salt }
    }

    /// `x` with the first `flipped` pixels of the order replaced.
    pub fn apply(&self, x: ArrayView1<f64>, flipped: usize) -> Array1<f64> {
        let mut out = x.to_owned();
        for &i in &self.order[..flipped] {
            out[i] = if self.salt[i] { 1.0 } else { 0.0 };
        }
        out
    }

    /// Flipped-pixel count of candidate `j` out of `steps` (fraction `j / steps`).
    pub fn ramp(d: usize, j: usize, steps: usize) -> usize {
        ((j as f64 / steps as f64) * d as f64).round() as usize
    }
}

fn salt_pepper_one<R: RngCore>(
    net: &Network,
    x: ArrayView1<f64>,
    y: usize,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<AdversarialExample> {
    let d = x.len();
    let steps = cfg.steps();
    let noise = SaltPepperNoise::sample(d, rng);
    let mut queries = 0;

    let mut counts: Vec<usize> = (0..=steps).map(|j| SaltPepperNoise::ramp(d, j, steps)).collect();
    counts.dedup();
    let mut found = None;
    for block in counts.chunks(32) {
        let mut cand = Array2::zeros((block.len(), d));
        for (mut row, &m) in cand.rows_mut().into_iter().zip(block) {
            row.assign(&noise.apply(x, m));
        }
        let wrong = misclassified(net, cand.view(), &vec![y; block.len()])?;
        if let Some(j) = wrong.iter().position(|&w| w) {
            queries += j + 1;
            found = Some(block[j]);
            break;
        }
        queries += block.len();
    }
    let Some(m) = found else {
        return Ok(AdversarialExample {
            x_adv: x.to_owned(),
            success: false,
            queries,
        });
    };

    let mut best = noise.apply(x, m);
    if cfg.refine {
        for &i in noise.order[..m].iter().rev() {
            if best[i] == x[i] {
                continue;
            }
            let flipped = best[i];
            best[i] = x[i];
            queries += 1;
            if net.predict_labels(best.view().insert_axis(Axis(0)))?[0] == y {
                best[i] = flipped;
            }
        }
    }
    Ok(AdversarialExample {
        x_adv: best,
        success: true,
        queries,
    })
}

/// Adversarial copy of a dataset plus per-example bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackedDataset {
    pub data: Dataset,
    pub success: Vec<bool>,
    pub queries: Vec<usize>,
}

impl AttackedDataset {
    pub fn success_rate(&self) -> f64 {
        if self.success.is_empty() {
            return 0.0;
        }
        self.success.iter().filter(|&&s| s).count() as f64 / self.success.len() as f64
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    version: u32,
    attack: AttackConfig,
    source: String,
    success: Vec<bool>,
    queries: Vec<usize>,
}

/// Attacks every row of `data`. Row `i` uses random stream `i` of
/// `cfg.seed`; gradient attacks run in fixed chunks so results do not depend
/// on the thread count.
pub fn attack_dataset(net: &Network, data: &Dataset, cfg: &AttackConfig) -> Result<AttackedDataset> {
    cfg.validate()?;
    if data.dim() != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: data.dim(),
        });
    }
    let n = data.len();
    let examples: Vec<AdversarialExample> = match cfg.kind {
        AttackKind::Fgsm | AttackKind::Pgd => {
            let chunks = n.div_ceil(CHUNK);
            exec::try_map_indexed(chunks, |c| {
                let rows: Vec<usize> = (c * CHUNK..((c + 1) * CHUNK).min(n)).collect();
                let x = data.features.select(Axis(0), &rows);
                let labels: Vec<usize> = rows.iter().map(|&i| data.labels[i]).collect();
                let streams: Vec<u64> = rows.iter().map(|&i| i as u64).collect();
                run_batch(net, x.view(), &labels, cfg, &streams)
            })?
            .into_iter()
            .flatten()
            .collect()
        }
        AttackKind::Uniform => exec::try_map_indexed(n, |i| {
            uniform_one(net, data.row(i), data.labels[i], cfg, &mut seed::stream_rng(cfg.seed, i as u64))
        })?,
        AttackKind::SaltPepper => exec::try_map_indexed(n, |i| {
            salt_pepper_one(net, data.row(i), data.labels[i], cfg, &mut seed::stream_rng(cfg.seed, i as u64))
        })?,
    };
    let mut features = Array2::zeros((n, data.dim()));
    for (mut row, ex) in features.rows_mut().into_iter().zip(&examples) {
        row.assign(&ex.x_adv);
    }
    Ok(AttackedDataset {
        data: data.with_features(features, format!("{} | {}", data.meta.source, cfg.label()))?,
        success: examples.iter().map(|e| e.success).collect(),
        queries: examples.iter().map(|e| e.queries).collect(),
    })
}

/// Writes `<stem>.ddds` (dataset container) and `<stem>.json` (sidecar).
pub fn save_attacked(set: &AttackedDataset, cfg: &AttackConfig, dir: &Path, stem: &str) -> Result<()> {
    dataio::save_dataset(&set.data, &dir.join(format!("{stem}.ddds")))?;
    let sidecar = Sidecar {
        format: "dddm-attack".into(),
        version: 1,
        attack: cfg.clone(),
        source: set.data.meta.source.clone(),
        success: set.success.clone(),
        queries: set.queries.clone(),
    };
    let path = dir.join(format!("{stem}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&path, e))
}

pub fn load_attacked(dir: &Path, stem: &str) -> Result<(AttackedDataset, AttackConfig)> {
    let data = dataio::load_dataset(&dir.join(format!("{stem}.ddds")))?;
    let path = dir.join(format!("{stem}.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text)?;
    if sidecar.format != "dddm-attack" || sidecar.version != 1 {
        return Err(Error::Format {
            what: "attack sidecar",
            detail: format!("{} v{}", sidecar.format, sidecar.version),
        });
    }
    if sidecar.success.len() != data.len() || sidecar.queries.len() != data.len() {
        return Err(Error::CountMismatch {
            images: data.len(),
            labels: sidecar.success.len(),
        });
    }
    Ok((
        AttackedDataset {
            data,
            success: sidecar.success,
            queries: sidecar.queries,
        },
        sidecar.attack,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{accuracy, train, Activation, Layer, NetworkConfig, TrainConfig};
    use crate::dataio::synthetic_blobs;
    use ndarray::array;
    use std::sync::OnceLock;

    fn fixture() -> &'static (Network, Dataset) {
        static F: OnceLock<(Network, Dataset)> = OnceLock::new();
        F.get_or_init(|| {
            let data = synthetic_blobs(3, 10, 60, 0.12, 5).unwrap();
            let cfg = NetworkConfig {
                layer_sizes: vec![10, 24, 3],
                dropout_train: 0.0,
                dropout_test: 0.0,
                activation: Activation::Relu,
                seed: 2,
            };
            let net = train(&cfg, &TrainConfig { epochs: 30, ..Default::default() }, &data).unwrap();
            (net, data)
        })
    }

    fn linf(a: &Array1<f64>, b: ArrayView1<f64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_budget_is_identity() {
        let (net, data) = fixture();
        let (x, y) = (data.row(3), data.labels[3]);
        assert_eq!(fgsm(net, x, y, 0.0).unwrap().x_adv, x);
        assert_eq!(pgd(net, x, y, 0.0, 40, 0.0, true, 1).unwrap().x_adv, x);
        let u = uniform_noise(net, x, y, 0.0, 5, 1).unwrap();
        assert_eq!(u.x_adv, x);
        let already_wrong = net.predict_labels(x.insert_axis(Axis(0))).unwrap()[0] != y;
        assert_eq!(u.success, already_wrong);
    }

    #[test]
    fn single_step_pgd_equals_fgsm() {
        let (net, data) = fixture();
        for i in [0, 50, 100, 170] {
            let (x, y) = (data.row(i), data.labels[i]);
            let f = fgsm(net, x, y, 0.2).unwrap();
            let p = pgd(net, x, y, 0.2, 1, 0.2, false, 9).unwrap();
            assert_eq!(f.x_adv, p.x_adv);
        }
    }

    #[test]
    fn linear_model_gradient_sign() {
        // softmax(Wx + b): dL/dx = W^T (p - e_y)
        let w = array![[1.0, -2.0, 0.5, 0.0], [-1.0, 1.0, 0.25, 3.0]];
        let net = Network::from_layers(
            vec![Layer { weights: w.clone(), bias: array![0.1, -0.1] }],
            Activation::Relu,
            0.0,
        )
        .unwrap();
        let x = array![0.5, 0.5, 0.5, 0.5];
        let z = w.dot(&x) + array![0.1, -0.1];
        let e = z.mapv(f64::exp);
        let p = &e / e.sum();
        let grad = w.t().dot(&(&p - &array![1.0, 0.0]));
        let adv = fgsm(&net, x.view(), 0, 0.1).unwrap();
        for i in 0..4 {
            assert!((adv.x_adv[i] - (x[i] + 0.1 * sign(grad[i]))).abs() < 1e-15);
        }
    }

    #[test]
    fn constraints_hold_for_every_attack() {
        let (net, data) = fixture();
        let sub = data.subset(&(0..180).step_by(9).collect::<Vec<_>>());
        for kind in AttackKind::ALL {
            let cfg = AttackConfig {
                steps: Some(if kind == AttackKind::SaltPepper { 50 } else { 10 }),
                repeats: Some(20),
                ..AttackConfig::new(kind).with_epsilon(0.25).with_seed(4)
            };
            let set = attack_dataset(net, &sub, &cfg).unwrap();
            for i in 0..sub.len() {
                let adv = set.data.row(i);
                assert!(adv.iter().all(|v| (0.0..=1.0).contains(v)));
                if kind.is_bounded() {
                    assert!(linf(&adv.to_owned(), sub.row(i)) <= 0.25 + 1e-12, "{kind}");
                }
                let pred = net.predict_labels(adv.insert_axis(Axis(0))).unwrap()[0];
                assert_eq!(set.success[i], pred != sub.labels[i], "{kind}");
            }
        }
    }

    #[test]
    fn attacks_are_deterministic() {
        let (net, data) = fixture();
        let sub = data.head(40);
        for kind in AttackKind::ALL {
            let cfg = AttackConfig {
                steps: Some(20),
                ..AttackConfig::new(kind).with_seed(8)
            };
            assert_eq!(attack_dataset(net, &sub, &cfg).unwrap(), attack_dataset(net, &sub, &cfg).unwrap());
        }
    }

    #[test]
    fn pgd_at_least_as_strong_as_fgsm() {
        let (net, data) = fixture();
        let fg = attack_dataset(net, data, &AttackConfig::new(AttackKind::Fgsm).with_epsilon(0.15)).unwrap();
        let pg = attack_dataset(net, data, &AttackConfig::new(AttackKind::Pgd).with_epsilon(0.15)).unwrap();
        assert!(pg.success_rate() >= fg.success_rate());
        assert!(accuracy(net, &pg.data).unwrap() <= accuracy(net, &fg.data).unwrap());
    }

    #[test]
    fn uniform_budget_accounting() {
        let (net, data) = fixture();
        let one = uniform_noise(net, data.row(0), data.labels[0], 0.3, 1, 3).unwrap();
        assert_eq!(one.queries, 1);
        let many = uniform_noise(net, data.row(0), data.labels[0], 0.3, 70, 3).unwrap();
        assert!(many.queries >= 1 && many.queries <= 70);
        if !many.success {
            assert_eq!(many.queries, 70);
        }
    }

    #[test]
    fn salt_pepper_extremes() {
        let x = array![0.2, 0.4, 0.6, 0.8, 0.5];
        let noise = SaltPepperNoise::sample(5, &mut seed::rng(1));
        assert_eq!(noise.apply(x.view(), 0), x);
        let full = noise.apply(x.view(), 5);
        for i in 0..5 {
            assert_eq!(full[i], if noise.salt[i] { 1.0 } else { 0.0 });
        }
        assert_eq!(SaltPepperNoise::ramp(784, 0, 1000), 0);
        assert_eq!(SaltPepperNoise::ramp(784, 1000, 1000), 784);
    }

    #[test]
    fn salt_pepper_success_is_minimal_along_the_ramp() {
        let (net, data) = fixture();
        for i in [0, 70, 140] {
            let (x, y) = (data.row(i), data.labels[i]);
            let cfg = AttackConfig {
                refine: false,
                steps: Some(100),
                ..AttackConfig::new(AttackKind::SaltPepper).with_seed(i as u64)
            };
            let ex = salt_pepper_one(net, x, y, &cfg, &mut seed::stream_rng(cfg.seed, 0)).unwrap();
            if !ex.success {
                continue;
            }
            let noise = SaltPepperNoise::sample(x.len(), &mut seed::stream_rng(cfg.seed, 0));
            let m = (0..=x.len()).find(|&m| noise.apply(x, m) == ex.x_adv).unwrap();
            for smaller in (0..=100).map(|j| SaltPepperNoise::ramp(x.len(), j, 100)).filter(|&c| c < m) {
                let pred = net.predict_labels(noise.apply(x, smaller).view().insert_axis(Axis(0))).unwrap()[0];
                assert_eq!(pred, y);
            }
        }
    }

    #[test]
    fn persistence_round_trip() {
        let (net, data) = fixture();
        let cfg = AttackConfig::new(AttackKind::Fgsm).with_seed(3);
        let set = attack_dataset(net, &data.head(30), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_attacked(&set, &cfg, dir.path(), "fgsm").unwrap();
        let (back, cfg_back) = load_attacked(dir.path(), "fgsm").unwrap();
        assert_eq!(back, set);
        assert_eq!(cfg_back, cfg);
    }

    #[test]
    fn config_parsing() {
        assert_eq!("salt-pepper".parse::<AttackKind>().unwrap(), AttackKind::SaltPepper);
        assert!("cw".parse::<AttackKind>().is_err());
        let cfg: AttackConfig = serde_json::from_str(r#"{"kind": "pgd"}"#).unwrap();
        assert_eq!(cfg.steps(), 40);
        assert!((cfg.step_size() - 0.3 * 2.5 / 40.0).abs() < 1e-15);
        assert_eq!(AttackConfig::new(AttackKind::Uniform).repeats(), 100);
        assert!(AttackConfig::new(AttackKind::Fgsm).with_epsilon(-1.0).validate().is_err());
    }
}

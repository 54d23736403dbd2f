//! Experiment orchestration: the dropout-rate grid, attack evaluation,
//! epsilon sweeps and the layer-sensitivity diagnostic.
//!
//! Every random choice derives from `ExperimentConfig::seed` through
//! [`seed::derive`] with a role tag and the rates involved, so results do not
//! depend on evaluation order or thread count.

mod eval;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::{attack_dataset, AttackConfig, AttackKind, AttackedDataset};
use crate::classifier::{self, Activation, Network, NetworkConfig, TrainConfig};
use crate::dataio::{self, Dataset, SplitSpec};
use crate::evidence::{DddmParams, LikelihoodTable};
use crate::{seed, Error, Result};

pub use eval::{
    evaluate_accumulated, evaluate_dddm, evaluate_dropout_classifier, evaluate_one_shot, fit_table, DddmEvaluation,
    DropoutClassifier, InputVerdict, NoisyOracle, StochasticPredictor,
};
pub use report::{
    cosine, fingerprint, layer_sensitivity, spearman, write_cells_csv, write_json, write_sweep_csv, Fingerprint,
    LayerStats, Manifest,
};

pub const DEFAULT_RATES: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// IDX image/label files; relative paths resolve against the data directory.
    Idx { images: PathBuf, labels: PathBuf },
    Blobs {
        classes: usize,
        dim: usize,
        n_per_class: usize,
        spread: f64,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Idx {
            images: "mnist10k-images-idx3-ubyte.gz".into(),
            labels: "mnist10k-labels-idx1-ubyte.gz".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub source: DataSource,
    pub split: SplitSpec,
    /// Rows of the test split used for evaluation.
    pub eval_size: usize,
    /// Rows of the training split whose predictions fill the likelihood tables.
    pub table_size: usize,
    /// Stochastic predictions drawn per table row.
    pub table_predictions: usize,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            source: DataSource::default(),
            split: SplitSpec::default(),
            eval_size: 1000,
            table_size: 2000,
            table_predictions: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchSpec {
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for ArchSpec {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128],
            activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub train_rates: Vec<f64>,
    pub test_rates: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            train_rates: DEFAULT_RATES.to_vec(),
            test_rates: DEFAULT_RATES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    /// Adversarial examples crafted against each `h_a` separately.
    PerClassifier,
    /// One adversarial set crafted against the undefended network.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Cell to sweep; unset means the cell selected by the grid.
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub attack: AttackConfig,
    pub epsilons: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            a: None,
            b: None,
            attack: AttackConfig::new(AttackKind::Pgd),
            epsilons: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataSpec,
    pub network: ArchSpec,
    pub train: TrainConfig,
    pub grid: GridSpec,
    pub attacks: Vec<AttackConfig>,
    pub attack_mode: AttackMode,
    pub dddm: DddmParams,
    /// Allowed clean-accuracy shortfall of the selected cell, as a fraction.
    pub selection_margin: f64,
    pub sweep: SweepSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data: DataSpec::default(),
            network: ArchSpec::default(),
            train: TrainConfig::default(),
            grid: GridSpec::default(),
            attacks: vec![AttackConfig::new(AttackKind::Fgsm), AttackConfig::new(AttackKind::Pgd)],
            attack_mode: AttackMode::PerClassifier,
            dddm: DddmParams::default(),
            selection_margin: 0.02,
            sweep: SweepSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.dddm.validate()?;
        self.train.validate()?;
        for &r in self.grid.train_rates.iter().chain(&self.grid.test_rates) {
            classifier::check_rate(r)?;
        }
        if self.grid.train_rates.is_empty() || self.grid.test_rates.is_empty() {
            return Err(Error::param("grid needs at least one train and one test rate"));
        }
        for a in self.attacks.iter().chain([&self.sweep.attack]) {
            a.validate()?;
        }
        if !(0.0..=1.0).contains(&self.selection_margin) {
            return Err(Error::param("selection_margin must lie in [0, 1]"));
        }
        if self.data.table_predictions == 0 || self.data.eval_size == 0 || self.data.table_size == 0 {
            return Err(Error::param("eval_size, table_size and table_predictions must be >= 1"));
        }
        Ok(())
    }

    /// Network configuration for train rate `a`.
    pub fn network_config(&self, a: f64, b: f64, input: usize, classes: usize) -> NetworkConfig {
        let mut layer_sizes = vec![input];
        layer_sizes.extend(&self.network.hidden);
        layer_sizes.push(classes);
        NetworkConfig {
            layer_sizes,
            dropout_train: a,
            dropout_test: b,
            activation: self.network.activation,
            seed: self.seed_for("init", &[rate_key(a)]),
        }
    }

    pub fn train_config(&self, a: f64) -> TrainConfig {
        TrainConfig {
            seed: self.seed_for("train", &[rate_key(a)]),
            ..self.train.clone()
        }
    }

    /// Child seed for a role and a path of numeric labels.
    pub fn seed_for(&self, role: &str, path: &[u64]) -> u64 {
        let mut full = vec![seed::tag(role)];
        full.extend_from_slice(path);
        seed::derive(self.seed, &full)
    }
}

/// Stable integer key for a rate, used in seed paths and map keys.
pub fn rate_key(rate: f64) -> u64 {
    (rate * 1e6).round() as u64
}

/// Train split, evaluation subset and table-fitting subset.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub train: Dataset,
    pub eval: Dataset,
    pub table: Dataset,
}

pub fn load_source(source: &DataSource, data_dir: &Path, seed: u64) -> Result<Dataset> {
    match source {
        DataSource::Idx { images, labels } => dataio::load_idx(&data_dir.join(images), &data_dir.join(labels)),
        DataSource::Blobs {
            classes,
            dim,
            n_per_class,
            spread,
        } => dataio::synthetic_blobs(*classes, *dim, *n_per_class, *spread, seed),
    }
}

pub fn prepare_data(config: &ExperimentConfig, data_dir: &Path) -> Result<PreparedData> {
    let full = load_source(&config.data.source, data_dir, config.seed_for("blobs", &[]))?;
    let spec = SplitSpec {
        seed: config.seed_for("split", &[config.data.split.seed]),
        ..config.data.split.clone()
    };
    let (train, _val, test) = dataio::split(&full, &spec)?;
    let eval = test.head(config.data.eval_size.min(test.len()));
    let table = train.head(config.data.table_size.min(train.len()));
    Ok(PreparedData { train, eval, table })
}

/// Scores of one system on one input set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetScores {
    /// `clean` or an attack label such as `pgd@0.3`.
    pub set: String,
    pub attack: Option<AttackKind>,
    pub epsilon: f64,
    /// Deterministic `h_{0,0}` on inputs crafted against it.
    pub acc_undefended: f64,
    /// One-shot `h_{a,b}`.
    pub acc_h: f64,
    /// Accumulated `H_{a,b}`, aggregate over trials.
    pub acc_dddm: f64,
    pub trial_acc_dddm: f64,
    pub mean_rt: f64,
    pub forced_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub a: f64,
    pub b: f64,
    /// First entry is the clean set, then one per attack.
    pub sets: Vec<SetScores>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn clean(&self) -> Option<&SetScores> {
        self.sets.iter().find(|s| s.attack.is_none())
    }

    pub fn attacked(&self) -> impl Iterator<Item = &SetScores> {
        self.sets.iter().filter(|s| s.attack.is_some())
    }

    pub fn clean_acc_dddm(&self) -> Option<f64> {
        self.clean().map(|s| s.acc_dddm)
    }

    /// Mean accumulated accuracy over attacks (clean accuracy when there are none).
    pub fn robust_acc_dddm(&self) -> Option<f64> {
        let accs: Vec<f64> = self.attacked().map(|s| s.acc_dddm).collect();
        if accs.is_empty() {
            self.clean_acc_dddm()
        } else {
            Some(accs.iter().sum::<f64>() / accs.len() as f64)
        }
    }

    pub fn set(&self, attack: AttackKind) -> Option<&SetScores> {
        self.sets.iter().find(|s| s.attack == Some(attack))
    }
}

/// Best mean robust accuracy among cells whose clean accumulated accuracy is
/// within `margin` of the best clean cell. Ties go to the earlier cell.
pub fn select_cell(cells: &[CellResult], margin: f64) -> Option<(f64, f64)> {
    let best_clean = cells
        .iter()
        .filter_map(CellResult::clean_acc_dddm)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(&CellResult, f64)> = None;
    for cell in cells {
        let (Some(clean), Some(robust)) = (cell.clean_acc_dddm(), cell.robust_acc_dddm()) else {
            continue;
        };
        if clean + margin + 1e-12 < best_clean {
            continue;
        }
        if best.is_none_or(|(_, r)| robust > r) {
            best = Some((cell, robust));
        }
    }
    best.map(|(c, _)| (c.a, c.b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
    pub selected: Option<(f64, f64)>,
}

impl GridReport {
    pub fn cell(&self, a: f64, b: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| rate_key(c.a) == rate_key(a) && rate_key(c.b) == rate_key(b))
    }

    pub fn selected_cell(&self) -> Option<&CellResult> {
        self.selected.and_then(|(a, b)| self.cell(a, b))
    }
}

/// Trained networks, adversarial sets and tables for one configuration,
/// built lazily and kept for reuse.
pub struct Lab {
    pub config: ExperimentConfig,
    pub data: PreparedData,
    models: BTreeMap<u64, Network>,
    attacked: BTreeMap<(u64, String, u64), AttackedDataset>,
    tables: BTreeMap<(u64, u64), LikelihoodTable>,
}

impl Lab {
    pub fn new(config: ExperimentConfig, data: PreparedData) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            data,
            models: BTreeMap::new(),
            attacked: BTreeMap::new(),
            tables: BTreeMap::new(),
        })
    }

    pub fn from_dir(config: ExperimentConfig, data_dir: &Path) -> Result<Self> {
        let data = prepare_data(&config, data_dir)?;
        Self::new(config, data)
    }

    /// Registers a pre-trained network for train rate `a`.
    pub fn insert_model(&mut self, a: f64, net: Network) {
        self.models.insert(rate_key(a), net);
    }

    /// Network trained with rate `a`, training it on first use.
    pub fn model(&mut self, a: f64) -> Result<&Network> {
        let key = rate_key(a);
        if !self.models.contains_key(&key) {
            let train = &self.data.train;
            let net_cfg = self.config.network_config(a, 0.0, train.dim(), train.classes);
            let net = classifier::train(&net_cfg, &self.config.train_config(a), train)?;
            self.models.insert(key, net);
        }
        Ok(&self.models[&key])
    }

    pub fn models(&self) -> impl Iterator<Item = (f64, &Network)> {
        self.models.iter().map(|(&k, n)| (k as f64 / 1e6, n))
    }

    /// Adversarial evaluation set crafted against the network trained with rate `target`.
    pub fn attacked(&mut self, target: f64, attack: &AttackConfig) -> Result<&AttackedDataset> {
        let label = serde_json::to_string(attack)?;
        let key = (rate_key(target), label, rate_key(attack.epsilon));
        if !self.attacked.contains_key(&key) {
            let cfg = AttackConfig {
                seed: self.config.seed_for("attack", &[rate_key(target), seed::tag(&attack.label()), attack.seed]),
                ..attack.clone()
            };
            self.model(target)?;
            let set = attack_dataset(&self.models[&key.0], &self.data.eval, &cfg)?;
            self.attacked.insert(key.clone(), set);
        }
        Ok(&self.attacked[&key])
    }

    /// Likelihood table of `h_{a,b}` from clean training predictions.
    pub fn table(&mut self, a: f64, b: f64) -> Result<&LikelihoodTable> {
        let key = (rate_key(a), rate_key(b));
        if !self.tables.contains_key(&key) {
            let seed = self.config.seed_for("table", &[key.0, key.1]);
            self.model(a)?;
            let d = &self.config.dddm;
            let table = fit_table(
                &DropoutClassifier::new(&self.models[&key.0], b),
                &self.data.table,
                self.config.data.table_predictions,
                d.k,
                d.smoothing,
                seed,
            )?;
            self.tables.insert(key, table);
        }
        Ok(&self.tables[&key])
    }

    pub fn insert_table(&mut self, a: f64, b: f64, table: LikelihoodTable) {
        self.tables.insert((rate_key(a), rate_key(b)), table);
    }

    /// Target network for attacks on cell `a`.
    fn attack_target(&self, a: f64) -> f64 {
        match self.config.attack_mode {
            AttackMode::PerClassifier => a,
            AttackMode::Shared => 0.0,
        }
    }

    /// Accuracy of the deterministic `h_{0,0}` on inputs crafted against it.
    pub fn undefended_accuracy(&mut self, attack: Option<&AttackConfig>) -> Result<f64> {
        let data = match attack {
            Some(cfg) => self.attacked(0.0, cfg)?.data.clone(),
            None => self.data.eval.clone(),
        };
        classifier::accuracy(self.model(0.0)?, &data)
    }

    /// All three systems on one input set for cell `(a, b)`.
    pub fn score_set(&mut self, a: f64, b: f64, attack: Option<&AttackConfig>) -> Result<SetScores> {
        let acc_undefended = self.undefended_accuracy(attack)?;
        let data = match attack {
            Some(cfg) => self.attacked(self.attack_target(a), cfg)?.data.clone(),
            None => self.data.eval.clone(),
        };
        let set = attack.map_or_else(|| "clean".to_string(), AttackConfig::label);
        let eval_seed = self.config.seed_for("eval", &[rate_key(a), rate_key(b), seed::tag(&set)]);
        let table = self.table(a, b)?.clone();
        let params = self.config.dddm.clone();
        let net = self.model(a)?;
        let acc_h = evaluate_dropout_classifier(net, b, &data, eval_seed)?;
        let dddm = evaluate_dddm(net, b, &table, &data, &params, eval_seed)?;
        Ok(SetScores {
            set,
            attack: attack.map(|c| c.kind),
            epsilon: attack.map_or(0.0, |c| c.epsilon),
            acc_undefended,
            acc_h,
            acc_dddm: dddm.accuracy,
            trial_acc_dddm: dddm.trial_accuracy,
            mean_rt: dddm.mean_rt,
            forced_fraction: dddm.forced_fraction,
        })
    }

    pub fn evaluate_cell(&mut self, a: f64, b: f64) -> CellResult {
        let attacks = self.config.attacks.clone();
        let mut sets = Vec::with_capacity(attacks.len() + 1);
        let mut error = None;
        for attack in std::iter::once(None).chain(attacks.iter().map(Some)) {
            match self.score_set(a, b, attack) {
                Ok(s) => sets.push(s),
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            }
        }
        CellResult { a, b, sets, error }
    }

    /// Every `(a, b)` cell of the grid plus the selected cell. Cell failures
    /// are recorded and the grid continues.
    pub fn run_grid(&mut self) -> GridReport {
        let grid = self.config.grid.clone();
        let mut cells = Vec::new();
        for &a in &grid.train_rates {
            for &b in &grid.test_rates {
                cells.push(self.evaluate_cell(a, b));
            }
        }
        let selected = select_cell(&cells, self.config.selection_margin);
        GridReport { cells, selected }
    }

    /// Sweep of attack strength for cell `(a, b)`.
    pub fn epsilon_sweep(&mut self, a: f64, b: f64) -> Result<Vec<SweepRow>> {
        let spec = self.config.sweep.clone();
        spec.epsilons
            .iter()
            .map(|&eps| {
                let attack = spec.attack.clone().with_epsilon(eps);
                let s = self.score_set(a, b, Some(&attack))?;
                Ok(SweepRow {
                    epsilon: eps,
                    acc_undefended: s.acc_undefended,
                    acc_dropout: s.acc_h,
                    acc_dddm: s.acc_dddm,
                    trial_acc_dddm: s.trial_acc_dddm,
                    mean_rt: s.mean_rt,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub acc_undefended: f64,
    pub acc_dropout: f64,
    pub acc_dddm: f64,
    pub trial_acc_dddm: f64,
    pub mean_rt: f64,
}

/// Standalone sweep over an explicit network and table. The undefended
/// baseline is evaluated on inputs crafted against `baseline`; the dropout and
/// accumulated systems on inputs crafted against `net`.
#[allow(clippy::too_many_arguments)]
pub fn epsilon_sweep(
    net: &Network,
    baseline: &Network,
    b: f64,
    table: &LikelihoodTable,
    attack: &AttackConfig,
    epsilons: &[f64],
    data: &Dataset,
    params: &DddmParams,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    epsilons
        .iter()
        .map(|&eps| {
            let cfg = attack.clone().with_epsilon(eps);
            let own = attack_dataset(net, data, &cfg)?;
            let base = attack_dataset(baseline, data, &cfg)?;
            let eval_seed = seed::derive(seed, &[rate_key(eps)]);
            let dddm = evaluate_dddm(net, b, table, &own.data, params, eval_seed)?;
            Ok(SweepRow {
                epsilon: eps,
                acc_undefended: classifier::accuracy(baseline, &base.data)?,
                acc_dropout: evaluate_dropout_classifier(net, b, &own.data, eval_seed)?,
                acc_dddm: dddm.accuracy,
                trial_acc_dddm: dddm.trial_accuracy,
                mean_rt: dddm.mean_rt,
            })
        })
        .collect()
}

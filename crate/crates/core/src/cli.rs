//! Command-line workflows.
//!
//! Configuration resolves in layers: built-in defaults, then the `--config`
//! JSON file, then `--set key=value` overrides, then the dedicated flags
//! (`--seed`, `--threshold-A`, `--trials`, ...). Each layer is a JSON merge
//! over the previous one, so a file only needs the keys it changes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::attacks::{save_attacked, AttackConfig, AttackKind};
use crate::classifier::{self, Network};
use crate::ddm::{self, DdmParams, RaceParams};
use crate::harness::{self, ExperimentConfig, Lab, Manifest};
use crate::{exec, seed, Error, Result};

/// Exit status for a usage error (unknown flag or subcommand).
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_DATA: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;

/// Cell used by single-cell commands when `--a`/`--b` are not given.
pub const DEFAULT_CELL: (f64, f64) = (0.2, 0.6);

#[derive(Debug, Parser)]
#[command(name = "dddm", version, about = "Dropout classifiers with sequential evidence accumulation")]
pub struct Cli {
    /// JSON experiment configuration; missing keys keep their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory receiving every output of the run.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Root seed; all randomness derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = one per core, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory holding the IDX files named in the configuration.
    #[arg(long, global = true, env = "DDDM_DATA_DIR", default_value = "data/mnist", value_name = "DIR")]
    pub data_dir: PathBuf,

    /// Directory of `model_a<rate>.json` checkpoints to reuse instead of training.
    #[arg(long, global = true, value_name = "DIR")]
    pub models: Option<PathBuf>,

    /// Dotted-key override such as `dddm.threshold=0.999` or `attacks.0.epsilon=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Train-phase dropout rate of the cell (restricts the grid when used with `grid`).
    #[arg(long, global = true)]
    pub a: Option<f64>,

    /// Test-phase dropout rate of the cell.
    #[arg(long, global = true)]
    pub b: Option<f64>,

    /// Perturbation bound applied to every configured attack.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    /// Replace the configured attacks with a single one of this kind.
    #[arg(long, global = true, value_parser = parse_attack)]
    pub attack: Option<AttackKind>,

    /// Posterior threshold A.
    #[arg(long = "threshold-A", global = true)]
    pub threshold_a: Option<f64>,

    /// Trials per input.
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Maximum predictions absorbed per trial (L).
    #[arg(long = "trial-length", global = true)]
    pub trial_length: Option<usize>,

    /// Stochastic predictions drawn per input.
    #[arg(long, global = true)]
    pub predictions: Option<usize>,
}

fn parse_attack(s: &str) -> std::result::Result<AttackKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one network per train-phase rate and save checkpoints.
    Train,
    /// Fit the likelihood table of one (a, b) cell.
    BuildTable,
    /// Craft adversarial copies of the evaluation set.
    Attack,
    /// Evaluate one (a, b) cell on clean and attacked inputs.
    Eval,
    /// Accuracy and response time against attack strength.
    Sweep,
    /// Evaluate every (a, b) cell and select the best.
    Grid,
    /// Simulate the drift-diffusion process (and optionally the race statistic).
    DdmSim(DdmSimArgs),
    /// Compare hidden-layer outputs on clean and attacked inputs.
    DiagnoseLayers,
}

#[derive(Debug, Clone, Args)]
pub struct DdmSimArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Absorbing bound A (bounds at +A and -A).
    #[arg(long, default_value_t = 1.0)]
    pub bound: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Horizon; defaults to 100 analytic mean response times.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Monitor the bounds only at grid points.
    #[arg(long)]
    pub no_bridge: bool,
    /// Write the first N trajectories as `path_<i>.csv`.
    #[arg(long, default_value_t = 0)]
    pub dump: usize,
    /// Comma-separated race means M_1,...,M_n; enables the race estimate.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub race: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub race_t_max: f64,
    #[arg(long, default_value_t = 10_000)]
    pub race_paths: usize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::BuildTable => "build-table",
            Command::Attack => "attack",
            Command::Eval => "eval",
            Command::Sweep => "sweep",
            Command::Grid => "grid",
            Command::DdmSim(_) => "ddm-sim",
            Command::DiagnoseLayers => "diagnose-layers",
        }
    }
}

/// Process exit status for a failed run.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        EXIT_CONFIG
    } else if e.is_numerical() {
        EXIT_NUMERICAL
    } else if e.is_data() {
        EXIT_DATA
    } else {
        1
    }
}

/// Recursive object merge; non-object values in `over` replace `base`.
/// Objects tagged with a different `kind` replace each other whole.
pub fn merge_json(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) if b.get("kind").is_none() || o.get("kind").is_none() || b.get("kind") == o.get("kind") => {
            for (k, v) in o {
                merge_json(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

/// Sets `key` (dotted, numeric segments index arrays) to `value`.
pub fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("empty segment in key {key:?}")));
        }
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("{key:?}: {part:?} is not an array index")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("{key:?}: index {idx} out of range")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert(if last { Value::Null } else { json!({}) }),
            Value::Null => {
                *cur = json!({});
                cur.as_object_mut().unwrap().entry(part.to_string()).or_insert(Value::Null)
            }
            _ => return Err(Error::Config(format!("{key:?}: cannot descend into a scalar at {part:?}"))),
        };
    }
    *cur = value;
    Ok(())
}

/// `key=value`; the value is read as JSON when it parses, otherwise as a string.
fn parse_assignment(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {s:?} is not KEY=VALUE")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// Resolved configuration as JSON, applying every layer in order.
pub fn resolve_json(cli: &Cli) -> Result<Value> {
    let mut v = serde_json::to_value(ExperimentConfig::default())?;
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if !file.is_object() {
            return Err(Error::Config(format!("{}: top level must be an object", path.display())));
        }
        merge_json(&mut v, file);
    }
    for s in &cli.set {
        let (k, value) = parse_assignment(s)?;
        set_dotted(&mut v, &k, value)?;
    }
    let o = &cli.overrides;
    if let Some(seed) = cli.seed {
        v["seed"] = json!(seed);
    }
    if let Some(t) = o.threshold_a {
        v["dddm"]["threshold"] = json!(t);
    }
    if let Some(t) = o.trials {
        v["dddm"]["trials"] = json!(t);
    }
    if let Some(l) = o.trial_length {
        v["dddm"]["trial_length"] = json!(l);
    }
    if let Some(n) = o.predictions {
        v["dddm"]["predictions"] = json!(n);
    }
    if let Some(kind) = o.attack {
        v["attacks"] = json!([{ "kind": kind }]);
        v["sweep"]["attack"] = json!({ "kind": kind });
    }
    if let Some(eps) = o.epsilon {
        if let Some(list) = v["attacks"].as_array_mut() {
            for a in list {
                a["epsilon"] = json!(eps);
            }
        }
    }
    if matches!(cli.command, Command::Grid | Command::Train) {
        if let Some(a) = o.a {
            v["grid"]["train_rates"] = json!([a]);
        }
        if let Some(b) = o.b {
            v["grid"]["test_rates"] = json!([b]);
        }
    }
    if let Command::Sweep = cli.command {
        if let Some(a) = o.a {
            v["sweep"]["a"] = json!(a);
        }
        if let Some(b) = o.b {
            v["sweep"]["b"] = json!(b);
        }
    }
    Ok(v)
}

pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let v = resolve_json(cli)?;
    let cfg: ExperimentConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate().map_err(|e| match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    })?;
    Ok(cfg)
}

fn rate_name(r: f64) -> String {
    format!("{r}")
}

pub fn model_file(a: f64) -> String {
    format!("model_a{}.json", rate_name(a))
}

pub fn table_file(a: f64, b: f64) -> String {
    format!("table_a{}_b{}.json", rate_name(a), rate_name(b))
}

struct Run<'a> {
    cli: &'a Cli,
    out: PathBuf,
    outputs: Vec<String>,
}

impl Run<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn cell(&self) -> (f64, f64) {
        (
            self.cli.overrides.a.unwrap_or(DEFAULT_CELL.0),
            self.cli.overrides.b.unwrap_or(DEFAULT_CELL.1),
        )
    }

    fn manifest(&self, config: Value, summary: Value) -> Result<()> {
        let m = Manifest {
            command: self.cli.command.name().to_string(),
            config,
            environment: harness::fingerprint(),
            outputs: self.outputs.clone(),
            summary,
        };
        harness::write_json(&self.out.join("manifest.json"), &m)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn open_lab(cli: &Cli, config: ExperimentConfig) -> Result<Lab> {
    let mut lab = Lab::from_dir(config, &cli.data_dir)?;
    if let Some(dir) = &cli.models {
        let mut rates = lab.config.grid.train_rates.clone();
        rates.push(0.0);
        rates.extend(cli.overrides.a);
        rates.extend(lab.config.sweep.a);
        for a in rates {
            let path = dir.join(model_file(a));
            if path.exists() {
                lab.insert_model(a, Network::load(&path)?);
            }
        }
    }
    Ok(lab)
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        exec::init_threads(cli.threads);
    }
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let mut run = Run {
        cli,
        out: cli.out.clone(),
        outputs: Vec::new(),
    };
    if let Command::DdmSim(args) = &cli.command {
        let root = cli.seed.unwrap_or(0);
        let summary = ddm_sim(&mut run, args, root)?;
        let config = json!({ "seed": root, "ddm": args_json(args) });
        return run.manifest(config, summary);
    }

    let config_json = resolve_json(cli)?;
    let config = resolve_config(cli)?;
    let mut lab = open_lab(cli, config)?;
    let summary = match &cli.command {
        Command::Train => train(&mut run, &mut lab)?,
        Command::BuildTable => build_table(&mut run, &mut lab)?,
        Command::Attack => attack(&mut run, &mut lab)?,
        Command::Eval => eval(&mut run, &mut lab)?,
        Command::Sweep => sweep(&mut run, &mut lab)?,
        Command::Grid => grid(&mut run, &mut lab)?,
        Command::DiagnoseLayers => diagnose(&mut run, &mut lab)?,
        Command::DdmSim(_) => unreachable!("handled above"),
    };
    let (a, b) = run.cell();
    let config = json!({ "experiment": config_json, "cell": { "a": a, "b": b }, "data_dir": cli.data_dir });
    run.manifest(config, summary)
}

fn args_json(args: &DdmSimArgs) -> Value {
    json!({
        "mu": args.mu, "sigma": args.sigma, "tau": args.tau, "bound": args.bound, "dt": args.dt,
        "t_max": args.t_max, "paths": args.paths, "bridge_correction": !args.no_bridge,
        "race": args.race, "race_t_max": args.race_t_max, "race_paths": args.race_paths,
    })
}

fn train(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let rates = lab.config.grid.train_rates.clone();
    let csv_path = run.path("train.csv");
    let mut w = csv_writer(&csv_path)?;
    w.write_record(["a", "epochs", "first_loss", "final_loss", "train_acc", "eval_acc"])?;
    for a in rates {
        let eval = lab.data.eval.clone();
        let train_set = lab.data.train.clone();
        let net = lab.model(a)?;
        let hist = &net.meta().loss_history;
        w.write_record([
            a.to_string(),
            hist.len().to_string(),
            hist.first().map_or(String::new(), f64::to_string),
            hist.last().map_or(String::new(), f64::to_string),
            classifier::accuracy(net, &train_set)?.to_string(),
            classifier::accuracy(net, &eval)?.to_string(),
        ])?;
        let path = run.path(&model_file(a));
        net.save(&path)?;
    }
    finish(w, &csv_path)?;
    Ok(json!({ "train_config": lab.config.train }))
}

fn build_table(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let (a, b) = run.cell();
    let table = lab.table(a, b)?.clone();
    let path = run.path(&table_file(a, b));
    table.save(&path)?;
    let csv_path = run.path("table.csv");
    let mut w = csv_writer(&csv_path)?;
    w.write_record(["class", "total", "distinct_signatures"])?;
    for c in 0..table.classes() {
        w.write_record([c.to_string(), table.total(c).to_string(), table.distinct(c).to_string()])?;
    }
    finish(w, &csv_path)?;
    Ok(json!({ "universe": table.universe_size() }))
}

fn attack(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let (a, _) = run.cell();
    let attacks = lab.config.attacks.clone();
    let csv_path = run.path("attack.csv");
    let mut w = csv_writer(&csv_path)?;
    w.write_record(["target_a", "attack", "epsilon", "steps", "success_rate", "accuracy", "mean_queries"])?;
    for cfg in &attacks {
        let set = lab.attacked(a, cfg)?.clone();
        let acc = classifier::accuracy(lab.model(a)?, &set.data)?;
        let stem = format!("attack_a{}_{}", rate_name(a), cfg.label().replace('@', "_eps"));
        let used = AttackConfig {
            seed: lab.config.seed_for("attack", &[harness::rate_key(a), seed::tag(&cfg.label()), cfg.seed]),
            ..cfg.clone()
        };
        save_attacked(&set, &used, &run.out, &stem)?;
        run.outputs.push(format!("{stem}.ddds"));
        run.outputs.push(format!("{stem}.json"));
        let mean_q = set.queries.iter().sum::<usize>() as f64 / set.queries.len().max(1) as f64;
        w.write_record([
            a.to_string(),
            cfg.kind.to_string(),
            cfg.epsilon.to_string(),
            cfg.steps().to_string(),
            set.success_rate().to_string(),
            acc.to_string(),
            mean_q.to_string(),
        ])?;
    }
    finish(w, &csv_path)?;
    Ok(Value::Null)
}

fn eval(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let (a, b) = run.cell();
    let attacks = lab.config.attacks.clone();
    let mut sets = vec![lab.score_set(a, b, None)?];
    for cfg in &attacks {
        sets.push(lab.score_set(a, b, Some(cfg))?);
    }
    let cell = harness::CellResult { a, b, sets, error: None };
    let path = run.path("eval.csv");
    harness::write_cells_csv(&path, std::slice::from_ref(&cell), lab.config.seed)?;
    Ok(serde_json::to_value(&cell)?)
}

fn sweep(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let (a, b) = match (lab.config.sweep.a, lab.config.sweep.b) {
        (Some(a), Some(b)) => (a, b),
        (sa, sb) => {
            let report = lab.run_grid();
            let (ga, gb) = report
                .selected
                .ok_or_else(|| Error::param("grid produced no usable cell to sweep"))?;
            (sa.unwrap_or(ga), sb.unwrap_or(gb))
        }
    };
    let rows = lab.epsilon_sweep(a, b)?;
    let path = run.path("sweep.csv");
    harness::write_sweep_csv(&path, &rows)?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let rt: Vec<f64> = rows.iter().map(|r| r.mean_rt).collect();
    Ok(json!({ "a": a, "b": b, "spearman_rt_epsilon": harness::spearman(&eps, &rt) }))
}

fn grid(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let report = lab.run_grid();
    let path = run.path("grid.csv");
    harness::write_cells_csv(&path, &report.cells, lab.config.seed)?;
    let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
    Ok(json!({
        "selected": report.selected.map(|(a, b)| json!({ "a": a, "b": b })),
        "cells": report.cells.len(),
        "failed_cells": failed,
    }))
}

fn diagnose(run: &mut Run, lab: &mut Lab) -> Result<Value> {
    let (a, _) = run.cell();
    let cfg = lab
        .config
        .attacks
        .first()
        .cloned()
        .ok_or_else(|| Error::Config("diagnose-layers needs at least one attack".into()))?;
    let adv = lab.attacked(a, &cfg)?.data.features.clone();
    let clean = lab.data.eval.features.clone();
    let stats = harness::layer_sensitivity(lab.model(a)?, clean.view(), adv.view())?;
    let path = run.path("layers.csv");
    let mut w = csv_writer(&path)?;
    for s in &stats {
        w.serialize(s)?;
    }
    finish(w, &path)?;
    Ok(json!({ "attack": cfg.label(), "target_a": a }))
}

#[derive(Serialize)]
struct DdmRow {
    mu: f64,
    sigma: f64,
    tau: f64,
    bound: f64,
    dt: f64,
    t_max: f64,
    bridge_correction: bool,
    paths: usize,
    upper: usize,
    lower: usize,
    unfinished: usize,
    upper_fraction: f64,
    upper_se: f64,
    hit_probability_analytic: f64,
    mean_rt: f64,
    rt_se: f64,
    mean_rt_analytic: f64,
}

#[derive(Serialize)]
struct RaceRow {
    k: usize,
    drift: f64,
    se: f64,
    drift_analytic: f64,
}

fn ddm_sim(run: &mut Run, args: &DdmSimArgs, root: u64) -> Result<Value> {
    let mut params = DdmParams {
        tau: args.tau,
        bridge_correction: !args.no_bridge,
        ..DdmParams::new(args.mu, args.sigma, args.bound).with_dt(args.dt)
    };
    params.t_max = args.t_max.unwrap_or_else(|| params.default_horizon());
    params.validate().map_err(|e| Error::Config(e.to_string()))?;
    let path_seed = seed::derive(root, &[seed::tag("ddm")]);
    let results = ddm::simulate_ddm_paths(&params, args.paths, path_seed)?;
    let s = ddm::summarize(&results);
    let row = DdmRow {
        mu: params.mu,
        sigma: params.sigma,
        tau: params.tau,
        bound: params.threshold,
        dt: params.dt,
        t_max: params.t_max,
        bridge_correction: params.bridge_correction,
        paths: s.paths,
        upper: s.upper,
        lower: s.lower,
        unfinished: s.unfinished,
        upper_fraction: s.upper_fraction,
        upper_se: s.upper_se,
        hit_probability_analytic: ddm::hit_probability_analytic(&params),
        mean_rt: s.mean_rt,
        rt_se: s.rt_se,
        mean_rt_analytic: ddm::mean_rt_analytic(&params),
    };
    let path = run.path("ddm.csv");
    let mut w = csv_writer(&path)?;
    w.serialize(&row)?;
    finish(w, &path)?;

    for i in 0..args.dump.min(args.paths) {
        let traced = ddm::simulate_ddm_path(&params, seed::derive(path_seed, &[seed::tag("dump"), i as u64]), true)?;
        let p = run.path(&format!("path_{i}.csv"));
        let file = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        ddm::write_path_csv(file, traced.path.as_deref().unwrap_or(&[]))?;
    }

    let mut race_json = Value::Null;
    if !args.race.is_empty() {
        let race = RaceParams {
            means: args.race.clone(),
            sigma: args.sigma,
            dt: args.dt,
            t_max: args.race_t_max,
        };
        race.validate().map_err(|e| Error::Config(e.to_string()))?;
        let est = ddm::estimate_race_drift(&race, args.race_paths, seed::derive(root, &[seed::tag("race")]))?;
        let analytic = ddm::race_drift_analytic(&race.means);
        let path = run.path("race.csv");
        let mut w = csv_writer(&path)?;
        for (k, ((drift, se), exact)) in est.iter().zip(&analytic).enumerate() {
            w.serialize(RaceRow {
                k: k + 1,
                drift: *drift,
                se: *se,
                drift_analytic: *exact,
            })?;
        }
        finish(w, &path)?;
        race_json = json!(est.iter().map(|(m, _)| m).collect::<Vec<_>>());
    }
    let mut summary = Map::new();
    summary.insert("upper_fraction".into(), json!(s.upper_fraction));
    summary.insert("mean_rt".into(), json!(s.mean_rt));
    summary.insert("race_drift".into(), race_json);
    Ok(Value::Object(summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::DataSource;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("dddm").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn dotted_overrides() {
        let mut v = json!({ "a": { "b": 1 }, "list": [{ "x": 1 }, { "x": 2 }] });
        set_dotted(&mut v, "a.b", json!(5)).unwrap();
        set_dotted(&mut v, "a.c.d", json!("s")).unwrap();
        set_dotted(&mut v, "list.1.x", json!(9)).unwrap();
        assert_eq!(v, json!({ "a": { "b": 5, "c": { "d": "s" } }, "list": [{ "x": 1 }, { "x": 9 }] }));
        assert!(set_dotted(&mut v, "list.7.x", json!(0)).is_err());
        assert!(set_dotted(&mut v, "a.b.c", json!(0)).is_err());
        assert_eq!(parse_assignment("k=0.5").unwrap(), ("k".into(), json!(0.5)));
        assert_eq!(parse_assignment("k=pgd").unwrap(), ("k".into(), json!("pgd")));
        assert!(parse_assignment("novalue").is_err());
    }

    #[test]
    fn tagged_objects_switch_kind_whole() {
        let mut v = json!({ "source": { "kind": "idx", "images": "i.gz" }, "n": 1 });
        merge_json(&mut v, json!({ "source": { "kind": "blobs", "dim": 3 } }));
        assert_eq!(v, json!({ "source": { "kind": "blobs", "dim": 3 }, "n": 1 }));
        merge_json(&mut v, json!({ "source": { "dim": 4 } }));
        assert_eq!(v["source"], json!({ "kind": "blobs", "dim": 4 }));
        let cfg = resolve_config(&parse(&[
            "grid",
            "--set",
            r#"data.source={"kind":"blobs","classes":3,"dim":4,"n_per_class":10,"spread":0.1}"#,
        ]))
        .unwrap();
        assert!(matches!(cfg.data.source, DataSource::Blobs { dim: 4, .. }));
    }

    #[test]
    fn precedence_defaults_file_flags() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.json");
        fs::write(&file, r#"{"seed": 7, "dddm": {"threshold": 0.9, "trials": 4}}"#).unwrap();
        let f = file.to_str().unwrap();

        let cfg = resolve_config(&parse(&["grid"])).unwrap();
        assert_eq!((cfg.seed, cfg.dddm.threshold, cfg.dddm.trials), (0, 0.99, 10));

        let cfg = resolve_config(&parse(&["grid", "--config", f])).unwrap();
        assert_eq!((cfg.seed, cfg.dddm.threshold, cfg.dddm.trials), (7, 0.9, 4));
        assert_eq!(cfg.dddm.trial_length, 25);

        let cfg = resolve_config(&parse(&["grid", "--config", f, "--set", "dddm.trials=6", "--threshold-A", "0.95"])).unwrap();
        assert_eq!((cfg.seed, cfg.dddm.threshold, cfg.dddm.trials), (7, 0.95, 6));

        let cfg = resolve_config(&parse(&["grid", "--config", f, "--set", "dddm.trials=6", "--trials", "3", "--seed", "1"])).unwrap();
        assert_eq!((cfg.seed, cfg.dddm.trials), (1, 3));
    }

    #[test]
    fn attack_and_grid_flags() {
        let cfg = resolve_config(&parse(&["grid", "--attack", "uniform", "--epsilon", "0.1", "--a", "0.4"])).unwrap();
        assert_eq!(cfg.attacks.len(), 1);
        assert_eq!(cfg.attacks[0].kind, AttackKind::Uniform);
        assert_eq!(cfg.attacks[0].epsilon, 0.1);
        assert_eq!(cfg.grid.train_rates, vec![0.4]);
        assert_eq!(cfg.grid.test_rates.len(), 5);
        let cfg = resolve_config(&parse(&["sweep", "--a", "0.2", "--b", "0.6"])).unwrap();
        assert_eq!((cfg.sweep.a, cfg.sweep.b), (Some(0.2), Some(0.6)));
    }

    #[test]
    fn config_errors_map_to_config_exit() {
        let e = resolve_config(&parse(&["grid", "--set", "dddm.threshold=1.5"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        let e = resolve_config(&parse(&["grid", "--set", "nonsense=1"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        assert!(Cli::try_parse_from(["dddm", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["dddm", "grid", "--bogus"]).is_err());
        assert_eq!(exit_code(&Error::Divergence { epoch: 1, loss: f64::NAN }), EXIT_NUMERICAL);
        assert_eq!(
            exit_code(&Error::Truncated { what: "x", needed: 1, available: 0 }),
            EXIT_DATA
        );
    }
}

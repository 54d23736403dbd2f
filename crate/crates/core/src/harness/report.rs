//! Result files and summary statistics.

use std::path::Path;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{CellResult, SweepRow};
use crate::classifier::Network;
use crate::{Error, Result};

/// One row per cell and input set.
pub fn write_cells_csv(path: &Path, cells: &[CellResult], seed: u64) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record([
        "a",
        "b",
        "set",
        "attack",
        "epsilon",
        "acc_undefended",
        "acc_h",
        "acc_H",
        "trial_acc_H",
        "mean_rt",
        "forced_fraction",
        "seed",
        "error",
    ])?;
    for cell in cells {
        if cell.sets.is_empty() {
            let err = cell.error.clone().unwrap_or_default();
            w.write_record([&cell.a.to_string(), &cell.b.to_string(), "", "", "", "", "", "", "", "", "", &seed.to_string(), &err])?;
        }
        for s in &cell.sets {
            w.write_record([
                cell.a.to_string(),
                cell.b.to_string(),
                s.set.clone(),
                s.attack.map_or("none".into(), |k| k.name().to_string()),
                s.epsilon.to_string(),
                s.acc_undefended.to_string(),
                s.acc_h.to_string(),
                s.acc_dddm.to_string(),
                s.trial_acc_dddm.to_string(),
                s.mean_rt.to_string(),
                s.forced_fraction.to_string(),
                seed.to_string(),
                cell.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            what: "csv",
            detail: format!("{other:?}"),
        },
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Build and host facts that can change numerical results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub parallel_feature: bool,
    pub debug_assertions: bool,
}

pub fn fingerprint() -> Fingerprint {
    Fingerprint {
        package: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        os: std::env::consts::OS.into(),
        arch: std::env::consts::ARCH.into(),
        parallel_feature: cfg!(feature = "parallel"),
        debug_assertions: cfg!(debug_assertions),
    }
}

/// Written next to every result set: what ran, with which resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: serde_json::Value,
    pub environment: Fingerprint,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub summary: serde_json::Value,
}

/// Cosine similarity; two zero vectors count as identical, one zero vector as orthogonal.
pub fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let (na, nb) = (a.dot(&a).sqrt(), b.dot(&b).sqrt());
    match (na == 0.0, nb == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    /// 1-based; the last layer is the softmax output.
    pub layer: usize,
    pub cosine_mean: f64,
    pub cosine_std: f64,
    pub l2_mean: f64,
    pub l2_std: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-layer agreement between clean and adversarial hidden outputs.
pub fn layer_sensitivity(net: &Network, clean: ArrayView2<f64>, adv: ArrayView2<f64>) -> Result<Vec<LayerStats>> {
    if clean.dim() != adv.dim() {
        return Err(Error::Dimension {
            expected: clean.nrows(),
            got: adv.nrows(),
        });
    }
    if clean.nrows() == 0 {
        return Err(Error::param("layer sensitivity needs at least one input pair"));
    }
    let layers = net.layers().len();
    let mut cos = vec![Vec::with_capacity(clean.nrows()); layers];
    let mut l2 = vec![Vec::with_capacity(clean.nrows()); layers];
    for (c, a) in clean.rows().into_iter().zip(adv.rows()) {
        let hc = net.hidden_activations(c)?;
        let ha = net.hidden_activations(a)?;
        for (l, (x, y)) in hc.iter().zip(&ha).enumerate() {
            cos[l].push(cosine(x.view(), y.view()));
            l2[l].push((x - y).mapv(|d| d * d).sum().sqrt());
        }
    }
    Ok((0..layers)
        .map(|l| {
            let (cosine_mean, cosine_std) = mean_std(&cos[l]);
            let (l2_mean, l2_std) = mean_std(&l2[l]);
            LayerStats {
                layer: l + 1,
                cosine_mean,
                cosine_std,
                l2_mean,
                l2_std,
            }
        })
        .collect())
}

/// Ranks starting at 1, ties get their average rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = avg;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation; `None` when undefined.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean_std(&rx).0, mean_std(&ry).0);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

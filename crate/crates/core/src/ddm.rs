//! Drift-diffusion simulation.
//!
//! The two-choice model integrates `tau * dX = mu * dt + sigma * dW` from
//! `X(0) = 0` until `X` leaves `(-A, A)`. The race model integrates `n`
//! independent accumulators `y_i` with drift `M_i` and reads out the
//! multi-choice decision variables `X_k = sum_{i<=k} y_i - k * y_{k+1}`.
//!
//! Closed-form first-passage results are provided as oracles for the
//! simulator. They are evaluated with the effective drift `mu / tau` and noise
//! `sigma / tau`, which reduces to the textbook form at `tau = 1`.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{exec, seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdmParams {
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Absorbing bounds at `+threshold` and `-threshold`.
    pub threshold: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Also stop on crossings that happen between grid points, detected with
    /// the Brownian-bridge crossing probability of each step.
    pub bridge_correction: bool,
}

impl Default for DdmParams {
    fn default() -> Self {
        Self::new(0.0, 1.0, 1.0)
    }
}

impl DdmParams {
    /// `tau = 1`, `dt = 1e-3`, horizon of 100 analytic mean response times.
    pub fn new(mu: f64, sigma: f64, threshold: f64) -> Self {
        let mut p = Self {
            mu,
            sigma,
            tau: 1.0,
            threshold,
            dt: 1e-3,
            t_max: 0.0,
            bridge_correction: true,
        };
        p.t_max = p.default_horizon();
        p
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// `100 * mean_rt_analytic`, floored at `100 * dt`.
    pub fn default_horizon(&self) -> f64 {
        (100.0 * mean_rt_analytic(self)).max(100.0 * self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu, self.sigma, self.tau, self.threshold, self.dt, self.t_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("ddm parameters must be finite"));
        }
        if self.sigma <= 0.0 || self.tau <= 0.0 || self.threshold <= 0.0 {
            return Err(Error::param("sigma, tau and threshold must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_max) {
            return Err(Error::param(format!(
                "need 0 < dt ({}) <= t_max ({})",
                self.dt, self.t_max
            )));
        }
        Ok(())
    }

    fn effective(&self) -> (f64, f64) {
        (self.mu / self.tau, self.sigma / self.tau)
    }
}

/// Probability of absorbing at `+A` first: `1 / (1 + exp(-2 mu A / sigma^2))`.
pub fn hit_probability_analytic(params: &DdmParams) -> f64 {
    let (mu, sigma) = params.effective();
    if mu == 0.0 {
        return 0.5;
    }
    1.0 / (1.0 + (-2.0 * mu * params.threshold / (sigma * sigma)).exp())
}

/// Mean first-passage time: `(A / mu) tanh(mu A / sigma^2)`, or `A^2 / sigma^2`
/// at zero drift.
pub fn mean_rt_analytic(params: &DdmParams) -> f64 {
    let (mu, sigma) = params.effective();
    let a = params.threshold;
    if mu == 0.0 {
        return a * a / (sigma * sigma);
    }
    (a / mu) * (mu * a / (sigma * sigma)).tanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Upper,
    Lower,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub choice: Choice,
    /// First-passage time; `None` when the horizon ran out.
    pub rt: Option<f64>,
    /// `(t, X)` samples including `(0, 0)`, when recorded.
    pub path: Option<Vec<(f64, f64)>>,
}

fn integrate<R: Rng>(params: &DdmParams, rng: &mut R, record: bool) -> PathResult {
    let (mu, sigma) = params.effective();
    let a = params.threshold;
    let drift = mu * params.dt;
    let step_sd = sigma * params.dt.sqrt();
    let bridge_scale = 2.0 / (step_sd * step_sd);
    let steps = (params.t_max / params.dt).round().max(1.0) as u64;

    let mut x = 0.0f64;
    let mut path = record.then(|| vec![(0.0, 0.0)]);
    for step in 1..=steps {
        let z: f64 = rng.sample(StandardNormal);
        let next = x + drift + step_sd * z;
        let t = step as f64 * params.dt;
        if let Some(p) = path.as_mut() {
            p.push((t, next));
        }
        let choice = if next >= a {
            Some(Choice::Upper)
        } else if next <= -a {
            Some(Choice::Lower)
        } else if params.bridge_correction {
            // P(max over the step >= A | endpoints) = exp(-2 (A - x0)(A - x1) / s^2)
            let up = bridge_scale * (a - x) * (a - next);
            let down = bridge_scale * (a + x) * (a + next);
            if up < 40.0 || down < 40.0 {
                let p_up = (-up).exp();
                let p_down = (-down).exp();
                let u: f64 = rng.random();
                if u < p_up {
                    Some(Choice::Upper)
                } else if u < p_up + p_down {
                    Some(Choice::Lower)
                } else {
                    None
                }
            } else {
                None
            }
        } else {
            None
        };
        if let Some(choice) = choice {
            return PathResult {
                choice,
                rt: Some(t),
                path,
            };
        }
        x = next;
    }
    PathResult {
        choice: Choice::None,
        rt: None,
        path,
    }
}

/// One Euler-Maruyama path, seeded directly.
pub fn simulate_ddm_path(params: &DdmParams, seed: u64, record: bool) -> Result<PathResult> {
    params.validate()?;
    Ok(integrate(params, &mut seed::rng(seed), record))
}

/// `n` independent paths; path `i` uses ChaCha stream `i` of `seed`.
pub fn simulate_ddm_paths(params: &DdmParams, n: usize, seed: u64) -> Result<Vec<PathResult>> {
    params.validate()?;
    Ok(exec::map_indexed(n, |i| {
        integrate(params, &mut seed::stream_rng(seed, i as u64), false)
    }))
}

/// Monte Carlo summary of a batch of paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdmSummary {
    pub paths: usize,
    pub upper: usize,
    pub lower: usize,
    pub unfinished: usize,
    /// Upper hits over absorbed paths.
    pub upper_fraction: f64,
    pub upper_se: f64,
    pub mean_rt: f64,
    pub rt_se: f64,
}

pub fn summarize(results: &[PathResult]) -> DdmSummary {
    let upper = results.iter().filter(|r| r.choice == Choice::Upper).count();
    let lower = results.iter().filter(|r| r.choice == Choice::Lower).count();
    let absorbed = upper + lower;
    let p = if absorbed > 0 { upper as f64 / absorbed as f64 } else { f64::NAN };
    let rts: Vec<f64> = results.iter().filter_map(|r| r.rt).collect();
    let (mean_rt, rt_se) = mean_and_se(&rts);
    DdmSummary {
        paths: results.len(),
        upper,
        lower,
        unfinished: results.len() - absorbed,
        upper_fraction: p,
        upper_se: (p * (1.0 - p) / absorbed as f64).sqrt(),
        mean_rt,
        rt_se,
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaceParams {
    /// Drift `M_i` of each accumulator.
    pub means: Vec<f64>,
    pub sigma: f64,
    pub dt: f64,
    pub t_max: f64,
}

impl RaceParams {
    pub fn validate(&self) -> Result<()> {
        if self.means.len() < 2 {
            return Err(Error::param("a race needs at least two alternatives"));
        }
        if !(self.sigma > 0.0) || self.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::param("race needs finite means and sigma > 0"));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_max && self.t_max.is_finite()) {
            return Err(Error::param("race needs 0 < dt <= t_max"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }
}

/// Expected slope of each `X_k`: `sum_{i<=k} M_i - k * M_{k+1}`.
pub fn race_drift_analytic(means: &[f64]) -> Vec<f64> {
    (1..means.len())
        .map(|k| means[..k].iter().sum::<f64>() - k as f64 * means[k])
        .collect()
}

/// `X_1 .. X_{n-1}` sampled every `dt`, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceTrajectory {
    pub dt: f64,
    /// `series[k - 1][step]` holds `X_k(step * dt)`.
    pub series: Vec<Vec<f64>>,
}

impl RaceTrajectory {
    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.series[0].is_empty()
    }

    pub fn final_values(&self) -> Vec<f64> {
        self.series.iter().map(|s| *s.last().unwrap()).collect()
    }
}

fn race_with<R: Rng>(params: &RaceParams, rng: &mut R) -> RaceTrajectory {
    let n = params.means.len();
    let steps = params.steps();
    let sd = params.sigma * params.dt.sqrt();
    let mut y = vec![0.0f64; n];
    let mut series = vec![Vec::with_capacity(steps + 1); n - 1];
    for s in series.iter_mut() {
        s.push(0.0);
    }
    for _ in 0..steps {
        for (yi, m) in y.iter_mut().zip(&params.means) {
            let z: f64 = rng.sample(StandardNormal);
            *yi += m * params.dt + sd * z;
        }
        let mut prefix = 0.0;
        for k in 1..n {
            prefix += y[k - 1];
            series[k - 1].push(prefix - k as f64 * y[k]);
        }
    }
    RaceTrajectory {
        dt: params.dt,
        series,
    }
}

pub fn simulate_race(params: &RaceParams, seed: u64) -> Result<RaceTrajectory> {
    params.validate()?;
    Ok(race_with(params, &mut seed::rng(seed)))
}

/// Empirical drift of each `X_k` over `paths` races: mean of
/// `X_k(T) / T` with its standard error.
pub fn estimate_race_drift(params: &RaceParams, paths: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let horizon = params.steps() as f64 * params.dt;
    let finals = exec::map_indexed(paths, |i| {
        race_with(params, &mut seed::stream_rng(seed, i as u64)).final_values()
    });
    Ok((0..params.means.len() - 1)
        .map(|k| {
            let slopes: Vec<f64> = finals.iter().map(|f| f[k] / horizon).collect();
            mean_and_se(&slopes)
        })
        .collect())
}

/// CSV dump with columns `t,X`.
pub fn write_path_csv<W: Write>(out: W, path: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "X"])?;
    for (t, x) in path {
        w.write_record([t.to_string(), x.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// CSV dump with columns `t,X_1,..,X_{n-1}`.
pub fn write_race_csv<W: Write>(out: W, race: &RaceTrajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=race.series.len()).map(|k| format!("X_{k}")));
    w.write_record(&header)?;
    for step in 0..race.len() {
        let mut row = vec![(step as f64 * race.dt).to_string()];
        row.extend(race.series.iter().map(|s| s[step].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

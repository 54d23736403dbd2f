use serde::{Deserialize, Serialize};

use crate::evidence::{argmax, compute_signature, LikelihoodTable, Signature, Trial};
use crate::{Error, Result};

/// Posterior over the `C` hypotheses after `steps` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    posterior: Vec<f64>,
    steps: usize,
}

impl PosteriorState {
    /// Equal priors.
    pub fn uniform(classes: usize) -> Self {
        Self {
            posterior: vec![1.0 / classes as f64; classes],
            steps: 0,
        }
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn leader(&self) -> usize {
        argmax(&self.posterior)
    }

    /// Bayes update with one signature; `self` is untouched on error.
    pub fn update(&self, sig: &Signature, table: &LikelihoodTable) -> Result<Self> {
        let mut next = self.clone();
        next.absorb(sig, table)?;
        Ok(next)
    }

    /// In-place form of [`PosteriorState::update`].
    pub fn absorb(&mut self, sig: &Signature, table: &LikelihoodTable) -> Result<()> {
        if sig.len() != table.k() {
            return Err(Error::param(format!(
                "signature length {} != table k = {}",
                sig.len(),
                table.k()
            )));
        }
        if self.posterior.len() != table.classes() {
            return Err(Error::Dimension {
                expected: table.classes(),
                got: self.posterior.len(),
            });
        }
        self.absorb_likelihoods(table.likelihoods(sig))
            .map_err(|()| Error::DegenerateEvidence {
                signature: sig.to_string(),
            })
    }

    fn absorb_likelihoods(&mut self, lik: &[f64]) -> std::result::Result<(), ()> {
        let total: f64 = self.posterior.iter().zip(lik).map(|(p, l)| p * l).sum();
        if !(total > 0.0) {
            return Err(());
        }
        for (p, l) in self.posterior.iter_mut().zip(lik) {
            *p = *p * l / total;
        }
        self.steps += 1;
        Ok(())
    }
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub winner: usize,
    /// Forward passes absorbed before stopping, in `1..=L`.
    pub rt: usize,
    /// No hypothesis reached the threshold within the trial.
    pub forced: bool,
    pub final_posterior: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<f64>>>,
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.5 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("threshold A = {threshold} outside (0.5, 1)")))
    }
}

/// Absorb signatures (given by universe rank) until the threshold is reached.
pub(crate) fn accumulate_ranks(
    ranks: impl IntoIterator<Item = usize>,
    table: &LikelihoodTable,
    threshold: f64,
    record_trace: bool,
) -> Result<DecisionOutcome> {
    let mut state = PosteriorState::uniform(table.classes());
    let mut trace = record_trace.then(Vec::new);
    for rank in ranks {
        state
            .absorb_likelihoods(table.likelihoods_by_rank(rank))
            .map_err(|()| Error::DegenerateEvidence {
                signature: Signature::unrank(rank, table.classes(), table.k()).to_string(),
            })?;
        if let Some(t) = trace.as_mut() {
            t.push(state.posterior.clone());
        }
        let leader = state.leader();
        if state.posterior[leader] >= threshold {
            return Ok(DecisionOutcome {
                winner: leader,
                rt: state.steps,
                forced: false,
                final_posterior: state.posterior,
                trace,
            });
        }
    }
    if state.steps == 0 {
        return Err(Error::param("cannot accumulate an empty trial"));
    }
    Ok(DecisionOutcome {
        winner: state.leader(),
        rt: state.steps,
        forced: true,
        final_posterior: state.posterior,
        trace,
    })
}

/// Run the accumulator over an explicit signature sequence.
pub fn accumulate<'a>(
    signatures: impl IntoIterator<Item = &'a Signature>,
    table: &LikelihoodTable,
    threshold: f64,
    record_trace: bool,
) -> Result<DecisionOutcome> {
    check_threshold(threshold)?;
    let sigs: Vec<&Signature> = signatures.into_iter().collect();
    if let Some(bad) = sigs.iter().find(|s| s.len() != table.k()) {
        return Err(Error::param(format!(
            "signature {bad} has length {} != k = {}",
            bad.len(),
            table.k()
        )));
    }
    let classes = table.classes();
    accumulate_ranks(sigs.iter().map(|s| s.rank(classes)), table, threshold, record_trace)
}

fn trial_signatures(trial: &Trial, table: &LikelihoodTable) -> Result<Vec<Signature>> {
    if trial.classes() != table.classes() {
        return Err(Error::Dimension {
            expected: table.classes(),
            got: trial.classes(),
        });
    }
    trial
        .rows()
        .iter()
        .map(|row| compute_signature(row, table.k()))
        .collect()
}

/// Decide one trial: stop at the first step where some posterior reaches
/// `threshold`, else force the argmax after the last row.
pub fn run_trial(trial: &Trial, table: &LikelihoodTable, threshold: f64) -> Result<DecisionOutcome> {
    accumulate(&trial_signatures(trial, table)?, table, threshold, false)
}

/// [`run_trial`] keeping the posterior after every absorbed row.
pub fn run_trial_traced(
    trial: &Trial,
    table: &LikelihoodTable,
    threshold: f64,
) -> Result<DecisionOutcome> {
    accumulate(&trial_signatures(trial, table)?, table, threshold, true)
}

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::evidence::accumulator::{accumulate_ranks, check_threshold};
use crate::evidence::{compute_signature, DecisionOutcome, LikelihoodTable, ProbabilityVector, Signature, Trial};
use crate::{seed, Error, Result};

/// Accumulator settings for one input: draw `predictions` stochastic outputs,
/// resample `trials` trials of `trial_length` rows each, decide at `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DddmParams {
    pub k: usize,
    pub smoothing: f64,
    pub predictions: usize,
    pub trials: usize,
    pub trial_length: usize,
    pub threshold: f64,
}

impl Default for DddmParams {
    fn default() -> Self {
        Self {
            k: 3,
            smoothing: 1.0,
            predictions: 100,
            trials: 10,
            trial_length: 25,
            threshold: 0.99,
        }
    }
}

impl DddmParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be >= 1"));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::param("smoothing must be >= 0"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if self.trial_length == 0 || self.trial_length > self.predictions {
            return Err(Error::param(format!(
                "trial length {} outside [1, predictions = {}]",
                self.trial_length, self.predictions
            )));
        }
        check_threshold(self.threshold)
    }
}

/// Row indices for `n_trials` trials of `length` rows drawn from a pool of `n`.
///
/// Within a trial rows are distinct; trials are independent of each other.
/// Trial `t` draws from ChaCha stream `t` of `seed`.
pub fn sample_trial_indices(n: usize, n_trials: usize, length: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if length == 0 || length > n {
        return Err(Error::param(format!("trial length {length} outside [1, pool size {n}]")));
    }
    Ok((0..n_trials)
        .map(|t| {
            let mut rng = seed::stream_rng(seed, t as u64);
            index::sample(&mut rng, n, length).into_vec()
        })
        .collect())
}

/// Materialize trials from a prediction pool.
pub fn sample_trials(
    pool: &[ProbabilityVector],
    n_trials: usize,
    length: usize,
    seed: u64,
) -> Result<Vec<Trial>> {
    sample_trial_indices(pool.len(), n_trials, length, seed)?
        .into_iter()
        .map(|idx| Trial::new(idx.into_iter().map(|i| pool[i].clone()).collect()))
        .collect()
}

/// Combined verdict of several trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub winner: usize,
    pub mean_rt: f64,
}

/// Majority vote over trial winners.
///
/// Vote ties go to the label with the larger summed final posterior, then to
/// the lower index.
pub fn aggregate_trials(outcomes: &[DecisionOutcome]) -> Result<Aggregate> {
    let first = outcomes
        .first()
        .ok_or_else(|| Error::param("cannot aggregate zero trials"))?;
    let classes = first.final_posterior.len();
    let mut votes = vec![0usize; classes];
    let mut mass = vec![0.0f64; classes];
    for o in outcomes {
        if o.final_posterior.len() != classes || o.winner >= classes {
            return Err(Error::Dimension {
                expected: classes,
                got: o.final_posterior.len(),
            });
        }
        votes[o.winner] += 1;
        for (m, p) in mass.iter_mut().zip(&o.final_posterior) {
            *m += p;
        }
    }
    let mut winner = 0;
    for c in 1..classes {
        if votes[c] > votes[winner] || (votes[c] == votes[winner] && mass[c] > mass[winner]) {
            winner = c;
        }
    }
    let mean_rt = outcomes.iter().map(|o| o.rt as f64).sum::<f64>() / outcomes.len() as f64;
    Ok(Aggregate { winner, mean_rt })
}

/// Verdict for one input: the aggregate plus every trial outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub winner: usize,
    pub mean_rt: f64,
    pub outcomes: Vec<DecisionOutcome>,
}

impl Decision {
    /// Fraction of trials whose own winner is `label`.
    pub fn trial_accuracy(&self, label: usize) -> f64 {
        let hits = self.outcomes.iter().filter(|o| o.winner == label).count();
        hits as f64 / self.outcomes.len() as f64
    }
}

/// Full accumulator pass for one input's prediction pool.
pub fn decide(
    pool: &[ProbabilityVector],
    table: &LikelihoodTable,
    params: &DddmParams,
    seed: u64,
) -> Result<Decision> {
    if let Some(p) = pool.iter().find(|p| p.classes() != table.classes()) {
        return Err(Error::Dimension {
            expected: table.classes(),
            got: p.classes(),
        });
    }
    let sigs = pool
        .iter()
        .map(|p| compute_signature(p, table.k()))
        .collect::<Result<Vec<_>>>()?;
    decide_signatures(&sigs, table, params, seed)
}

/// [`decide`] on precomputed signatures.
pub fn decide_signatures(
    pool: &[Signature],
    table: &LikelihoodTable,
    params: &DddmParams,
    seed: u64,
) -> Result<Decision> {
    check_threshold(params.threshold)?;
    if params.trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    if let Some(s) = pool.iter().find(|s| s.len() != table.k()) {
        return Err(Error::param(format!("signature {s} does not match table k = {}", table.k())));
    }
    let ranks: Vec<usize> = pool.iter().map(|s| s.rank(table.classes())).collect();
    let outcomes = sample_trial_indices(pool.len(), params.trials, params.trial_length, seed)?
        .into_iter()
        .map(|idx| accumulate_ranks(idx.into_iter().map(|i| ranks[i]), table, params.threshold, false))
        .collect::<Result<Vec<_>>>()?;
    let agg = aggregate_trials(&outcomes)?;
    Ok(Decision {
        winner: agg.winner,
        mean_rt: agg.mean_rt,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::LikelihoodTableBuilder;

    fn outcome(winner: usize, rt: usize, post: &[f64]) -> DecisionOutcome {
        DecisionOutcome {
            winner,
            rt,
            forced: false,
            final_posterior: post.to_vec(),
            trace: None,
        }
    }

    #[test]
    fn documented_defaults() {
        let p = DddmParams::default();
        assert_eq!((p.k, p.predictions, p.trials, p.trial_length), (3, 100, 10, 25));
        assert_eq!(p.threshold, 0.99);
        assert!(p.validate().is_ok());
        assert!(DddmParams { trial_length: 101, ..p.clone() }.validate().is_err());
        assert!(DddmParams { threshold: 0.5, ..p }.validate().is_err());
    }

    #[test]
    fn exhaustive_trial_is_permutation() {
        let idx = sample_trial_indices(100, 1, 100, 9).unwrap();
        let mut sorted = idx[0].clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn trials_distinct_within_and_seeded() {
        let a = sample_trial_indices(100, 10, 25, 42).unwrap();
        let b = sample_trial_indices(100, 10, 25, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_trial_indices(100, 10, 25, 43).unwrap());
        for t in &a {
            let mut s = t.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 25);
        }
        assert_ne!(a[0], a[1]);
        assert!(sample_trial_indices(10, 1, 11, 0).is_err());
        assert!(sample_trial_indices(10, 1, 0, 0).is_err());
    }

    #[test]
    fn sample_trials_uses_pool_rows() {
        let pool: Vec<ProbabilityVector> = (0..5)
            .map(|i| {
                let p = 0.5 + 0.1 * i as f64;
                ProbabilityVector::new(vec![p, 1.0 - p]).unwrap()
            })
            .collect();
        let trials = sample_trials(&pool, 3, 5, 1).unwrap();
        let idx = sample_trial_indices(5, 3, 5, 1).unwrap();
        for (trial, ix) in trials.iter().zip(&idx) {
            for (row, &i) in trial.rows().iter().zip(ix) {
                assert_eq!(row, &pool[i]);
            }
        }
    }

    #[test]
    fn unanimous_aggregate() {
        let mut post = vec![0.0; 10];
        post[7] = 1.0;
        let outs: Vec<_> = (0..10).map(|_| outcome(7, 1, &post)).collect();
        assert_eq!(aggregate_trials(&outs).unwrap(), Aggregate { winner: 7, mean_rt: 1.0 });
    }

    #[test]
    fn vote_tie_uses_posterior_mass() {
        // 5 votes each; summed final posterior 4.2 for class 0 vs 3.9 for class 1
        let mut outs = Vec::new();
        for _ in 0..5 {
            outs.push(outcome(0, 2, &[0.84, 0.06, 0.10]));
            outs.push(outcome(1, 4, &[0.0, 0.72, 0.28]));
        }
        let mass = |c: usize| outs.iter().map(|o| o.final_posterior[c]).sum::<f64>();
        assert!((mass(0) - 4.2).abs() < 1e-12 && (mass(1) - 3.9).abs() < 1e-12);
        let agg = aggregate_trials(&outs).unwrap();
        assert_eq!(agg.winner, 0);
        assert_eq!(agg.mean_rt, 3.0);

        // equal votes and mass fall back to the lower index
        let even = vec![outcome(1, 1, &[0.5, 0.5]), outcome(0, 1, &[0.5, 0.5])];
        assert_eq!(aggregate_trials(&even).unwrap().winner, 0);
    }

    #[test]
    fn mixed_votes_match_enumeration() {
        let winners = [2, 1, 2, 0, 1, 2, 3, 1, 2, 0];
        let outs: Vec<_> = winners
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let mut p = vec![0.05; 4];
                p[w] = 0.85;
                outcome(w, i + 1, &p)
            })
            .collect();
        let mut counts = [0; 4];
        for w in winners {
            counts[w] += 1;
        }
        let expect = (0..4).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap();
        let agg = aggregate_trials(&outs).unwrap();
        assert_eq!(agg.winner, expect);
        assert_eq!(agg.mean_rt, 5.5);
        assert!(aggregate_trials(&[]).is_err());
    }

    #[test]
    fn decide_is_seeded() {
        let mut b = LikelihoodTableBuilder::new(2, 1).unwrap();
        for (label, n0, n1) in [(0usize, 7, 3), (1, 3, 7)] {
            for _ in 0..n0 {
                b.observe(&Signature::new(vec![0], 2).unwrap(), label).unwrap();
            }
            for _ in 0..n1 {
                b.observe(&Signature::new(vec![1], 2).unwrap(), label).unwrap();
            }
        }
        let table = b.build(0.0).unwrap();
        let pool: Vec<ProbabilityVector> = (0..100)
            .map(|i| {
                let top = if i % 10 < 7 { 0.8 } else { 0.2 };
                ProbabilityVector::new(vec![top, 1.0 - top]).unwrap()
            })
            .collect();
        let params = DddmParams { k: 1, ..DddmParams::default() };
        let d1 = decide(&pool, &table, &params, 5).unwrap();
        let d2 = decide(&pool, &table, &params, 5).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1.outcomes.len(), 10);
        assert_eq!(d1.winner, 0);
        assert!(d1.mean_rt >= 1.0 && d1.mean_rt <= 25.0);
    }
}

//! Sequential Bayesian evidence accumulation over classifier outputs.
//!
//! Each stochastic forward pass yields a [`ProbabilityVector`]. It is reduced
//! to a discrete [`Signature`] (its top-k labels in confidence order) whose
//! class-conditional frequency was tabulated on clean training predictions
//! ([`LikelihoodTable`]). A [`PosteriorState`] starts at equal priors and is
//! multiplied by the signature likelihood after every pass; a trial stops as
//! soon as one hypothesis reaches the threshold `A`, or is forced to the
//! argmax after `L` passes.

mod accumulator;
mod probability;
mod signature;
mod table;
mod trials;

pub use accumulator::{accumulate, run_trial, run_trial_traced, DecisionOutcome, PosteriorState};
pub use probability::{argmax, ProbabilityVector, Trial, SUM_TOLERANCE};
pub use signature::{compute_signature, Signature};
pub use table::{build_likelihood_table, LikelihoodTable, LikelihoodTableBuilder};
pub use trials::{
    aggregate_trials, decide, decide_signatures, sample_trial_indices, sample_trials, Aggregate,
    DddmParams, Decision,
};

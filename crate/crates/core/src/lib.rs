//! Dropout-based drift-diffusion classification.
//!
//! A network run with dropout left on at inference time becomes a stream of
//! noisy probability vectors. This crate turns those streams into
//! threshold-gated decisions with a sequential Bayesian accumulator, and
//! provides the surrounding machinery to train the networks, attack them, and
//! measure how much accumulation buys back under attack.
//!
//! Module map:
//!
//! - [`evidence`]: signatures, likelihood tables, the posterior accumulator,
//!   trial sampling and multi-trial aggregation.
//! - [`ddm`]: drift-diffusion and race simulations with closed-form oracles.
//! - [`classifier`]: a small dense network with train/test dropout rates.
//! - [`attacks`]: FGSM, PGD, repeated uniform noise, salt-and-pepper.
//! - [`dataio`]: IDX parsing, synthetic blobs, splits and dataset containers.
//! - [`harness`]: the experiment protocol (grid, sweeps, layer diagnostics).
//! - [`cli`]: config resolution and subcommand dispatch for the `dddm` binary.

pub mod attacks;
pub mod classifier;
pub mod cli;
pub mod dataio;
pub mod ddm;
pub mod error;
pub mod evidence;
pub mod exec;
pub mod harness;
pub mod seed;

pub use error::{Error, Result};

//! Causal analysis of speech recognition errors on child speech: WER
//! alignment, inferred covariates, discretization, discrete Bayesian
//! network fitting, ACE/CMI edge strengths and a synthetic SCM harness.

pub mod alignment;
pub mod causal;
pub mod cli;
pub mod covariates;
pub mod discretize;
pub mod error;
pub mod ingest;
pub mod synthetic;

pub use error::{Error, Result};

//! Unsupervised training of small feed-forward networks that map the
//! parameters of a constrained optimization problem to a near-optimal
//! decision vector.
//!
//! The loss of every training sample is the problem objective plus a
//! piece-wise penalty on constraint violations, so no labelled solutions
//! are needed. A per-instance numerical solver scores and times the
//! learned mapping.

pub mod cli;
pub mod error;
pub mod harness;
pub mod model_io;
pub mod nn;
pub mod oracle;
pub mod penalty;
pub mod problems;
pub mod trainer;

pub use error::{Error, Result};

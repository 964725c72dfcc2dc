//! Non-clairvoyant preemptive scheduling with untrusted permutation predictions.
//!
//! The crate provides:
//! - domain types for instances, machine environments, predictions and schedules ([`model`]),
//! - an event-driven rate-based simulation engine ([`simulator`]),
//! - the scheduling policies: WRR, WDEQ, Proportional Fairness, prediction-clairvoyant
//!   WSPT / P-WSPT / MinIncrease P-WSPT, and the Preferential Time Sharing combiner
//!   ([`algorithms`]),
//! - prediction-error measures and the dual-fitting verifier ([`errors`]),
//! - prediction generation and the ERM permutation learner ([`learn`]),
//! - the experiment harness with instance generators, CSV/SVG emission and the
//!   verification suites ([`experiments`]).

pub mod algorithms;
pub mod errors;
pub mod experiments;
pub mod learn;
pub mod model;
pub mod simulator;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid prediction: {0}")]
    InvalidPrediction(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("infeasible rates at t={time}: {reason}")]
    InfeasibleRates { time: f64, reason: String },
    #[error("no progress at t={0}: zero total rate with released unfinished jobs")]
    NoProgress(f64),
    #[error("missing completion time for job {0}")]
    MissingCompletion(usize),
    #[error("solver did not converge: {0}")]
    SolverNoConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Exact inference for causal networks under two interchangeable calculi:
//! point probability (sum-product) and kappa ranking (min-plus), together
//! with an order-of-magnitude translator between them, a fault-diagnosis
//! harness, and closed-form evaluators for chain and fork structures.

pub mod abstraction;
pub mod analytic;
pub mod cli;
pub mod diagnosis;
pub mod format;
pub mod infer;
pub mod model;

use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// The evidence has probability zero (or rank infinity); conditioning
    /// is undefined.
    #[error("impossible evidence: {0}")]
    ImpossibleEvidence(String),

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("variable '{var}' has no value '{value}'")]
    UnknownValue { var: String, value: String },

    #[error("target variable '{0}' is observed in the evidence")]
    TargetObserved(String),

    #[error("assignment does not cover variable '{0}'")]
    IncompleteAssignment(String),

    #[error("elimination order is not a permutation of the eliminable variables: {0}")]
    BadEliminationOrder(String),

    #[error("epsilon {0} is not strictly between 0 and 1")]
    BadEpsilon(f64),

    #[error("{0}")]
    Contract(String),

    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<model::Violation>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("fault sets differ between the two rankings")]
    MismatchedFaultSets,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

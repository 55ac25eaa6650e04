//! Ensemble sizing from vote-space linear independence.
//!
//! The probability that an ensemble's votes span the whole class space is
//! its *probability of linear independence* (PLI). This crate computes it
//! exactly, estimates the per-dimension dependence profile it depends on
//! from observed votes, and evaluates streaming ensembles against it.

pub mod error;
pub mod estimator;
pub mod eval;
pub mod linalg;
pub mod pli;
pub mod stream;
pub mod synth;
pub mod votes;

pub use error::{Error, Result};
pub use estimator::{estimate_p, DependenceEstimator, EstimationReport, RankCounters};
pub use pli::{
    pli_enumeration_oracle, pli_exact, pli_monte_carlo, pli_uniform, solve_inc, solve_sinc,
    DependenceProfile, EnsembleSize, Enumeration, MonteCarloEstimate, PliCurve, SizingRequest,
};
pub use synth::BranchingVotes;
pub use votes::{
    argmax, combine_votes, exact_weights, normalize_vote, IdealVector, VoteMatrix, VoteVector,
    WeightVector,
};

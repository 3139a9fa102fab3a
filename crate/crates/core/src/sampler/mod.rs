//! The backfitting Gibbs sampler: conjugate leaf statistics, grow/prune
//! Metropolis-Hastings moves, σ and probit latent updates, chains and
//! prediction.

mod chain;
mod leaf;
mod moves;
mod oracle;
mod state;
mod truncnorm;

pub use chain::{
    ensemble_value, posterior_mean, predict, predict_ensembles, probit_offset, run_chain,
    sigma_prior_lambda, ChainConfig, PosteriorSamples, Prediction,
};
pub use leaf::{draw_jump, leaf_log_marginal, LeafStats};
pub use moves::{grow_log_accept, prune_log_accept, MoveParams};
pub use oracle::{integrate, leaf_log_evidence, quadrature_marginal_oracle};
pub use state::{AuditLog, EnsembleState, MoveCounts};
pub use truncnorm::{std_normal_above, truncated_unit_normal};

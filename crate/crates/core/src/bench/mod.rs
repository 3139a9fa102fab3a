//! Synthetic benchmarks: data-generating processes, error metrics, the
//! oracle baseline and replicated method comparisons.

mod dgp;
mod metrics;
mod runner;

pub use dgp::{
    eval_basis, eval_mu, eval_network_fn, generate, grid_constants, grid_weights, mean_function,
    network_g0, network_g1, oracle_blocks, simulate, DgpId, DgpSpec, Sample, Simulation,
    GRID_NETWORK, IMBALANCED_LEVEL_PROBS, LEVEL_COLUMN, VERTEX_COLUMN,
};
pub use metrics::{classification_metrics, mse, regression_metrics, MetricsReport, LOG_LOSS_EPS};
pub use runner::{
    baseline_method, method_predict, oracle_predict, parse_methods, run_comparison, run_oracle,
    write_comparison, BenchConfig, Comparison, ComparisonSummary, FoldResult, Method, MethodSummary,
};

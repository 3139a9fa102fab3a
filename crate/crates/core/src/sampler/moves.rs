use serde::{Deserialize, Serialize};

use super::leaf::{leaf_log_marginal, LeafStats};
use crate::prior::PriorConfig;
use crate::tree::{depth, RegressionTree};

/// Constants entering the grow/prune acceptance ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveParams {
    pub alpha: f64,
    pub beta: f64,
    pub tau_leaf: f64,
    pub mu0: f64,
    /// Probability of attempting a grow move at a tree with more than one leaf.
    pub q_grow: f64,
    /// Children smaller than this force rejection; 0 disables the check.
    pub min_leaf_size: usize,
}

impl MoveParams {
    pub fn new(prior: &PriorConfig, q_grow: f64, min_leaf_size: usize) -> MoveParams {
        MoveParams {
            alpha: prior.alpha,
            beta: prior.beta,
            tau_leaf: prior.tau_leaf(),
            mu0: prior.mu0,
            q_grow,
            min_leaf_size,
        }
    }

    fn split_prob(&self, d: u32) -> f64 {
        self.alpha * (1.0 + d as f64).powf(-self.beta)
    }

    /// Probability of attempting grow at a tree with `n_leaves` leaves.
    pub fn grow_prob(&self, n_leaves: usize) -> f64 {
        if n_leaves == 1 {
            1.0
        } else {
            self.q_grow
        }
    }

    pub fn prune_prob(&self, n_leaves: usize) -> f64 {
        1.0 - self.grow_prob(n_leaves)
    }

    /// Log prior ratio for giving the depth-`d` leaf two leaf children.
    fn log_prior_split(&self, d: u32) -> f64 {
        let p = self.split_prob(d);
        let pc = self.split_prob(d + 1);
        p.ln() + 2.0 * (1.0 - pc).ln() - (1.0 - p).ln()
    }

    fn log_lik_split(&self, parent: &LeafStats, left: &LeafStats, right: &LeafStats) -> f64 {
        leaf_log_marginal(left, self.tau_leaf, self.mu0) + leaf_log_marginal(right, self.tau_leaf, self.mu0)
            - leaf_log_marginal(parent, self.tau_leaf, self.mu0)
    }

    fn violates_min_leaf(&self, left: &LeafStats, right: &LeafStats) -> bool {
        self.min_leaf_size > 0 && (left.count < self.min_leaf_size || right.count < self.min_leaf_size)
    }
}

fn sibling(id: u64) -> u64 {
    id ^ 1
}

/// Log MH ratio for splitting leaf `leaf` of `t` into children with
/// statistics `left` and `right`; `parent` holds the leaf's own statistics.
/// The rule is assumed drawn from its prior, so its density cancels.
pub fn grow_log_accept(
    t: &RegressionTree,
    leaf: u64,
    parent: &LeafStats,
    left: &LeafStats,
    right: &LeafStats,
    mp: &MoveParams,
) -> f64 {
    if mp.violates_min_leaf(left, right) {
        return f64::NEG_INFINITY;
    }
    let n_leaf = t.n_leaves();
    let mut n_nog_star = t.nog_ids().len() + 1;
    if leaf != 1 && t.is_leaf(sibling(leaf)) {
        n_nog_star -= 1;
    }
    let transition = (mp.prune_prob(n_leaf + 1) / n_nog_star as f64).ln()
        - (mp.grow_prob(n_leaf) / n_leaf as f64).ln();
    transition + mp.log_prior_split(depth(leaf)) + mp.log_lik_split(parent, left, right)
}

/// Log MH ratio for collapsing no-grandchild node `nog` of `t`; `left` and
/// `right` are its children's statistics and `merged` their union.
pub fn prune_log_accept(
    t: &RegressionTree,
    nog: u64,
    merged: &LeafStats,
    left: &LeafStats,
    right: &LeafStats,
    mp: &MoveParams,
) -> f64 {
    let n_leaf = t.n_leaves();
    let n_nog = t.nog_ids().len();
    let n_leaf_star = n_leaf - 1;
    let transition = (mp.grow_prob(n_leaf_star) / n_leaf_star as f64).ln()
        - (mp.prune_prob(n_leaf) / n_nog as f64).ln();
    transition - mp.log_prior_split(depth(nog)) - mp.log_lik_split(merged, left, right)
}

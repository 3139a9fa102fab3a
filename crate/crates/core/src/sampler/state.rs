use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use super::leaf::{draw_jump, LeafStats};
use super::moves::{grow_log_accept, prune_log_accept, MoveParams};
use super::truncnorm::truncated_unit_normal;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::prior::draw_rule;
use crate::tree::{left_child, right_child, FeatureSpace, RegressionTree, SuffStatMap};

/// Proposal and acceptance counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounts {
    pub grow_proposed: u64,
    pub grow_accepted: u64,
    /// Grow proposals abandoned because no rule could be drawn.
    pub grow_no_rule: u64,
    pub prune_proposed: u64,
    pub prune_accepted: u64,
}

/// Bookkeeping checks recorded when auditing is switched on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    /// Per iteration: `max_i |allfit_i - Σ_m g_m(x_i)|`.
    pub allfit_deviation: Vec<f64>,
    /// Per iteration: `max_i |residual_i - (target_i - allfit_i)|`.
    pub residual_deviation: Vec<f64>,
    /// Accepted moves at which the incremental leaf map was compared with a
    /// rebuilt one.
    pub ssm_checks: u64,
    pub ssm_mismatches: u64,
}

/// Mutable state of one chain, on the standardized outcome scale.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    pub trees: Vec<RegressionTree>,
    pub ssms: Vec<SuffStatMap>,
    /// Running fit `Σ_m g_m(x_i)`.
    pub allfit: Vec<f64>,
    /// `target - allfit`.
    pub residual: Vec<f64>,
    /// The outcome being fitted (standardized `y`, or latent probit values).
    pub target: Vec<f64>,
    pub sigma: f64,
    pub iteration: usize,
}

impl EnsembleState {
    /// `m` root-only trees with zero jumps.
    pub fn new(target: Vec<f64>, m: usize, sigma: f64) -> EnsembleState {
        let n = target.len();
        EnsembleState {
            trees: vec![RegressionTree::root_only(0.0); m],
            ssms: vec![SuffStatMap::root(n); m],
            allfit: vec![0.0; n],
            residual: target.clone(),
            target,
            sigma,
            iteration: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn set_target(&mut self, target: Vec<f64>) {
        self.residual = target.iter().zip(&self.allfit).map(|(t, f)| t - f).collect();
        self.target = target;
    }

    fn add_tree_fit(&mut self, m: usize, sign: f64) {
        let tree = &self.trees[m];
        for (leaf, idx) in self.ssms[m].iter() {
            let mu = sign * tree.node(leaf).expect("leaf map matches tree").jump;
            for &i in idx {
                self.allfit[i] += mu;
                self.residual[i] -= mu;
            }
        }
    }

    fn stats(&self, idx: &[usize], mp: &MoveParams) -> LeafStats {
        LeafStats::from_residuals(idx, &self.residual, self.sigma, mp.tau_leaf, mp.mu0)
    }

    /// One grow/prune step for tree `m`, then fresh jumps from their
    /// conditional posterior.
    #[allow(clippy::too_many_arguments)]
    pub fn update_tree<R: Rng + ?Sized>(
        &mut self,
        m: usize,
        data: &Dataset,
        fs: &FeatureSpace,
        mp: &MoveParams,
        rng: &mut R,
        counts: &mut MoveCounts,
        audit: Option<&mut AuditLog>,
    ) -> Result<()> {
        self.add_tree_fit(m, -1.0);

        let n_leaves = self.trees[m].n_leaves();
        let grow = n_leaves == 1 || rng.random::<f64>() < mp.q_grow;
        let mut accepted = false;
        if grow {
            counts.grow_proposed += 1;
            let leaves = self.trees[m].leaf_ids();
            let leaf = leaves[rng.random_range(0..leaves.len())];
            match draw_rule(&self.trees[m], leaf, fs, rng) {
                Ok(rule) => {
                    let (li, ri) = self.ssms[m].route(leaf, &rule, data)?;
                    let parent = self.stats(self.ssms[m].get(leaf), mp);
                    let left = self.stats(&li, mp);
                    let right = self.stats(&ri, mp);
                    let log_a = grow_log_accept(&self.trees[m], leaf, &parent, &left, &right, mp);
                    if rng.random::<f64>().ln() < log_a {
                        self.trees[m].grow(leaf, rule, fs)?;
                        self.ssms[m].apply_birth(leaf, li, ri);
                        counts.grow_accepted += 1;
                        accepted = true;
                    }
                }
                Err(Error::NoValidRule { .. }) => counts.grow_no_rule += 1,
                Err(e) => return Err(e),
            }
        } else {
            counts.prune_proposed += 1;
            let nogs = self.trees[m].nog_ids();
            let nog = nogs[rng.random_range(0..nogs.len())];
            let left = self.stats(self.ssms[m].get(left_child(nog)), mp);
            let right = self.stats(self.ssms[m].get(right_child(nog)), mp);
            let merged = LeafStats::merge(&left, &right, self.sigma, mp.tau_leaf, mp.mu0);
            let log_a = prune_log_accept(&self.trees[m], nog, &merged, &left, &right, mp);
            if rng.random::<f64>().ln() < log_a {
                self.trees[m].prune(nog)?;
                self.ssms[m].apply_death(nog);
                counts.prune_accepted += 1;
                accepted = true;
            }
        }

        if accepted {
            if let Some(audit) = audit {
                audit.ssm_checks += 1;
                if SuffStatMap::from_tree(&self.trees[m], data)? != self.ssms[m] {
                    audit.ssm_mismatches += 1;
                }
            }
        }

        for leaf in self.trees[m].leaf_ids() {
            let s = self.stats(self.ssms[m].get(leaf), mp);
            let mu = draw_jump(&s, rng);
            self.trees[m].set_jump(leaf, mu);
        }

        self.add_tree_fit(m, 1.0);
        Ok(())
    }

    /// Draws σ² from its scaled inverse-chi-square full conditional.
    pub fn update_sigma<R: Rng + ?Sized>(&mut self, nu: f64, lambda: f64, rng: &mut R) {
        let ssr: f64 = self.residual.iter().map(|r| r * r).sum();
        let chi = ChiSquared::new(nu + self.n() as f64).expect("degrees of freedom are positive");
        let x: f64 = chi.sample(rng);
        self.sigma = ((nu * lambda + ssr) / x).sqrt();
    }

    /// Redraws latent probit outcomes `z_i ~ N(offset + allfit_i, 1)`
    /// truncated to the side given by `y_i`; the target becomes `z - offset`.
    pub fn probit_augment<R: Rng + ?Sized>(&mut self, y: &[f64], offset: f64, rng: &mut R) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::Invalid("outcome length does not match the state".into()));
        }
        for i in 0..self.n() {
            let positive = match y[i] {
                v if v == 1.0 => true,
                v if v == 0.0 => false,
                v => return Err(Error::Invalid(format!("probit outcome {v} is not 0 or 1"))),
            };
            let z = truncated_unit_normal(offset + self.allfit[i], positive, rng);
            self.target[i] = z - offset;
            self.residual[i] = self.target[i] - self.allfit[i];
        }
        Ok(())
    }

    /// Largest gaps between the running vectors and a from-scratch
    /// evaluation of every tree.
    pub fn conservation_error(&self, data: &Dataset) -> Result<(f64, f64)> {
        let mut fit_dev: f64 = 0.0;
        let mut res_dev: f64 = 0.0;
        for i in 0..self.n() {
            let row = data.row(i);
            let mut f = 0.0;
            for t in &self.trees {
                f += t.evaluate(&row)?;
            }
            fit_dev = fit_dev.max((self.allfit[i] - f).abs());
            res_dev = res_dev.max((self.residual[i] - (self.target[i] - self.allfit[i])).abs());
        }
        Ok((fit_dev, res_dev))
    }
}

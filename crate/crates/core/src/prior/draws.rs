use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::split_network;
use crate::tree::{
    depth, left_child, right_child, Available, DecisionRule, FeatureSpace, LevelSet,
    RegressionTree, Var, MAX_DEPTH,
};

/// Hyperparameters of the sum-of-trees prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    /// Number of trees `M`.
    pub n_trees: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Prior sd of `f(x)`; each leaf jump has sd `tau_total / sqrt(M)`.
    pub tau_total: f64,
    pub mu0: f64,
    /// Degrees of freedom of the scaled inverse-chi-square prior on σ².
    pub nu: f64,
    /// Scale of the σ² prior; `None` calibrates it from the data so that
    /// `P(σ < sd(y)) = sigma_quantile`.
    pub lambda: Option<f64>,
    pub sigma_quantile: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            n_trees: 200,
            alpha: 0.95,
            beta: 2.0,
            tau_total: 0.25,
            mu0: 0.0,
            nu: 3.0,
            lambda: None,
            sigma_quantile: 0.9,
        }
    }
}

impl PriorConfig {
    /// Defaults for probit fits, where `f` lives on the latent scale:
    /// `tau_total = 1.5`, so `Φ(f)` covers most of (0.05, 0.95) a priori.
    pub fn probit() -> PriorConfig {
        PriorConfig {
            tau_total: 1.5,
            ..PriorConfig::default()
        }
    }

    pub fn tau_leaf(&self) -> f64 {
        self.tau_total / (self.n_trees as f64).sqrt()
    }

    /// Probability that a node at depth `d` has children.
    pub fn split_probability(&self, d: u32) -> f64 {
        self.alpha * (1.0 + d as f64).powf(-self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_trees == 0 {
            return bad("the ensemble needs at least one tree");
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in [0, 1)");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be non-negative");
        }
        if !(self.tau_total > 0.0) || !self.tau_total.is_finite() {
            return bad("tau_total must be positive");
        }
        if !self.mu0.is_finite() {
            return bad("mu0 must be finite");
        }
        if !(self.nu > 0.0) {
            return bad("nu must be positive");
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return bad("lambda must be positive");
            }
        }
        if !(self.sigma_quantile > 0.0 && self.sigma_quantile < 1.0) {
            return bad("sigma_quantile must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Branching-process draw of a tree shape: a node at depth `d` splits with
/// probability `alpha (1 + d)^-beta`. Returns the node labels.
pub fn draw_tree_structure<R: Rng + ?Sized>(cfg: &PriorConfig, rng: &mut R) -> BTreeSet<u64> {
    'redraw: loop {
        let mut ids = BTreeSet::new();
        let mut stack = vec![1u64];
        while let Some(id) = stack.pop() {
            ids.insert(id);
            let d = depth(id);
            if rng.random::<f64>() < cfg.split_probability(d) {
                if d >= MAX_DEPTH {
                    continue 'redraw;
                }
                stack.push(right_child(id));
                stack.push(left_child(id));
            }
        }
        return ids;
    }
}

fn continuous_cut<R: Rng + ?Sized>(
    fs: &FeatureSpace,
    j: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Option<f64> {
    let f = &fs.cont[j];
    if f.degenerate || !(hi > lo) {
        return None;
    }
    match &f.grid {
        None => Some(lo + (hi - lo) * rng.random::<f64>()),
        Some(grid) => {
            let inside: Vec<f64> = grid.iter().copied().filter(|&g| g > lo && g < hi).collect();
            if inside.is_empty() {
                None
            } else {
                Some(inside[rng.random_range(0..inside.len())])
            }
        }
    }
}

fn continuous_eligible(fs: &FeatureSpace, j: usize, lo: f64, hi: f64) -> bool {
    let f = &fs.cont[j];
    if f.degenerate || !(hi > lo) {
        return false;
    }
    match &f.grid {
        None => true,
        Some(grid) => grid.iter().any(|&g| g > lo && g < hi),
    }
}

/// Predictors that can still be split at `node`.
pub fn eligible_vars(t: &RegressionTree, node: u64, fs: &FeatureSpace) -> Vec<(Var, Available)> {
    let mut out = Vec::new();
    for j in 0..fs.p_cont() {
        let var = Var::Cont(j);
        if let Available::Interval { lo, hi } = t.available_set(node, var, fs) {
            if continuous_eligible(fs, j, lo, hi) {
                out.push((var, Available::Interval { lo, hi }));
            }
        }
    }
    for j in 0..fs.p_cat() {
        let var = Var::Cat(j);
        let avail = t.available_set(node, var, fs);
        if let Available::Levels(set) = &avail {
            if set.len() >= 2 {
                out.push((var, avail));
            }
        }
    }
    out
}

/// Uniform draw over the non-trivial subsets of `avail` (each level left
/// with probability 1/2, redrawn until both sides are non-empty).
pub fn uniform_subset<R: Rng + ?Sized>(avail: &LevelSet, rng: &mut R) -> (LevelSet, LevelSet) {
    let levels = avail.to_vec();
    debug_assert!(levels.len() >= 2);
    loop {
        let mut left = LevelSet::new();
        let mut right = LevelSet::new();
        for &l in &levels {
            if rng.random::<bool>() {
                left.insert(l);
            } else {
                right.insert(l);
            }
        }
        if !left.is_empty() && !right.is_empty() {
            return (left, right);
        }
    }
}

/// Draws a decision rule for `node` from the prior: a predictor uniformly
/// among those still splittable there, then a cutpoint or level subset.
pub fn draw_rule<R: Rng + ?Sized>(
    t: &RegressionTree,
    node: u64,
    fs: &FeatureSpace,
    rng: &mut R,
) -> Result<DecisionRule> {
    let eligible = eligible_vars(t, node, fs);
    if eligible.is_empty() {
        return Err(Error::NoValidRule { node });
    }
    let (var, avail) = &eligible[rng.random_range(0..eligible.len())];
    match (var, avail) {
        (Var::Cont(j), Available::Interval { lo, hi }) => {
            let cut = continuous_cut(fs, *j, *lo, *hi, rng).ok_or(Error::NoValidRule { node })?;
            Ok(DecisionRule::Continuous { var: *j, cut })
        }
        (Var::Cat(j), Available::Levels(set)) => {
            let (left, right) = match fs.cat[*j].split_network() {
                None => uniform_subset(set, rng),
                Some(g) => {
                    let members = set.to_vec();
                    let (sub, back) = g.induced_by_index(&members)?;
                    if !sub.is_connected() {
                        return Err(Error::NoValidRule { node });
                    }
                    let part = split_network(fs.cat[*j].strategy, &sub, rng)?;
                    (
                        LevelSet::from_indices(part.left.iter().map(|&v| back[v])),
                        LevelSet::from_indices(part.right.iter().map(|&v| back[v])),
                    )
                }
            };
            Ok(DecisionRule::Categorical {
                var: *j,
                left,
                right,
            })
        }
        _ => unreachable!("availability kind always matches the variable kind"),
    }
}

/// Sets every leaf jump to an independent `N(mu0, tau_leaf^2)` draw.
pub fn draw_jumps<R: Rng + ?Sized>(t: &mut RegressionTree, cfg: &PriorConfig, rng: &mut R) {
    let normal = Normal::new(cfg.mu0, cfg.tau_leaf()).expect("tau_leaf is positive");
    for leaf in t.leaf_ids() {
        t.set_jump(leaf, normal.sample(rng));
    }
}

/// A full prior draw: shape, then rules top-down, then jumps. A node whose
/// rule cannot be drawn (nothing left to split) stays a leaf.
pub fn draw_prior_tree<R: Rng + ?Sized>(
    cfg: &PriorConfig,
    fs: &FeatureSpace,
    rng: &mut R,
) -> Result<RegressionTree> {
    let shape = draw_tree_structure(cfg, rng);
    let mut t = RegressionTree::root_only(0.0);
    for &id in &shape {
        if shape.contains(&left_child(id)) && t.is_leaf(id) {
            match draw_rule(&t, id, fs, rng) {
                Ok(rule) => t.grow(id, rule, fs)?,
                Err(Error::NoValidRule { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    draw_jumps(&mut t, cfg, rng);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Point;
    use crate::tree::ContFeature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tau_leaf_formula() {
        let cfg = PriorConfig {
            tau_total: 1.0,
            n_trees: 4,
            ..Default::default()
        };
        assert_eq!(cfg.tau_leaf(), 0.5);
    }

    #[test]
    fn alpha_zero_gives_root_only() {
        let cfg = PriorConfig {
            alpha: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(draw_tree_structure(&cfg, &mut rng).len(), 1);
        }
    }

    #[test]
    fn structure_split_frequencies() {
        let cfg = PriorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut root, mut depth1, mut depth1_split) = (0, 0, 0);
        let draws = 10_000;
        for _ in 0..draws {
            let ids = draw_tree_structure(&cfg, &mut rng);
            if ids.contains(&2) {
                root += 1;
                for c in [2, 3] {
                    depth1 += 1;
                    if ids.contains(&(2 * c)) {
                        depth1_split += 1;
                    }
                }
            }
        }
        assert!((root as f64 / draws as f64 - 0.95).abs() < 0.01);
        assert!((depth1_split as f64 / depth1 as f64 - 0.2375).abs() < 0.02);
    }

    #[test]
    fn two_level_subsets_are_both_orientations() {
        let fs = FeatureSpace::default().with_categorical("g", 2);
        let t = RegressionTree::root_only(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut left0 = 0;
        for _ in 0..4000 {
            if let DecisionRule::Categorical { left, .. } = draw_rule(&t, 1, &fs, &mut rng).unwrap() {
                if left.contains(0) {
                    left0 += 1;
                }
            }
        }
        assert!((left0 as f64 / 4000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn continuous_cut_is_uniform_on_available_interval() {
        let fs = FeatureSpace::continuous(1);
        let mut t = RegressionTree::root_only(0.0);
        t.grow(1, DecisionRule::Continuous { var: 0, cut: 0.8 }, &fs).unwrap();
        t.grow(2, DecisionRule::Continuous { var: 0, cut: 0.2 }, &fs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cuts: Vec<f64> = (0..10_000)
            .map(|_| match draw_rule(&t, 5, &fs, &mut rng).unwrap() {
                DecisionRule::Continuous { cut, .. } => cut,
                _ => unreachable!(),
            })
            .collect();
        let mean = cuts.iter().sum::<f64>() / cuts.len() as f64;
        assert!((mean - 0.5).abs() < 0.01);
        assert!(cuts.iter().all(|&c| (0.2..0.8).contains(&c)));
    }

    #[test]
    fn grid_cuts_stay_on_grid() {
        let fs = FeatureSpace {
            cont: vec![ContFeature {
                name: "x".into(),
                degenerate: false,
                grid: Some(vec![0.0, 0.25, 0.5, 0.75, 1.0]),
            }],
            cat: vec![],
        };
        let mut t = RegressionTree::root_only(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            match draw_rule(&t, 1, &fs, &mut rng).unwrap() {
                DecisionRule::Continuous { cut, .. } => assert!([0.25, 0.5, 0.75].contains(&cut)),
                _ => unreachable!(),
            }
        }
        t.grow(1, DecisionRule::Continuous { var: 0, cut: 0.25 }, &fs).unwrap();
        assert!(matches!(draw_rule(&t, 2, &fs, &mut rng), Err(Error::NoValidRule { node: 2 })));
    }

    #[test]
    fn degenerate_space_has_no_rule() {
        let fs = FeatureSpace {
            cont: vec![ContFeature {
                name: "x".into(),
                degenerate: true,
                grid: None,
            }],
            cat: vec![],
        }
        .with_categorical("g", 1);
        let t = RegressionTree::root_only(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(draw_rule(&t, 1, &fs, &mut rng), Err(Error::NoValidRule { .. })));
    }

    #[test]
    fn jump_sd_matches_tau_leaf() {
        let cfg = PriorConfig {
            tau_total: 1.0,
            n_trees: 4,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = RegressionTree::root_only(0.0);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| {
                draw_jumps(&mut t, &cfg, &mut rng);
                t.node(1).unwrap().jump
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt();
        assert!((sd / 0.5 - 1.0).abs() < 0.02);
    }

    #[test]
    fn prior_trees_are_valid_and_reproducible() {
        let cfg = PriorConfig::default();
        let fs = FeatureSpace::continuous(2).with_categorical("g", 5);
        let mut a = ChaCha8Rng::seed_from_u64(6);
        let mut b = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let t = draw_prior_tree(&cfg, &fs, &mut a).unwrap();
            t.validate().unwrap();
            assert_eq!(t, draw_prior_tree(&cfg, &fs, &mut b).unwrap());
            let x = Point {
                cont: vec![0.3, 0.9],
                cat: vec![4],
            };
            assert!(t.traverse(&x).is_ok());
        }
    }
}

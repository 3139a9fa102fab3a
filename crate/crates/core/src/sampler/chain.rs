use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::moves::MoveParams;
use super::state::{AuditLog, EnsembleState, MoveCounts};
use crate::data::{Dataset, OutcomeScaling, PredictorRow};
use crate::error::{Error, Result};
use crate::prior::PriorConfig;
use crate::tree::{FeatureSpace, RegressionTree};

/// Settings of one MCMC run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iterations: usize,
    pub n_burnin: usize,
    pub thin: usize,
    pub min_leaf_size: usize,
    pub q_grow: f64,
    pub seed: u64,
    /// Binary outcomes with a probit link.
    pub probit: bool,
    /// Keep every retained ensemble (needed for later prediction).
    pub keep_trees: bool,
    pub record_train_fits: bool,
    /// Check the running fit and leaf maps against from-scratch
    /// recomputation (slow).
    pub audit: bool,
    /// Hold σ fixed at this value on the standardized scale.
    pub sigma_fixed: Option<f64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_iterations: 2000,
            n_burnin: 1000,
            thin: 1,
            min_leaf_size: 0,
            q_grow: 0.5,
            seed: 0,
            probit: false,
            keep_trees: false,
            record_train_fits: true,
            audit: false,
            sigma_fixed: None,
        }
    }
}

impl ChainConfig {
    pub fn n_draws(&self) -> usize {
        (self.n_iterations - self.n_burnin) / self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.n_burnin > self.n_iterations {
            return Err(Error::Config(format!(
                "burn-in {} exceeds the {} iterations",
                self.n_burnin, self.n_iterations
            )));
        }
        if !(self.q_grow > 0.0 && self.q_grow < 1.0) {
            return Err(Error::Config("q_grow must lie in (0, 1)".into()));
        }
        if let Some(s) = self.sigma_fixed {
            if !(s > 0.0) {
                return Err(Error::Config("a fixed sigma must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Retained draws of a chain, on the original outcome scale (the latent
/// scale for probit fits).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    pub scaling: OutcomeScaling,
    pub probit: bool,
    pub sigma: Vec<f64>,
    /// Per draw, the leaf count of every tree.
    pub leaf_counts: Vec<Vec<usize>>,
    pub train_fits: Vec<Vec<f64>>,
    pub test_fits: Option<Vec<Vec<f64>>>,
    pub trees: Option<Vec<Vec<RegressionTree>>>,
    pub moves: MoveCounts,
    pub audit: Option<AuditLog>,
}

impl PosteriorSamples {
    pub fn n_draws(&self) -> usize {
        self.sigma.len()
    }

    /// Posterior mean of `f` at the training points (of `Φ(f)` for probit).
    pub fn train_mean(&self) -> Vec<f64> {
        self.mean_of(&self.train_fits)
    }

    /// Posterior mean at the test points given to the chain.
    pub fn test_mean(&self) -> Option<Vec<f64>> {
        self.test_fits.as_ref().map(|d| self.mean_of(d))
    }

    fn mean_of(&self, draws: &[Vec<f64>]) -> Vec<f64> {
        posterior_mean(draws, self.probit)
    }
}

/// Per-point average over draws, of `Φ(f)` when `probit`.
pub fn posterior_mean(draws: &[Vec<f64>], probit: bool) -> Vec<f64> {
    let Some(first) = draws.first() else {
        return Vec::new();
    };
    let norm = Normal::standard();
    let mut out = vec![0.0; first.len()];
    for d in draws {
        for (o, &f) in out.iter_mut().zip(d) {
            *o += if probit { norm.cdf(f) } else { f };
        }
    }
    out.iter_mut().for_each(|o| *o /= draws.len() as f64);
    out
}

/// Scale `λ` of the σ² prior such that `P(σ < s) = q` with `ν` degrees of
/// freedom.
pub fn sigma_prior_lambda(s: f64, nu: f64, q: f64) -> f64 {
    let chi = ChiSquared::new(nu).expect("nu is positive");
    s * s * chi.inverse_cdf(1.0 - q) / nu
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Sum of tree evaluations for one point.
pub fn ensemble_value<X: PredictorRow + ?Sized>(trees: &[RegressionTree], x: &X) -> Result<f64> {
    let mut f = 0.0;
    for t in trees {
        f += t.evaluate(x)?;
    }
    Ok(f)
}

fn check_shape(ds: &Dataset, fs: &FeatureSpace, what: &str) -> Result<()> {
    if ds.p_cont() != fs.p_cont() || ds.p_cat() != fs.p_cat() {
        return Err(Error::Config(format!(
            "{what} has {} continuous / {} categorical predictors, the model expects {} / {}",
            ds.p_cont(),
            ds.p_cat(),
            fs.p_cont(),
            fs.p_cat()
        )));
    }
    for (j, f) in fs.cat.iter().enumerate() {
        if ds.cat_spec(j).level_universe().len() != f.n_levels {
            return Err(Error::Config(format!(
                "{what}: column `{}` level count differs from the model",
                f.name
            )));
        }
    }
    Ok(())
}

/// Centre for probit fits: `Φ⁻¹` of the training success rate, kept away
/// from 0 and 1.
pub fn probit_offset(y: &[f64]) -> f64 {
    let rate = y.iter().sum::<f64>() / y.len() as f64;
    Normal::standard().inverse_cdf(rate.clamp(1e-3, 1.0 - 1e-3))
}

/// Runs the backfitting sampler on `data` and records the retained draws.
pub fn run_chain(
    data: &Dataset,
    fs: &FeatureSpace,
    prior: &PriorConfig,
    cfg: &ChainConfig,
    test: Option<&Dataset>,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    prior.validate()?;
    fs.validate()?;
    if !data.has_outcome() {
        return Err(Error::Config("training data has no outcome column".into()));
    }
    check_shape(data, fs, "training data")?;
    if let Some(t) = test {
        check_shape(t, fs, "test data")?;
    }

    let y = &data.y;
    let (scaling, target, sigma0, lambda) = if cfg.probit {
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Invalid("probit outcomes must be 0 or 1".into()));
        }
        let scaling = OutcomeScaling {
            center: probit_offset(y),
            half_range: 0.5,
        };
        (scaling, vec![0.0; y.len()], 1.0, 1.0)
    } else {
        let scaling = OutcomeScaling::fit(y);
        let target: Vec<f64> = y.iter().map(|&v| scaling.apply(v)).collect();
        let mut s = sample_sd(&target);
        if !(s > 0.0) {
            s = 0.5;
        }
        let lambda = prior
            .lambda
            .unwrap_or_else(|| sigma_prior_lambda(s, prior.nu, prior.sigma_quantile));
        (scaling, target, s, lambda)
    };
    let sigma0 = cfg.sigma_fixed.unwrap_or(sigma0);

    let mp = MoveParams::new(prior, cfg.q_grow, cfg.min_leaf_size);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = EnsembleState::new(target, prior.n_trees, sigma0);
    if cfg.probit {
        state.probit_augment(y, scaling.center, &mut rng)?;
    }

    let n_draws = cfg.n_draws();
    let mut out = PosteriorSamples {
        scaling,
        probit: cfg.probit,
        sigma: Vec::with_capacity(n_draws),
        leaf_counts: Vec::with_capacity(n_draws),
        train_fits: Vec::new(),
        test_fits: test.map(|_| Vec::with_capacity(n_draws)),
        trees: cfg.keep_trees.then(|| Vec::with_capacity(n_draws)),
        moves: MoveCounts::default(),
        audit: cfg.audit.then(AuditLog::default),
    };

    for it in 0..cfg.n_iterations {
        for m in 0..prior.n_trees {
            state.update_tree(m, data, fs, &mp, &mut rng, &mut out.moves, out.audit.as_mut())?;
        }
        if !cfg.probit && cfg.sigma_fixed.is_none() {
            state.update_sigma(prior.nu, lambda, &mut rng);
        }
        if cfg.probit {
            state.probit_augment(y, scaling.center, &mut rng)?;
        }
        state.iteration = it + 1;
        if let Some(audit) = out.audit.as_mut() {
            let (f, r) = state.conservation_error(data)?;
            audit.allfit_deviation.push(f);
            audit.residual_deviation.push(r);
        }

        if it >= cfg.n_burnin && (it - cfg.n_burnin + 1) % cfg.thin == 0 {
            out.sigma.push(scaling.invert_scale(state.sigma));
            out.leaf_counts
                .push(state.trees.iter().map(RegressionTree::n_leaves).collect());
            if cfg.record_train_fits {
                out.train_fits
                    .push(state.allfit.iter().map(|&f| scaling.invert(f)).collect());
            }
            if let (Some(t), Some(fits)) = (test, out.test_fits.as_mut()) {
                let mut row = Vec::with_capacity(t.n());
                for i in 0..t.n() {
                    row.push(scaling.invert(ensemble_value(&state.trees, &t.row(i))?));
                }
                fits.push(row);
            }
            if let Some(trees) = out.trees.as_mut() {
                trees.push(state.trees.clone());
            }
        }
    }
    Ok(out)
}

/// Per-draw and posterior-mean predictions at new points.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `draws[k][i]`: draw `k` at point `i`, original (or latent) scale.
    pub draws: Vec<Vec<f64>>,
    /// Posterior mean; a probability for probit fits.
    pub mean: Vec<f64>,
}

/// Evaluates stored ensembles at every row of `x_new`.
pub fn predict_ensembles(
    ensembles: &[Vec<RegressionTree>],
    scaling: &OutcomeScaling,
    probit: bool,
    x_new: &Dataset,
) -> Result<Prediction> {
    let mut draws = Vec::with_capacity(ensembles.len());
    for trees in ensembles {
        let mut row = Vec::with_capacity(x_new.n());
        for i in 0..x_new.n() {
            row.push(scaling.invert(ensemble_value(trees, &x_new.row(i))?));
        }
        draws.push(row);
    }
    let mean = posterior_mean(&draws, probit);
    Ok(Prediction { draws, mean })
}

/// Predictions from a chain run with `keep_trees`.
pub fn predict(samples: &PosteriorSamples, x_new: &Dataset) -> Result<Prediction> {
    let trees = samples
        .trees
        .as_ref()
        .ok_or_else(|| Error::Config("the chain did not keep its trees".into()))?;
    predict_ensembles(trees, &samples.scaling, samples.probit, x_new)
}

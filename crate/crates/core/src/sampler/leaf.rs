use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Conjugate statistics of one leaf given partial residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafStats {
    pub count: usize,
    pub residual_sum: f64,
    /// Posterior precision `count / σ² + 1 / τ²`.
    pub p: f64,
    /// `residual_sum / σ² + μ0 / τ²`.
    pub theta: f64,
}

impl LeafStats {
    pub fn new(count: usize, residual_sum: f64, sigma: f64, tau_leaf: f64, mu0: f64) -> LeafStats {
        let s2 = sigma * sigma;
        let t2 = tau_leaf * tau_leaf;
        LeafStats {
            count,
            residual_sum,
            p: count as f64 / s2 + 1.0 / t2,
            theta: residual_sum / s2 + mu0 / t2,
        }
    }

    pub fn from_residuals(idx: &[usize], residual: &[f64], sigma: f64, tau_leaf: f64, mu0: f64) -> LeafStats {
        let sum = idx.iter().map(|&i| residual[i]).sum();
        LeafStats::new(idx.len(), sum, sigma, tau_leaf, mu0)
    }

    /// Statistics of the union of two disjoint leaves.
    pub fn merge(a: &LeafStats, b: &LeafStats, sigma: f64, tau_leaf: f64, mu0: f64) -> LeafStats {
        LeafStats::new(a.count + b.count, a.residual_sum + b.residual_sum, sigma, tau_leaf, mu0)
    }

    pub fn posterior_mean(&self) -> f64 {
        self.theta / self.p
    }

    pub fn posterior_var(&self) -> f64 {
        1.0 / self.p
    }
}

/// Log of the leaf's factor in the marginal likelihood, up to terms that
/// are the same for every tree over the same residuals:
/// `-log τ - ½ log P + Θ² / 2P - μ0² / 2τ²`.
pub fn leaf_log_marginal(stats: &LeafStats, tau_leaf: f64, mu0: f64) -> f64 {
    -tau_leaf.ln() - 0.5 * stats.p.ln() + stats.theta * stats.theta / (2.0 * stats.p)
        - mu0 * mu0 / (2.0 * tau_leaf * tau_leaf)
}

/// Draws a leaf jump from its conditional posterior `N(Θ/P, 1/P)`.
pub fn draw_jump<R: Rng + ?Sized>(stats: &LeafStats, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    stats.posterior_mean() + z * stats.posterior_var().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_leaf_contributes_nothing() {
        let s = LeafStats::new(0, 0.0, 0.7, 0.3, 0.0);
        assert_abs_diff_eq!(leaf_log_marginal(&s, 0.3, 0.0), 0.0, epsilon = 1e-14);
        assert_eq!(s.p, 1.0 / 0.09);
    }

    #[test]
    fn two_unit_residuals() {
        let s = LeafStats::new(2, 2.0, 1.0, 1.0, 0.0);
        assert_eq!((s.p, s.theta), (3.0, 2.0));
        assert_abs_diff_eq!(
            leaf_log_marginal(&s, 1.0, 0.0),
            -0.5 * 3f64.ln() + 2.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sign_flip_symmetry() {
        let a = LeafStats::new(3, 1.7, 0.4, 0.2, 0.0);
        let b = LeafStats::new(3, -1.7, 0.4, 0.2, 0.0);
        assert_eq!(leaf_log_marginal(&a, 0.2, 0.0), leaf_log_marginal(&b, 0.2, 0.0));
    }
}

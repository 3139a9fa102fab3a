use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

/// Draws from the standard normal conditioned on exceeding `a`.
///
/// Plain rejection for `a < 0.5`; otherwise an exponential proposal with
/// the optimal rate (Robert, 1995).
pub fn std_normal_above<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a < 0.5 {
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z > a {
                return z;
            }
        }
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    let exp = Exp::new(rate).expect("rate is positive");
    loop {
        let z = a + exp.sample(rng);
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - rate) * (z - rate)).exp() {
            return z;
        }
    }
}

/// `N(mean, 1)` truncated to `(0, ∞)` when `positive`, else to `(-∞, 0]`.
pub fn truncated_unit_normal<R: Rng + ?Sized>(mean: f64, positive: bool, rng: &mut R) -> f64 {
    if positive {
        mean + std_normal_above(-mean, rng)
    } else {
        mean - std_normal_above(mean, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn mean_above(a: f64) -> f64 {
        let n = Normal::standard();
        use statrs::distribution::Continuous;
        n.pdf(a) / (1.0 - n.cdf(a))
    }

    #[test]
    fn tail_means_match_mills_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for a in [-2.0, 0.0, 0.4, 0.6, 2.0, 5.0] {
            let draws: Vec<f64> = (0..40_000).map(|_| std_normal_above(a, &mut rng)).collect();
            assert!(draws.iter().all(|&z| z > a));
            let m = draws.iter().sum::<f64>() / draws.len() as f64;
            assert!((m - mean_above(a)).abs() < 0.02, "a = {a}: {m} vs {}", mean_above(a));
        }
    }

    #[test]
    fn truncation_sides() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(truncated_unit_normal(0.0, true, &mut rng) > 0.0);
            assert!(truncated_unit_normal(0.0, false, &mut rng) <= 0.0);
        }
        let draws: Vec<f64> = (0..10_000).map(|_| truncated_unit_normal(10.0, true, &mut rng)).collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((m - 10.0).abs() < 0.05);
    }
}

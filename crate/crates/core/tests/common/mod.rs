#![allow(dead_code)]

use std::sync::Arc;

use catbart::data::{ColumnRange, ColumnSpec, Dataset, PredictorSchema};
use catbart::graph::{Network, SplitStrategy};
use catbart::tree::FeatureSpace;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper-tail p-value of Pearson's chi-square statistic for `counts`
/// against equal expected frequencies.
pub fn chi_square_uniform_p(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let chi = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - chi.cdf(stat)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Asymptotic p-value of the two-sample KS statistic.
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        sum += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    sum.clamp(0.0, 1.0)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Two continuous predictors, a 5-level categorical and a 3x3 grid network
/// predictor, with uniformly random rows.
pub fn mixed_dataset<R: Rng>(n: usize, rng: &mut R) -> (Dataset, FeatureSpace) {
    let g = Arc::new(Network::grid(3, 3));
    let schema = PredictorSchema {
        columns: vec![
            ColumnSpec::continuous("a"),
            ColumnSpec::continuous("b"),
            ColumnSpec::categorical("c", (0..5).map(|l| format!("l{l}")).collect()),
            ColumnSpec::network("v", g.labels().to_vec(), "grid"),
        ],
        outcome: "y".into(),
    };
    let x_cont = (0..2).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let x_cat = vec![
        (0..n).map(|_| rng.random_range(0..5u32)).collect(),
        (0..n).map(|_| rng.random_range(0..9u32)).collect(),
    ];
    let y = (0..n).map(|_| rng.random::<f64>()).collect();
    let ds = Dataset::from_parts(schema, x_cont, x_cat, y, vec![ColumnRange::UNIT; 2]).unwrap();
    let fs = FeatureSpace::continuous(2)
        .with_categorical("c", 5)
        .with_network("v", g, SplitStrategy::Gs2);
    (ds, fs)
}

/// Continuous-only dataset with uniform predictors and the given outcomes.
pub fn continuous_dataset(x: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
    let p = x.len();
    let schema = PredictorSchema {
        columns: (0..p).map(|j| ColumnSpec::continuous(format!("x{j}"))).collect(),
        outcome: "y".into(),
    };
    Dataset::from_parts(schema, x, Vec::new(), y, vec![ColumnRange::UNIT; p]).unwrap()
}

/// Every spanning tree of `g`, by checking all (n-1)-edge subsets.
pub fn enumerate_spanning_trees(g: &Network) -> Vec<Vec<(usize, usize)>> {
    let n = g.n_vertices();
    let edges = g.edges().to_vec();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(
        start: usize,
        need: usize,
        edges: &[(usize, usize)],
        n: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if need == 0 {
            let chosen: Vec<(usize, usize)> = pick.iter().map(|&i| edges[i]).collect();
            let mut root: Vec<usize> = (0..n).collect();
            fn find(r: &mut Vec<usize>, x: usize) -> usize {
                if r[x] != x {
                    let top = find(r, r[x]);
                    r[x] = top;
                }
                r[x]
            }
            for &(u, v) in &chosen {
                let (a, b) = (find(&mut root, u), find(&mut root, v));
                if a == b {
                    return;
                }
                root[a] = b;
            }
            let mut c = chosen;
            c.iter_mut().for_each(|e| *e = (e.0.min(e.1), e.0.max(e.1)));
            c.sort_unstable();
            out.push(c);
            return;
        }
        for i in start..edges.len() {
            if edges.len() - i < need {
                break;
            }
            pick.push(i);
            rec(i + 1, need - 1, edges, n, pick, out);
            pick.pop();
        }
    }
    rec(0, n - 1, &edges, n, &mut pick, &mut out);
    out
}

/// The 5-vertex house: a square 0-1-2-3 with roof vertex 4 on 0 and 1.
pub fn house() -> Network {
    let labels = (1..=5).map(|i| i.to_string()).collect();
    Network::from_edges(labels, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4)]).unwrap()
}

/// Connected random graph: a random tree plus `extra` random chords.
pub fn random_connected<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Network {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !edges.contains(&(u.min(v), u.max(v))) && !edges.contains(&(u.max(v), u.min(v))) {
            edges.push((u.min(v), u.max(v)));
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    Network::from_edges(labels, &edges).unwrap()
}

pub mod mh {
    use catbart::data::Dataset;
    use catbart::prior::draw_rule;
    use catbart::sampler::{grow_log_accept, prune_log_accept, quadrature_marginal_oracle, LeafStats, MoveParams};
    use catbart::tree::{left_child, right_child, DecisionRule, FeatureSpace, RegressionTree, SuffStatMap};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Log prior of a tree shape under the branching process.
    pub fn log_structure_prior(t: &RegressionTree, alpha: f64, beta: f64) -> f64 {
        t.nodes()
            .keys()
            .map(|&id| {
                let d = (63 - id.leading_zeros()) as f64;
                let p = alpha * (1.0 + d).powf(-beta);
                if t.is_leaf(id) {
                    (1.0 - p).ln()
                } else {
                    p.ln()
                }
            })
            .sum()
    }

    fn grow_prob(t: &RegressionTree, q: f64) -> f64 {
        if t.n_leaves() == 1 {
            1.0
        } else {
            q
        }
    }

    /// `log q(from -> to)` for a grow from `from` (rule density excluded).
    fn log_q_grow(from: &RegressionTree, q: f64) -> f64 {
        (grow_prob(from, q) / from.n_leaves() as f64).ln()
    }

    /// `log q(from -> to)` for a prune from `from`.
    fn log_q_prune(from: &RegressionTree, q: f64) -> f64 {
        ((1.0 - grow_prob(from, q)) / from.nog_ids().len() as f64).ln()
    }

    pub struct Instance {
        pub data: Dataset,
        pub tree: RegressionTree,
        pub residual: Vec<f64>,
        pub sigma: f64,
        pub mp: MoveParams,
    }

    #[derive(Debug, Default, Clone, Copy)]
    pub struct Coverage {
        pub grow: usize,
        pub prune: usize,
        pub continuous: usize,
        pub categorical: usize,
        pub empty_leaf: usize,
    }

    pub fn random_instance<R: Rng>(rng: &mut R) -> (Instance, FeatureSpace) {
        let n = rng.random_range(3..=10);
        let (data, fs) = super::mixed_dataset(n, rng);
        let mut tree = RegressionTree::root_only(0.0);
        for _ in 0..rng.random_range(0..5) {
            let leaves = tree.leaf_ids();
            let leaf = leaves[rng.random_range(0..leaves.len())];
            if let Ok(rule) = draw_rule(&tree, leaf, &fs, rng) {
                tree.grow(leaf, rule, &fs).unwrap();
            }
        }
        let residual = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                0.8 * z + 0.3
            })
            .collect();
        let mut mu0: f64 = rng.random_range(-0.5..0.5);
        if mu0.abs() < 0.05 {
            mu0 = 0.2;
        }
        let mp = MoveParams {
            alpha: 0.95,
            beta: 2.0,
            tau_leaf: rng.random_range(0.1..1.0),
            mu0,
            q_grow: 0.5,
            min_leaf_size: 0,
        };
        let sigma = rng.random_range(0.3..1.5);
        (
            Instance {
                data,
                tree,
                residual,
                sigma,
                mp,
            },
            fs,
        )
    }

    fn stats(inst: &Instance, idx: &[usize]) -> LeafStats {
        LeafStats::from_residuals(idx, &inst.residual, inst.sigma, inst.mp.tau_leaf, inst.mp.mu0)
    }

    fn marginal(inst: &Instance, t: &RegressionTree) -> f64 {
        quadrature_marginal_oracle(t, &inst.data, &inst.residual, inst.sigma, inst.mp.tau_leaf, inst.mp.mu0).unwrap()
    }

    /// Closed-form and oracle log ratios for one random move on `inst`.
    pub fn compare_move<R: Rng>(
        inst: &Instance,
        fs: &FeatureSpace,
        grow: bool,
        rng: &mut R,
        cov: &mut Coverage,
    ) -> Option<(f64, f64)> {
        let t = &inst.tree;
        let ssm = SuffStatMap::from_tree(t, &inst.data).unwrap();
        let (a, b) = (inst.mp.alpha, inst.mp.beta);
        if grow || t.n_leaves() == 1 {
            let leaves = t.leaf_ids();
            let leaf = leaves[rng.random_range(0..leaves.len())];
            let rule = draw_rule(t, leaf, fs, rng).ok()?;
            let (li, ri) = ssm.route(leaf, &rule, &inst.data).unwrap();
            match rule {
                DecisionRule::Continuous { .. } => cov.continuous += 1,
                DecisionRule::Categorical { .. } => cov.categorical += 1,
            }
            if li.is_empty() || ri.is_empty() {
                cov.empty_leaf += 1;
            }
            cov.grow += 1;
            let closed = grow_log_accept(t, leaf, &stats(inst, ssm.get(leaf)), &stats(inst, &li), &stats(inst, &ri), &inst.mp);
            let mut star = t.clone();
            star.grow(leaf, rule, fs).unwrap();
            let oracle = log_structure_prior(&star, a, b) - log_structure_prior(t, a, b)
                + log_q_prune(&star, inst.mp.q_grow)
                - log_q_grow(t, inst.mp.q_grow)
                + marginal(inst, &star)
                - marginal(inst, t);
            Some((closed, oracle))
        } else {
            let nogs = t.nog_ids();
            let nog = nogs[rng.random_range(0..nogs.len())];
            let li = ssm.get(left_child(nog));
            let ri = ssm.get(right_child(nog));
            match t.node(nog).unwrap().rule.as_ref().unwrap() {
                DecisionRule::Continuous { .. } => cov.continuous += 1,
                DecisionRule::Categorical { .. } => cov.categorical += 1,
            }
            if li.is_empty() || ri.is_empty() {
                cov.empty_leaf += 1;
            }
            cov.prune += 1;
            let (l, r) = (stats(inst, li), stats(inst, ri));
            let merged = LeafStats::merge(&l, &r, inst.sigma, inst.mp.tau_leaf, inst.mp.mu0);
            let closed = prune_log_accept(t, nog, &merged, &l, &r, &inst.mp);
            let mut star = t.clone();
            star.prune(nog).unwrap();
            let oracle = log_structure_prior(&star, a, b) - log_structure_prior(t, a, b)
                + log_q_grow(&star, inst.mp.q_grow)
                - log_q_prune(t, inst.mp.q_grow)
                + marginal(inst, &star)
                - marginal(inst, t);
            Some((closed, oracle))
        }
    }
}

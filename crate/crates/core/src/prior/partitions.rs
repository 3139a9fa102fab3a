use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use super::draws::{draw_prior_tree, PriorConfig};
use crate::data::Point;
use crate::error::{Error, Result};
use crate::graph::{Network, SplitStrategy};
use crate::tree::{FeatureSpace, RegressionTree};
use std::sync::Arc;

/// Partition of a level universe `{0, .., K - 1}` into blocks; blocks are
/// sorted and ordered by their smallest level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl LevelPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> LevelPartition {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        LevelPartition { blocks }
    }

    pub fn n_levels(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block index of every level.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_levels()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &l in block {
                out[l] = b;
            }
        }
        out
    }

    /// Blocks as `;`-joined level names, blocks separated by `|`.
    pub fn format(&self, names: &[String]) -> String {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&l| names[l].as_str()).collect::<Vec<_>>().join(";"))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Which predictor(s) encode the levels being partitioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionTarget {
    /// Categorical predictor `var`.
    Categorical { var: usize },
    /// One-hot block: continuous predictors `first .. first + n_levels`.
    OneHot { first: usize, n_levels: usize },
}

impl PartitionTarget {
    pub fn n_levels(&self, fs: &FeatureSpace) -> usize {
        match self {
            PartitionTarget::Categorical { var } => fs.cat[*var].n_levels,
            PartitionTarget::OneHot { n_levels, .. } => *n_levels,
        }
    }

    /// The point standing for `level`: continuous coordinates outside the
    /// target fixed at 0.5, other categorical predictors at level 0.
    pub fn probe(&self, fs: &FeatureSpace, level: usize) -> Point {
        let mut p = Point {
            cont: vec![0.5; fs.p_cont()],
            cat: vec![0; fs.p_cat()],
        };
        match self {
            PartitionTarget::Categorical { var } => p.cat[*var] = level as u32,
            PartitionTarget::OneHot { first, n_levels } => {
                for k in 0..*n_levels {
                    p.cont[first + k] = if k == level { 1.0 } else { 0.0 };
                }
            }
        }
        p
    }
}

/// Groups the levels of `target` by the leaf their probe reaches.
pub fn induced_level_partition(
    t: &RegressionTree,
    fs: &FeatureSpace,
    target: PartitionTarget,
) -> Result<LevelPartition> {
    let mut by_leaf: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for level in 0..target.n_levels(fs) {
        let leaf = t.traverse(&target.probe(fs, level))?;
        by_leaf.entry(leaf).or_default().push(level);
    }
    Ok(LevelPartition::new(by_leaf.into_values().collect()))
}

/// Partitions of `K` levels reachable by trees on `K` one-hot indicators:
/// `2^K - K`.
pub fn count_onehot_partitions(k: u32) -> Result<u64> {
    if k == 0 || k > 62 {
        return Err(Error::Invalid(format!(
            "one-hot partition count needs 1 <= K <= 62, got {k}"
        )));
    }
    Ok((1u64 << k) - k as u64)
}

/// Exhaustive count of the partitions reachable from the single block by
/// repeatedly splitting one level off a block of size at least two.
pub fn enumerate_onehot_partitions(k: u32) -> Result<u64> {
    if k == 0 || k > 16 {
        return Err(Error::Invalid(format!("enumeration supports 1 <= K <= 16, got {k}")));
    }
    let start: Vec<u32> = vec![(1u32 << k) - 1];
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(part) = queue.pop_front() {
        for (bi, &block) in part.iter().enumerate() {
            if block.count_ones() < 2 {
                continue;
            }
            for l in 0..k {
                let bit = 1u32 << l;
                if block & bit == 0 {
                    continue;
                }
                let mut next = part.clone();
                next[bi] = block & !bit;
                next.push(bit);
                next.sort_unstable();
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(seen.len() as u64)
}

/// Number of partitions of `K` labelled objects, by the Bell triangle.
pub fn bell_number(k: u32) -> Result<u128> {
    if !(1..=25).contains(&k) {
        return Err(Error::Invalid(format!("Bell numbers are supported for 1 <= K <= 25, got {k}")));
    }
    let mut row: Vec<u128> = vec![1];
    for _ in 1..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("rows are non-empty"));
        for &v in &row {
            let prev = *next.last().expect("next starts non-empty");
            next.push(prev + v);
        }
        row = next;
    }
    Ok(*row.last().expect("rows are non-empty"))
}

/// Monte Carlo estimate, over `n_draws` prior trees, of the probability that
/// two levels of `target` land in the same leaf.
pub fn co_clustering_matrix<R: Rng + ?Sized>(
    cfg: &PriorConfig,
    fs: &FeatureSpace,
    target: PartitionTarget,
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if n_draws == 0 {
        return Err(Error::Invalid("co-clustering needs at least one draw".into()));
    }
    let k = target.n_levels(fs);
    let mut counts = vec![vec![0usize; k]; k];
    for _ in 0..n_draws {
        let t = draw_prior_tree(cfg, fs, rng)?;
        let labels = induced_level_partition(&t, fs, target)?.labels();
        for a in 0..k {
            for b in a..k {
                if labels[a] == labels[b] {
                    counts[a][b] += 1;
                }
            }
        }
    }
    let mut out = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let p = counts[a][b] as f64 / n_draws as f64;
            out[a][b] = p;
            out[b][a] = p;
        }
    }
    Ok(out)
}

/// Partition of a network's vertices induced by one prior tree on a single
/// network-structured predictor.
pub fn draw_prior_network_partition<R: Rng + ?Sized>(
    cfg: &PriorConfig,
    network: &Arc<Network>,
    strategy: SplitStrategy,
    rng: &mut R,
) -> Result<LevelPartition> {
    let fs = FeatureSpace::default().with_network("v", network.clone(), strategy);
    fs.validate()?;
    let t = draw_prior_tree(cfg, &fs, rng)?;
    induced_level_partition(&t, &fs, PartitionTarget::Categorical { var: 0 })
}

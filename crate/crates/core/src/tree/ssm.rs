use std::collections::BTreeMap;

use super::features::FeatureSpace;
use super::regression_tree::{left_child, right_child, RegressionTree};
use super::rule::DecisionRule;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Observation indices reaching each leaf, each list sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuffStatMap {
    map: BTreeMap<u64, Vec<usize>>,
}

impl SuffStatMap {
    /// Map for a root-only tree over `n` observations.
    pub fn root(n: usize) -> SuffStatMap {
        let mut map = BTreeMap::new();
        map.insert(1, (0..n).collect());
        SuffStatMap { map }
    }

    /// Rebuilds the map by routing every observation through `t`.
    pub fn from_tree(t: &RegressionTree, data: &Dataset) -> Result<SuffStatMap> {
        let mut map: BTreeMap<u64, Vec<usize>> =
            t.leaf_ids().into_iter().map(|id| (id, Vec::new())).collect();
        for i in 0..data.n() {
            let leaf = t.traverse(&data.row(i))?;
            map.get_mut(&leaf).expect("traverse returns a leaf").push(i);
        }
        Ok(SuffStatMap { map })
    }

    pub fn get(&self, leaf: u64) -> &[usize] {
        self.map.get(&leaf).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[usize])> {
        self.map.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn leaf_ids(&self) -> Vec<u64> {
        self.map.keys().copied().collect()
    }

    /// Routes only the observations of `leaf` through `rule`.
    pub fn route(&self, leaf: u64, rule: &DecisionRule, data: &Dataset) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &i in self.get(leaf) {
            if rule.goes_left(&data.row(i))? {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        Ok((left, right))
    }

    /// Replaces `leaf` by its children's already-routed index lists.
    pub fn apply_birth(&mut self, leaf: u64, left: Vec<usize>, right: Vec<usize>) {
        self.map.remove(&leaf);
        self.map.insert(left_child(leaf), left);
        self.map.insert(right_child(leaf), right);
    }

    /// Merges the children of `nog` back into one sorted list.
    pub fn apply_death(&mut self, nog: u64) {
        let l = self.map.remove(&left_child(nog)).unwrap_or_default();
        let r = self.map.remove(&right_child(nog)).unwrap_or_default();
        let mut merged = Vec::with_capacity(l.len() + r.len());
        let (mut a, mut b) = (0, 0);
        while a < l.len() && b < r.len() {
            if l[a] < r[b] {
                merged.push(l[a]);
                a += 1;
            } else {
                merged.push(r[b]);
                b += 1;
            }
        }
        merged.extend_from_slice(&l[a..]);
        merged.extend_from_slice(&r[b..]);
        self.map.insert(nog, merged);
    }
}

/// Splits leaf `leaf` of `t` with `rule`, updating `ssm` by routing only
/// that leaf's observations.
pub fn birth(
    t: &mut RegressionTree,
    ssm: &mut SuffStatMap,
    leaf: u64,
    rule: DecisionRule,
    data: &Dataset,
    fs: &FeatureSpace,
) -> Result<()> {
    let (l, r) = ssm.route(leaf, &rule, data)?;
    t.grow(leaf, rule, fs)?;
    ssm.apply_birth(leaf, l, r);
    Ok(())
}

/// Collapses no-grandchild node `nog` of `t` into a leaf.
pub fn death(t: &mut RegressionTree, ssm: &mut SuffStatMap, nog: u64) -> Result<DecisionRule> {
    if !t.is_nog(nog) {
        return Err(Error::Tree(format!("node {nog} is not a no-grandchild node")));
    }
    let rule = t.prune(nog)?;
    ssm.apply_death(nog);
    Ok(rule)
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::FeatureSpace;
use super::rule::{Available, DecisionRule, LevelSet, Var};
use crate::data::PredictorRow;
use crate::error::{Error, Result};

/// Nodes deeper than this cannot be split.
pub const MAX_DEPTH: u32 = 60;

pub fn parent(id: u64) -> u64 {
    id / 2
}

pub fn depth(id: u64) -> u32 {
    63 - id.leading_zeros()
}

pub fn left_child(id: u64) -> u64 {
    2 * id
}

pub fn right_child(id: u64) -> u64 {
    2 * id + 1
}

/// A node; internal iff it carries a rule. The jump of an internal node is
/// kept at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub rule: Option<DecisionRule>,
    pub jump: f64,
}

/// Binary tree keyed by canonical labels: the root is 1 and node `n` has
/// children `2n` and `2n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: BTreeMap<u64, Node>,
}

impl Default for RegressionTree {
    fn default() -> Self {
        RegressionTree::root_only(0.0)
    }
}

impl RegressionTree {
    pub fn root_only(jump: f64) -> RegressionTree {
        let mut nodes = BTreeMap::new();
        nodes.insert(1, Node { rule: None, jump });
        RegressionTree { nodes }
    }

    pub fn nodes(&self) -> &BTreeMap<u64, Node> {
        &self.nodes
    }

    pub fn node(&self, id: u64) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn is_leaf(&self, id: u64) -> bool {
        self.nodes.get(&id).is_some_and(|n| n.rule.is_none())
    }

    pub fn is_nog(&self, id: u64) -> bool {
        self.nodes.get(&id).is_some_and(|n| n.rule.is_some())
            && self.is_leaf(left_child(id))
            && self.is_leaf(right_child(id))
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.values().filter(|n| n.rule.is_none()).count()
    }

    /// Sorted leaf labels.
    pub fn leaf_ids(&self) -> Vec<u64> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.rule.is_none())
            .map(|(&id, _)| id)
            .collect()
    }

    /// Sorted labels of internal nodes whose children are both leaves.
    pub fn nog_ids(&self) -> Vec<u64> {
        self.nodes
            .keys()
            .copied()
            .filter(|&id| self.is_nog(id))
            .collect()
    }

    pub fn set_jump(&mut self, leaf: u64, jump: f64) {
        if let Some(n) = self.nodes.get_mut(&leaf) {
            n.jump = jump;
        }
    }

    /// Leaf reached by `x`.
    pub fn traverse<X: PredictorRow + ?Sized>(&self, x: &X) -> Result<u64> {
        let mut id = 1;
        loop {
            let node = self
                .nodes
                .get(&id)
                .ok_or_else(|| Error::Tree(format!("node {id} missing")))?;
            match &node.rule {
                None => return Ok(id),
                Some(rule) => {
                    id = if rule.goes_left(x)? {
                        left_child(id)
                    } else {
                        right_child(id)
                    }
                }
            }
        }
    }

    pub fn evaluate<X: PredictorRow + ?Sized>(&self, x: &X) -> Result<f64> {
        let leaf = self.traverse(x)?;
        Ok(self.nodes[&leaf].jump)
    }

    /// Values of `var` that can reach `node`: ancestors splitting on `var`
    /// each intersect the set with the side the path took.
    pub fn available_set(&self, node: u64, var: Var, fs: &FeatureSpace) -> Available {
        let mut avail = match var {
            Var::Cont(_) => Available::Interval { lo: 0.0, hi: 1.0 },
            Var::Cat(j) => Available::Levels(LevelSet::full(fs.cat[j].n_levels)),
        };
        let mut id = node;
        while id > 1 {
            let p = parent(id);
            if let Some(rule) = self.nodes.get(&p).and_then(|n| n.rule.as_ref()) {
                if rule.var() == var {
                    avail = rule.restrict(&avail, id == left_child(p));
                }
            }
            id = p;
        }
        avail
    }

    /// Checks that `rule` may be attached at `node`.
    pub fn check_rule(&self, node: u64, rule: &DecisionRule, fs: &FeatureSpace) -> Result<()> {
        match rule {
            DecisionRule::Continuous { var, cut } => {
                let f = fs.cont.get(*var).ok_or_else(|| {
                    Error::Tree(format!("continuous predictor {var} does not exist"))
                })?;
                if f.degenerate {
                    return Err(Error::Tree(format!("continuous predictor {var} is constant")));
                }
                if let Available::Interval { lo, hi } = self.available_set(node, rule.var(), fs) {
                    if !(hi > lo) || !(lo..=hi).contains(cut) {
                        return Err(Error::Tree(format!(
                            "cutpoint {cut} outside available interval [{lo}, {hi}) at node {node}"
                        )));
                    }
                }
            }
            DecisionRule::Categorical { var, left, right } => {
                if *var >= fs.p_cat() {
                    return Err(Error::Tree(format!("categorical predictor {var} does not exist")));
                }
                if let Available::Levels(set) = self.available_set(node, rule.var(), fs) {
                    if left.is_empty()
                        || right.is_empty()
                        || !left.is_disjoint(right)
                        || left.union(right) != set
                    {
                        return Err(Error::Tree(format!(
                            "categorical rule at node {node} does not partition the available levels {set:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Turns leaf `leaf` into an internal node with `rule` and two leaf
    /// children with jump 0.
    pub fn grow(&mut self, leaf: u64, rule: DecisionRule, fs: &FeatureSpace) -> Result<()> {
        if !self.is_leaf(leaf) {
            return Err(Error::Tree(format!("node {leaf} is not a leaf")));
        }
        if depth(leaf) >= MAX_DEPTH {
            return Err(Error::Tree(format!("node {leaf} is at the depth limit")));
        }
        self.check_rule(leaf, &rule, fs)?;
        let node = self.nodes.get_mut(&leaf).expect("leaf exists");
        node.rule = Some(rule);
        node.jump = 0.0;
        self.nodes.insert(left_child(leaf), Node { rule: None, jump: 0.0 });
        self.nodes.insert(right_child(leaf), Node { rule: None, jump: 0.0 });
        Ok(())
    }

    /// Removes both (leaf) children of `nog`, which becomes a leaf with jump 0.
    pub fn prune(&mut self, nog: u64) -> Result<DecisionRule> {
        if !self.is_nog(nog) {
            return Err(Error::Tree(format!("node {nog} is not a no-grandchild node")));
        }
        self.nodes.remove(&left_child(nog));
        self.nodes.remove(&right_child(nog));
        let node = self.nodes.get_mut(&nog).expect("nog exists");
        node.jump = 0.0;
        Ok(node.rule.take().expect("nog has a rule"))
    }

    /// Structural check: reachable from the root, children present in pairs,
    /// rules only at internal nodes.
    pub fn validate(&self) -> Result<()> {
        let mut stack = vec![1u64];
        let mut seen = 0;
        while let Some(id) = stack.pop() {
            let node = self
                .nodes
                .get(&id)
                .ok_or_else(|| Error::Tree(format!("node {id} missing")))?;
            seen += 1;
            let has_l = self.nodes.contains_key(&left_child(id));
            let has_r = self.nodes.contains_key(&right_child(id));
            match (&node.rule, has_l, has_r) {
                (Some(_), true, true) => {
                    stack.push(left_child(id));
                    stack.push(right_child(id));
                }
                (None, false, false) => {}
                _ => return Err(Error::Tree(format!("node {id} is malformed"))),
            }
        }
        if seen != self.nodes.len() {
            return Err(Error::Tree("tree has unreachable nodes".into()));
        }
        Ok(())
    }

    /// Node labels in preorder.
    pub fn preorder(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![1u64];
        while let Some(id) = stack.pop() {
            out.push(id);
            if self.nodes.get(&id).is_some_and(|n| n.rule.is_some()) {
                stack.push(right_child(id));
                stack.push(left_child(id));
            }
        }
        out
    }

    pub fn to_json_value(&self) -> TreeJson {
        TreeJson {
            nodes: self
                .preorder()
                .into_iter()
                .map(|id| {
                    let n = &self.nodes[&id];
                    NodeJson {
                        id,
                        rule: n.rule.as_ref().map(RuleJson::from),
                        jump: n.rule.is_none().then_some(n.jump),
                    }
                })
                .collect(),
        }
    }

    pub fn from_json_value(json: &TreeJson) -> Result<RegressionTree> {
        let mut nodes = BTreeMap::new();
        for n in &json.nodes {
            let rule = n.rule.as_ref().map(DecisionRule::from);
            let jump = match (&rule, n.jump) {
                (None, Some(j)) => j,
                (None, None) => {
                    return Err(Error::Tree(format!("leaf {} has no jump", n.id)));
                }
                (Some(_), _) => 0.0,
            };
            if nodes.insert(n.id, Node { rule, jump }).is_some() {
                return Err(Error::Tree(format!("duplicate node {}", n.id)));
            }
        }
        let t = RegressionTree { nodes };
        t.validate()?;
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("tree serializes")
    }

    pub fn from_json(s: &str) -> Result<RegressionTree> {
        RegressionTree::from_json_value(&serde_json::from_str(s)?)
    }
}

/// Serialized form of a tree: nodes in preorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleJson>,
    pub jump: Option<f64>,
}

/// `var` indexes predictors of the rule's own kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RuleJson {
    #[serde(rename = "cont")]
    Cont { var: usize, cut: f64 },
    #[serde(rename = "cat")]
    Cat {
        var: usize,
        left: Vec<usize>,
        right: Vec<usize>,
    },
}

impl From<&DecisionRule> for RuleJson {
    fn from(r: &DecisionRule) -> RuleJson {
        match r {
            DecisionRule::Continuous { var, cut } => RuleJson::Cont { var: *var, cut: *cut },
            DecisionRule::Categorical { var, left, right } => RuleJson::Cat {
                var: *var,
                left: left.to_vec(),
                right: right.to_vec(),
            },
        }
    }
}

impl From<&RuleJson> for DecisionRule {
    fn from(r: &RuleJson) -> DecisionRule {
        match r {
            RuleJson::Cont { var, cut } => DecisionRule::Continuous { var: *var, cut: *cut },
            RuleJson::Cat { var, left, right } => DecisionRule::Categorical {
                var: *var,
                left: LevelSet::from_indices(left.iter().copied()),
                right: LevelSet::from_indices(right.iter().copied()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Point;

    fn fs() -> FeatureSpace {
        FeatureSpace::continuous(2).with_categorical("g", 3)
    }

    fn cut(var: usize, c: f64) -> DecisionRule {
        DecisionRule::Continuous { var, cut: c }
    }

    fn cat(left: &[usize], right: &[usize]) -> DecisionRule {
        DecisionRule::Categorical {
            var: 0,
            left: LevelSet::from_indices(left.iter().copied()),
            right: LevelSet::from_indices(right.iter().copied()),
        }
    }

    fn pt(x0: f64, level: u32) -> Point {
        Point {
            cont: vec![x0, 0.5],
            cat: vec![level],
        }
    }

    #[test]
    fn label_arithmetic() {
        assert_eq!(depth(1), 0);
        assert_eq!(depth(2), 1);
        assert_eq!(depth(7), 2);
        assert_eq!(depth(8), 3);
        assert_eq!(parent(5), 2);
    }

    #[test]
    fn root_only_tree() {
        let t = RegressionTree::root_only(0.7);
        assert_eq!(t.traverse(&pt(0.2, 1)).unwrap(), 1);
        assert_eq!(t.evaluate(&pt(0.9, 2)).unwrap(), 0.7);
        assert_eq!(t.leaf_ids(), vec![1]);
        assert!(t.nog_ids().is_empty());
    }

    #[test]
    fn routing_and_evaluation() {
        let mut t = RegressionTree::root_only(0.0);
        t.grow(1, cut(0, 0.5), &fs()).unwrap();
        t.set_jump(2, -1.0);
        t.set_jump(3, 2.0);
        assert_eq!(t.traverse(&pt(0.3, 0)).unwrap(), 2);
        assert_eq!(t.evaluate(&pt(0.9, 0)).unwrap(), 2.0);
        assert_eq!(t.leaf_ids(), vec![2, 3]);
        assert_eq!(t.nog_ids(), vec![1]);

        let mut c = RegressionTree::root_only(0.0);
        c.grow(1, cat(&[0, 2], &[1]), &fs()).unwrap();
        assert_eq!(c.traverse(&pt(0.0, 2)).unwrap(), 2);
        assert_eq!(c.traverse(&pt(0.0, 1)).unwrap(), 3);
    }

    #[test]
    fn full_depth_two_nogs() {
        let mut t = RegressionTree::root_only(0.0);
        t.grow(1, cut(0, 0.5), &fs()).unwrap();
        t.grow(2, cut(1, 0.5), &fs()).unwrap();
        t.grow(3, cut(1, 0.5), &fs()).unwrap();
        assert_eq!(t.leaf_ids(), vec![4, 5, 6, 7]);
        assert_eq!(t.nog_ids(), vec![2, 3]);
    }

    #[test]
    fn availability_by_ancestor_intersection() {
        let fs = FeatureSpace::continuous(1).with_categorical("g", 4);
        let mut t = RegressionTree::root_only(0.0);
        assert_eq!(
            t.available_set(1, Var::Cont(0), &fs),
            Available::Interval { lo: 0.0, hi: 1.0 }
        );
        t.grow(1, cut(0, 0.6), &fs).unwrap();
        assert_eq!(
            t.available_set(2, Var::Cont(0), &fs),
            Available::Interval { lo: 0.0, hi: 0.6 }
        );
        assert_eq!(
            t.available_set(3, Var::Cont(0), &fs),
            Available::Interval { lo: 0.6, hi: 1.0 }
        );
        t.grow(2, cat(&[0, 1, 2], &[3]), &fs).unwrap();
        t.grow(4, cat(&[0], &[1, 2]), &fs).unwrap();
        assert_eq!(
            t.available_set(8, Var::Cat(0), &fs),
            Available::Levels(LevelSet::from_indices([0]))
        );
        assert_eq!(
            t.available_set(9, Var::Cat(0), &fs),
            Available::Levels(LevelSet::from_indices([1, 2]))
        );
    }

    #[test]
    fn rule_must_partition_available_levels() {
        let fs = fs();
        let mut t = RegressionTree::root_only(0.0);
        assert!(t.grow(1, cat(&[0], &[1]), &fs).is_err());
        assert!(t.grow(1, cat(&[0, 1], &[1, 2]), &fs).is_err());
        assert!(t.grow(1, cat(&[], &[0, 1, 2]), &fs).is_err());
        t.grow(1, cat(&[0], &[1, 2]), &fs).unwrap();
        assert!(t.grow(3, cat(&[1], &[2, 0]), &fs).is_err());
        t.grow(3, cat(&[1], &[2]), &fs).unwrap();
        assert!(t.grow(1, cut(0, 0.5), &fs).is_err());
    }

    #[test]
    fn prune_inverts_grow() {
        let fs = fs();
        let mut t = RegressionTree::root_only(0.0);
        t.grow(1, cut(0, 0.5), &fs).unwrap();
        let before = t.clone();
        t.grow(3, cut(1, 0.25), &fs).unwrap();
        assert!(t.prune(1).is_err());
        assert_eq!(t.prune(3).unwrap(), cut(1, 0.25));
        assert_eq!(t, before);
        assert!(t.prune(2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let fs = fs();
        let mut t = RegressionTree::root_only(0.0);
        t.grow(1, cut(0, 0.1 + 0.2), &fs).unwrap();
        t.grow(2, cat(&[0, 2], &[1]), &fs).unwrap();
        t.set_jump(4, -1.0);
        t.set_jump(5, 1.0 / 3.0);
        t.set_jump(3, 2.5e-17);
        let s = t.to_json();
        assert!(s.starts_with(r#"{"nodes":[{"id":1,"rule":{"kind":"cont","var":0,"cut":0.30000000000000004},"jump":null}"#));
        assert_eq!(RegressionTree::from_json(&s).unwrap(), t);
        assert_eq!(t.preorder(), vec![1, 2, 4, 5, 3]);
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(RegressionTree::from_json(r#"{"nodes":[{"id":2,"jump":1.0}]}"#).is_err());
        assert!(RegressionTree::from_json(r#"{"nodes":[{"id":1,"jump":null}]}"#).is_err());
    }
}

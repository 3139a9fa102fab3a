//! Regression trees with canonical node labels, subset-valued categorical
//! rules, availability by ancestor intersection, and the leaf-membership
//! map kept in step with grow/prune edits.

mod features;
mod regression_tree;
mod rule;
mod ssm;

pub use features::{CatFeature, ContFeature, FeatureSpace};
pub use regression_tree::{
    depth, left_child, parent, right_child, Node, NodeJson, RegressionTree, RuleJson, TreeJson,
    MAX_DEPTH,
};
pub use rule::{Available, DecisionRule, LevelSet, Var};
pub use ssm::{birth, death, SuffStatMap};

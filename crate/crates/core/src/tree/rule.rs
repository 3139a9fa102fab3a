use std::fmt;

use crate::data::PredictorRow;
use crate::error::{Error, Result};

/// Set of level indices stored as a bitset.
#[derive(Clone, Default)]
pub struct LevelSet {
    words: Vec<u64>,
}

impl LevelSet {
    pub fn new() -> LevelSet {
        LevelSet { words: Vec::new() }
    }

    /// `{0, .., k - 1}`.
    pub fn full(k: usize) -> LevelSet {
        let mut s = LevelSet {
            words: vec![0; k.div_ceil(64)],
        };
        for l in 0..k {
            s.insert(l);
        }
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> LevelSet {
        let mut s = LevelSet::new();
        for l in it {
            s.insert(l);
        }
        s
    }

    #[inline]
    pub fn contains(&self, l: usize) -> bool {
        self.words
            .get(l / 64)
            .is_some_and(|w| w & (1u64 << (l % 64)) != 0)
    }

    pub fn insert(&mut self, l: usize) {
        let w = l / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (l % 64);
    }

    pub fn remove(&mut self, l: usize) {
        if let Some(w) = self.words.get_mut(l / 64) {
            *w &= !(1u64 << (l % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| wi * 64 + b)
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn intersection(&self, other: &LevelSet) -> LevelSet {
        LevelSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &LevelSet) -> LevelSet {
        LevelSet {
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0))
                .collect(),
        }
    }

    pub fn union(&self, other: &LevelSet) -> LevelSet {
        let n = self.words.len().max(other.words.len());
        LevelSet {
            words: (0..n)
                .map(|i| {
                    self.words.get(i).copied().unwrap_or(0) | other.words.get(i).copied().unwrap_or(0)
                })
                .collect(),
        }
    }

    pub fn is_disjoint(&self, other: &LevelSet) -> bool {
        self.intersection(other).is_empty()
    }

    pub fn is_subset(&self, other: &LevelSet) -> bool {
        self.difference(other).is_empty()
    }
}

impl PartialEq for LevelSet {
    fn eq(&self, other: &LevelSet) -> bool {
        let n = self.words.len().max(other.words.len());
        (0..n).all(|i| {
            self.words.get(i).copied().unwrap_or(0) == other.words.get(i).copied().unwrap_or(0)
        })
    }
}

impl Eq for LevelSet {}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Values of one predictor that can reach a node.
#[derive(Debug, Clone, PartialEq)]
pub enum Available {
    /// Half-open interval `[lo, hi)` of a continuous predictor.
    Interval { lo: f64, hi: f64 },
    Levels(LevelSet),
}

/// A predictor, addressed within its kind: continuous predictor `j` or
/// categorical predictor `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Cont(usize),
    Cat(usize),
}

/// Splitting rule at an internal node. An observation goes left when the
/// rule holds.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionRule {
    /// Left iff `x_var < cut`.
    Continuous { var: usize, cut: f64 },
    /// Left iff the level is in `left`; `left` and `right` partition the
    /// levels available where the rule lives.
    Categorical {
        var: usize,
        left: LevelSet,
        right: LevelSet,
    },
}

impl DecisionRule {
    pub fn var(&self) -> Var {
        match self {
            DecisionRule::Continuous { var, .. } => Var::Cont(*var),
            DecisionRule::Categorical { var, .. } => Var::Cat(*var),
        }
    }

    /// Whether `x` is sent to the left child.
    #[inline]
    pub fn goes_left<X: PredictorRow + ?Sized>(&self, x: &X) -> Result<bool> {
        match self {
            DecisionRule::Continuous { var, cut } => Ok(x.cont(*var) < *cut),
            DecisionRule::Categorical { var, left, right } => {
                let l = x.cat(*var) as usize;
                if left.contains(l) {
                    Ok(true)
                } else if right.contains(l) {
                    Ok(false)
                } else {
                    Err(Error::Tree(format!(
                        "level {l} of categorical predictor {var} is on neither side of the rule"
                    )))
                }
            }
        }
    }

    /// Values of the rule's predictor reaching the left (`true`) or right
    /// child, given the values `avail` reaching the node itself.
    pub fn restrict(&self, avail: &Available, left: bool) -> Available {
        match (self, avail) {
            (DecisionRule::Continuous { cut, .. }, Available::Interval { lo, hi }) => {
                if left {
                    Available::Interval {
                        lo: *lo,
                        hi: hi.min(*cut),
                    }
                } else {
                    Available::Interval {
                        lo: lo.max(*cut),
                        hi: *hi,
                    }
                }
            }
            (DecisionRule::Categorical { left: l, right: r, .. }, Available::Levels(set)) => {
                Available::Levels(set.intersection(if left { l } else { r }))
            }
            _ => avail.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Point;

    #[test]
    fn level_set_operations() {
        let a = LevelSet::from_indices([0, 2, 70]);
        let b = LevelSet::from_indices([2, 3]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(70) && !a.contains(69));
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 70]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 2, 3, 70]);
        assert_eq!(LevelSet::full(3), LevelSet::from_indices([2, 1, 0]));
        assert_eq!(LevelSet::full(130).len(), 130);
        assert!(LevelSet::from_indices([1]).is_subset(&LevelSet::full(2)));
    }

    #[test]
    fn equality_ignores_trailing_words() {
        let mut a = LevelSet::full(100);
        for l in 64..100 {
            a.remove(l);
        }
        assert_eq!(a, LevelSet::full(64));
    }

    #[test]
    fn continuous_boundary_goes_right() {
        let r = DecisionRule::Continuous { var: 0, cut: 0.5 };
        let at = |v: f64| Point { cont: vec![v], cat: vec![] };
        assert!(r.goes_left(&at(0.3)).unwrap());
        assert!(!r.goes_left(&at(0.5)).unwrap());
    }

    #[test]
    fn categorical_membership() {
        let r = DecisionRule::Categorical {
            var: 0,
            left: LevelSet::from_indices([0, 2]),
            right: LevelSet::from_indices([1]),
        };
        let at = |l: u32| Point { cont: vec![], cat: vec![l] };
        assert!(r.goes_left(&at(2)).unwrap());
        assert!(!r.goes_left(&at(1)).unwrap());
        assert!(r.goes_left(&at(3)).is_err());
    }
}

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::Network;
use super::spanning::{wilson_spanning_tree, SpanningTree};
use super::spectral::fiedler_vector;
use crate::error::{Error, Result};

const ZERO_EPS: f64 = 1e-10;

/// How a rule on a network-structured predictor chooses its level subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitStrategy {
    /// Ignore the network: uniform random subset.
    #[default]
    Unif,
    /// Fiedler partition of the available subgraph.
    Gs1,
    /// Uniform spanning tree, delete a uniformly chosen edge.
    Gs2,
    /// Uniform spanning tree, delete an edge weighted by its smaller side.
    Gs3,
    /// Fiedler partition of a uniform spanning tree.
    Gs4,
}

impl SplitStrategy {
    pub const ALL: [SplitStrategy; 5] = [
        SplitStrategy::Unif,
        SplitStrategy::Gs1,
        SplitStrategy::Gs2,
        SplitStrategy::Gs3,
        SplitStrategy::Gs4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitStrategy::Unif => "unif",
            SplitStrategy::Gs1 => "gs1",
            SplitStrategy::Gs2 => "gs2",
            SplitStrategy::Gs3 => "gs3",
            SplitStrategy::Gs4 => "gs4",
        }
    }

    pub fn uses_network(&self) -> bool {
        *self != SplitStrategy::Unif
    }
}

impl fmt::Display for SplitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<SplitStrategy> {
        SplitStrategy::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown split strategy `{s}`")))
    }
}

/// Two-block partition of a network's vertices (indices, each side sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexBipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl VertexBipartition {
    fn from_mask(in_left: &[bool]) -> VertexBipartition {
        let (left, right) = (0..in_left.len()).partition(|&v| in_left[v]);
        VertexBipartition { left, right }
    }

    pub fn left_labels<'a>(&self, g: &'a Network) -> Vec<&'a str> {
        self.left.iter().map(|&v| g.labels()[v].as_str()).collect()
    }

    pub fn right_labels<'a>(&self, g: &'a Network) -> Vec<&'a str> {
        self.right.iter().map(|&v| g.labels()[v].as_str()).collect()
    }

    /// Both sides non-empty, disjoint, covering, and connected in `g`.
    pub fn is_valid_for(&self, g: &Network) -> bool {
        let mut all: Vec<usize> = self.left.iter().chain(&self.right).copied().collect();
        all.sort_unstable();
        !self.left.is_empty()
            && !self.right.is_empty()
            && all == (0..g.n_vertices()).collect::<Vec<_>>()
            && g.is_connected_subset(&self.left)
            && g.is_connected_subset(&self.right)
    }
}

fn require_splittable(g: &Network) -> Result<()> {
    if g.n_vertices() < 2 {
        return Err(Error::Graph("cannot bipartition fewer than two vertices".into()));
    }
    if !g.is_connected() {
        return Err(Error::Graph("cannot bipartition a disconnected graph".into()));
    }
    Ok(())
}

/// Vertices of `side` (a mask) grouped into connected pieces, largest first
/// (ties broken by smallest member).
fn side_components(g: &Network, mask: &[bool]) -> Vec<Vec<usize>> {
    let members: Vec<usize> = (0..mask.len()).filter(|&v| mask[v]).collect();
    let (sub, back) = g.induced_by_index(&members).expect("indices are in range");
    let mut comps: Vec<Vec<usize>> = sub
        .connected_components()
        .into_iter()
        .map(|c| c.into_iter().map(|v| back[v]).collect())
        .collect();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

/// Keeps the largest connected piece of the `keep` side and moves the rest
/// across.
fn keep_largest_piece(g: &Network, in_left: &mut [bool], keep: bool) {
    let mask: Vec<bool> = in_left.iter().map(|&l| l == keep).collect();
    let comps = side_components(g, &mask);
    for comp in comps.iter().skip(1) {
        for &v in comp {
            in_left[v] = !keep;
        }
    }
}

/// Deterministic Fiedler bipartition.
///
/// Left gets the strictly positive entries; entries within 1e-10 of zero go
/// right. If a side comes out empty, the vertex with the smallest |entry|
/// crosses over. A side that is still disconnected (numerical ties) keeps
/// its largest piece and hands the remainder to the other side.
pub fn split_gs1(g: &Network) -> Result<VertexBipartition> {
    require_splittable(g)?;
    let f = fiedler_vector(g)?;
    let n = f.len();
    let mut in_left: Vec<bool> = f.iter().map(|&x| x > ZERO_EPS).collect();
    let n_left = in_left.iter().filter(|&&l| l).count();
    if n_left == 0 || n_left == n {
        let target = n_left == 0;
        let v = (0..n)
            .filter(|&v| in_left[v] != target)
            .min_by(|&a, &b| f[a].abs().total_cmp(&f[b].abs()))
            .expect("the full side is non-empty");
        in_left[v] = target;
    }
    keep_largest_piece(g, &mut in_left, true);
    keep_largest_piece(g, &mut in_left, false);
    let part = VertexBipartition::from_mask(&in_left);
    if part.is_valid_for(g) {
        return Ok(part);
    }
    // The last vertex reached by breadth-first search is never a cut vertex.
    let order = bfs_order(g, 0);
    let last = *order.last().expect("graph has vertices");
    let mut in_left = vec![false; n];
    in_left[last] = true;
    Ok(VertexBipartition::from_mask(&in_left))
}

fn bfs_order(g: &Network, start: usize) -> Vec<usize> {
    let mut seen = vec![false; g.n_vertices()];
    let mut order = vec![start];
    seen[start] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &w in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                order.push(w);
            }
        }
    }
    order
}

/// Parent pointers and subtree sizes of `tree` rooted at vertex 0.
fn rooted(tree: &SpanningTree, g: &Network) -> (Vec<usize>, Vec<usize>) {
    let t = tree.to_network(g);
    let order = bfs_order(&t, 0);
    let mut parent = vec![usize::MAX; t.n_vertices()];
    for &u in &order {
        for &w in t.neighbors(u) {
            if w != parent[u] && parent[w] == usize::MAX && w != 0 {
                parent[w] = u;
            }
        }
    }
    let mut size = vec![1usize; t.n_vertices()];
    for &u in order.iter().rev() {
        if u != 0 {
            size[parent[u]] += size[u];
        }
    }
    (parent, size)
}

/// Bipartition from cutting the tree edge above `child`; left holds vertex 0.
fn cut_above(tree: &SpanningTree, g: &Network, parent: &[usize], child: usize) -> VertexBipartition {
    let t = tree.to_network(g);
    let mut in_left = vec![true; t.n_vertices()];
    let mut stack = vec![child];
    in_left[child] = false;
    while let Some(u) = stack.pop() {
        for &w in t.neighbors(u) {
            if w != parent[u] && in_left[w] {
                in_left[w] = false;
                stack.push(w);
            }
        }
    }
    VertexBipartition::from_mask(&in_left)
}

/// Uniform spanning tree, then delete one of its edges uniformly at random.
pub fn split_gs2<R: Rng + ?Sized>(g: &Network, rng: &mut R) -> Result<VertexBipartition> {
    require_splittable(g)?;
    let tree = wilson_spanning_tree(g, rng)?;
    let (parent, _) = rooted(&tree, g);
    // Every non-root vertex owns exactly one tree edge: the one to its parent.
    let child = 1 + rng.random_range(0..g.n_vertices() - 1);
    Ok(cut_above(&tree, g, &parent, child))
}

/// Uniform spanning tree, then delete an edge with probability proportional
/// to the size of the smaller side it leaves behind.
pub fn split_gs3<R: Rng + ?Sized>(g: &Network, rng: &mut R) -> Result<VertexBipartition> {
    require_splittable(g)?;
    let n = g.n_vertices();
    let tree = wilson_spanning_tree(g, rng)?;
    let (parent, size) = rooted(&tree, g);
    let weights: Vec<usize> = (1..n).map(|v| size[v].min(n - size[v])).collect();
    let total: usize = weights.iter().sum();
    let mut u = rng.random_range(0..total);
    let mut child = n - 1;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            child = k + 1;
            break;
        }
        u -= w;
    }
    Ok(cut_above(&tree, g, &parent, child))
}

/// Fiedler partition of a uniform spanning tree.
pub fn split_gs4<R: Rng + ?Sized>(g: &Network, rng: &mut R) -> Result<VertexBipartition> {
    require_splittable(g)?;
    let tree = wilson_spanning_tree(g, rng)?;
    split_gs1(&tree.to_network(g))
}

/// Dispatches on a network strategy. `Unif` is not a graph split.
pub fn split_network<R: Rng + ?Sized>(
    strategy: SplitStrategy,
    g: &Network,
    rng: &mut R,
) -> Result<VertexBipartition> {
    match strategy {
        SplitStrategy::Gs1 => split_gs1(g),
        SplitStrategy::Gs2 => split_gs2(g, rng),
        SplitStrategy::Gs3 => split_gs3(g, rng),
        SplitStrategy::Gs4 => split_gs4(g, rng),
        SplitStrategy::Unif => Err(Error::Config("unif is not a network split strategy".into())),
    }
}

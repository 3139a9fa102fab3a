use rand::Rng;

use super::network::Network;
use crate::error::{Error, Result};

/// Spanning tree of a [`Network`], as sorted `(u, v)` index pairs with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanningTree {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    pub fn to_network(&self, source: &Network) -> Network {
        Network::from_edges(source.labels().to_vec(), &self.edges)
            .expect("tree edges come from a simple graph")
    }

    /// Checks edge count, connectivity and that every edge belongs to `g`.
    pub fn is_spanning_tree_of(&self, g: &Network) -> bool {
        self.n_vertices == g.n_vertices()
            && self.edges.len() + 1 == self.n_vertices.max(1)
            && self.edges.iter().all(|&(u, v)| g.has_edge(u, v))
            && self.to_network(g).is_connected()
    }
}

/// Uniform spanning tree by loop-erased random walks (Wilson's algorithm),
/// rooted at vertex 0.
pub fn wilson_spanning_tree<R: Rng + ?Sized>(g: &Network, rng: &mut R) -> Result<SpanningTree> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(Error::Graph("spanning tree of an empty graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Graph("spanning tree requested for a disconnected graph".into()));
    }
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[0] = true;
    for start in 1..n {
        // Overwriting `next` on revisits erases loops implicitly.
        let mut u = start;
        while !in_tree[u] {
            let nb = g.neighbors(u);
            next[u] = nb[rng.random_range(0..nb.len())];
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|v| (v.min(next[v]), v.max(next[v])))
        .collect();
    edges.sort_unstable();
    Ok(SpanningTree { n_vertices: n, edges })
}

/// Number of spanning trees by the matrix-tree theorem: the determinant of
/// the Laplacian with its first row and column removed, rounded.
///
/// Exact as long as the count stays below 2^53.
pub fn spanning_tree_count(g: &Network) -> u128 {
    let n = g.n_vertices();
    if n <= 1 {
        return 1;
    }
    let l = g.laplacian();
    let minor = l.view((1, 1), (n - 1, n - 1)).into_owned();
    let det = minor.lu().determinant();
    if det < 0.5 {
        0
    } else {
        det.round() as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn tree_input_returns_itself() {
        let g = Network::path(6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = wilson_spanning_tree(&g, &mut rng).unwrap();
            assert_eq!(t.edges, g.edges());
        }
    }

    #[test]
    fn single_vertex_has_no_edges() {
        let g = Network::path(1);
        let t = wilson_spanning_tree(&g, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(t.edges.is_empty());
        assert!(t.is_spanning_tree_of(&g));
    }

    #[test]
    fn disconnected_graph_is_an_error() {
        let g = Network::from_edges(vec!["a".into(), "b".into()], &[]).unwrap();
        assert!(wilson_spanning_tree(&g, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert_eq!(spanning_tree_count(&g), 0);
    }

    #[test]
    fn outputs_are_spanning_trees() {
        let g = Network::grid(5, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            assert!(wilson_spanning_tree(&g, &mut rng).unwrap().is_spanning_tree_of(&g));
        }
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let g = Network::grid(4, 4);
        let a = wilson_spanning_tree(&g, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = wilson_spanning_tree(&g, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_trees_are_roughly_uniform() {
        let g = Network::cycle(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts: HashMap<SpanningTree, usize> = HashMap::new();
        for _ in 0..4000 {
            *counts.entry(wilson_spanning_tree(&g, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for &c in counts.values() {
            assert!((c as f64 / 4000.0 - 0.25).abs() < 0.03);
        }
    }

    #[test]
    fn kirchhoff_counts() {
        assert_eq!(spanning_tree_count(&Network::cycle(4)), 4);
        assert_eq!(spanning_tree_count(&Network::complete(4)), 16);
        assert_eq!(spanning_tree_count(&Network::complete(5)), 125);
        assert_eq!(spanning_tree_count(&Network::path(7)), 1);
        assert_eq!(spanning_tree_count(&Network::star(6)), 1);
        assert_eq!(spanning_tree_count(&Network::grid(3, 3)), 192);
    }
}

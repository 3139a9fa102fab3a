use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected simple graph over labelled vertices.
///
/// Vertices are addressed by their position in `labels`; every ordering
/// convention in this module ("smallest vertex", "first vertex") refers to
/// that position, not to the label text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    labels: Vec<String>,
    /// Sorted neighbour lists.
    adj: Vec<Vec<usize>>,
    /// Sorted `(u, v)` pairs with `u < v`.
    edges: Vec<(usize, usize)>,
}

impl Network {
    /// Builds a network from index pairs. Duplicate edges (in either
    /// orientation) are merged; self-loops are rejected.
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Network> {
        let n = labels.len();
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u}, {v}) refers to a missing vertex")));
            }
            if u == v {
                return Err(Error::Graph(format!("self-loop at vertex `{}`", labels[u])));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut uniq = labels.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != n {
            return Err(Error::Graph("duplicate vertex labels".into()));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Network { labels, adj, edges })
    }

    /// Parses a whitespace-separated edge list. The vertex universe is
    /// `levels`; blank lines and lines starting with `#` are ignored.
    pub fn from_edge_list_str(text: &str, levels: &[String]) -> Result<Network> {
        let index: HashMap<&str, usize> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Graph(format!(
                        "line {}: expected two vertex labels, got {line:?}",
                        lineno + 1
                    )))
                }
            };
            let lookup = |l: &str| {
                index.get(l).copied().ok_or_else(|| {
                    Error::Graph(format!("line {}: unknown vertex `{l}`", lineno + 1))
                })
            };
            edges.push((lookup(a)?, lookup(b)?));
        }
        Network::from_edges(levels.to_vec(), &edges)
    }

    pub fn from_edge_list(path: &Path, levels: &[String]) -> Result<Network> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Network::from_edge_list_str(&text, levels)
    }

    /// `rows x cols` lattice with 4-neighbour edges; vertex `r * cols + c`
    /// is labelled `"{r}_{c}"`.
    pub fn grid(rows: usize, cols: usize) -> Network {
        let labels = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| format!("{r}_{c}")))
            .collect();
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Network::from_edges(labels, &edges).expect("grid is a simple graph")
    }

    pub fn path(n: usize) -> Network {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Network::from_edges(numbered(n), &edges).expect("path is a simple graph")
    }

    pub fn cycle(n: usize) -> Network {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Network::from_edges(numbered(n), &edges).expect("cycle is a simple graph")
    }

    pub fn complete(n: usize) -> Network {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Network::from_edges(numbered(n), &edges).expect("complete graph is simple")
    }

    pub fn star(n: usize) -> Network {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Network::from_edges(numbered(n), &edges).expect("star is a simple graph")
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n_vertices();
        let mut a = DMatrix::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n_vertices();
        let mut l = -self.adjacency();
        for v in 0..n {
            l[(v, v)] = self.adj[v].len() as f64;
        }
        l
    }

    /// Subgraph on the vertices `vs` (indices into this network). Vertex `i`
    /// of the result is `vs[i]` after sorting and de-duplicating `vs`.
    pub fn induced_by_index(&self, vs: &[usize]) -> Result<(Network, Vec<usize>)> {
        let mut keep: Vec<usize> = vs.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&v| v >= self.n_vertices()) {
            return Err(Error::Graph(format!("vertex index {bad} out of range")));
        }
        let mut local = vec![usize::MAX; self.n_vertices()];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if local[u] != usize::MAX && local[v] != usize::MAX {
                edges.push((local[u], local[v]));
            }
        }
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let sub = Network::from_edges(labels, &edges)?;
        Ok((sub, keep))
    }

    /// Subgraph induced by the labelled vertices `vs`.
    pub fn induced_subgraph(&self, vs: &[&str]) -> Result<Network> {
        let idx = vs
            .iter()
            .map(|l| {
                self.vertex_index(l)
                    .ok_or_else(|| Error::Graph(format!("unknown vertex `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.induced_by_index(&idx)?.0)
    }

    /// Maximal connected vertex sets, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n_vertices() <= 1 || self.connected_components().len() == 1
    }

    /// Whether the vertex set `vs` induces a connected subgraph.
    pub fn is_connected_subset(&self, vs: &[usize]) -> bool {
        if vs.len() <= 1 {
            return true;
        }
        let mut inside = vec![false; self.n_vertices()];
        for &v in vs {
            inside[v] = true;
        }
        let mut seen = vec![false; self.n_vertices()];
        let mut stack = vec![vs[0]];
        seen[vs[0]] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == vs.len()
    }
}

fn numbered(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Named networks referenced by schema columns.
pub type NetworkSet = BTreeMap<String, Arc<Network>>;

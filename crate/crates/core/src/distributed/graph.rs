use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::schedule::TransitionMatrix;

/// Undirected, connected communication graph over nodes `0..n_nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

/// On-disk layout: `n_nodes = 4` and `edges = [[0, 1], [1, 2], ...]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n_nodes: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n_nodes || b >= n_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a node outside 0..{n_nodes}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let g = Graph {
            n_nodes,
            edges: set,
            adjacency,
        };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Self::path(n);
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn star(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (0, i)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Random spanning tree plus each remaining pair with probability `extra_edge_prob`.
    pub fn random_connected(n: usize, extra_edge_prob: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 1..n {
            edges.push((rng.random_range(0..i), i));
        }
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < extra_edge_prob {
                    edges.push((i, j));
                }
            }
        }
        Self::new(n, edges)
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Self::new(file.n_nodes, file.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n_nodes: self.n_nodes,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(&toml::from_str(&text)?)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_nodes];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Metropolis-Hastings weights `P[i][j] = min(1/deg i, 1/deg j)` on edges,
/// with the leftover mass on the diagonal. Each node only needs its
/// neighbors' degrees. The matrix is symmetric, hence doubly stochastic,
/// and its stationary distribution is uniform.
pub fn build_metropolis_transitions(graph: &Graph) -> Result<TransitionMatrix> {
    let n = graph.n_nodes();
    let mut p = Matrix::zeros(n, n);
    for (a, b) in graph.edges() {
        let w = (1.0 / graph.degree(a) as f64).min(1.0 / graph.degree(b) as f64);
        p[(a, b)] = w;
        p[(b, a)] = w;
    }
    for i in 0..n {
        let off: f64 = graph.neighbors(i).iter().map(|&j| p[(i, j)]).sum();
        p[(i, i)] = (1.0 - off).max(0.0);
    }
    TransitionMatrix::new(p)
}

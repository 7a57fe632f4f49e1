//! Undirected weighted graphs and rows of the normalized Laplacian
//! `L = I - D^{-1} W`.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Weights below this are indistinguishable from an absent edge.
pub const MIN_WEIGHT: f64 = 1e-12;

/// Undirected weighted graph in compressed adjacency form.
///
/// Every node has at least one incident edge, weights are symmetric and
/// strictly positive, and there are no self-loops. The graph is immutable once
/// built.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

/// One row of the normalized Laplacian, restricted to its non-zero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianRow {
    pub owner: usize,
    /// `(node, L[owner][node])` in ascending node order, diagonal included.
    pub entries: Vec<(usize, f64)>,
}

impl LaplacianRow {
    pub fn diagonal(&self) -> f64 {
        self.entries
            .iter()
            .find(|(j, _)| *j == self.owner)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries
            .iter()
            .copied()
            .filter(move |(j, _)| *j != self.owner)
    }

    /// `sum_j L[owner][j] * x[j]`.
    pub fn apply(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, v)| v * x[j]).sum()
    }
}

/// Builds a graph from an edge list, inferring the node count from the
/// largest id.
pub fn build_graph(edges: &[(usize, usize, f64)]) -> Result<Graph> {
    let n = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    Graph::from_edges(n, edges)
}

impl Graph {
    /// Builds a graph on nodes `0..n`.
    ///
    /// An edge may be listed once in either direction, or once in each
    /// direction with the same weight. Anything else is rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        // key (lo, hi) -> (weight, first listed as (lo, hi)?, mirrored seen)
        let mut seen: BTreeMap<(usize, usize), (f64, bool, bool)> = BTreeMap::new();
        for &(i, j, w) in edges {
            for id in [i, j] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !w.is_finite() || w < MIN_WEIGHT {
                return Err(Error::NonPositiveWeight { i, j, w });
            }
            let key = (i.min(j), i.max(j));
            let forward = i < j;
            match seen.get_mut(&key) {
                None => {
                    seen.insert(key, (w, forward, false));
                }
                Some((w0, fwd0, mirrored)) => {
                    if *fwd0 == forward || *mirrored {
                        return Err(Error::DuplicateEdge { i, j });
                    }
                    if *w0 != w {
                        return Err(Error::NonSymmetric {
                            i: j,
                            j: i,
                            w_ij: *w0,
                            w_ji: w,
                        });
                    }
                    *mirrored = true;
                }
            }
        }

        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(a, b), &(w, _, _)) in &seen {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * seen.len());
        let mut weights = Vec::with_capacity(2 * seen.len());
        let mut degree = Vec::with_capacity(n);
        offsets.push(0);
        for (i, mut row) in adj.into_iter().enumerate() {
            if row.is_empty() {
                return Err(Error::IsolatedNode(i));
            }
            row.sort_by_key(|&(j, _)| j);
            degree.push(row.iter().map(|&(_, w)| w).sum());
            for (j, w) in row {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(Graph {
            offsets,
            targets,
            weights,
            degree,
        })
    }

    pub fn node_count(&self) -> usize {
        self.degree.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Weighted degree `d_i = sum_l W_il`.
    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Number of incident edges of `i`.
    pub fn neighbor_count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// `(neighbor, weight)` pairs in ascending neighbor order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.targets[range.clone()].binary_search(&j) {
            Ok(pos) => self.weights[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| i < j)
                .map(move |(j, w)| (i, j, w))
        })
    }

    pub fn laplacian_row(&self, i: usize) -> Result<LaplacianRow> {
        let n = self.node_count();
        if i >= n {
            return Err(Error::NodeOutOfRange { id: i, n });
        }
        let d = self.degree[i];
        let mut entries = Vec::with_capacity(self.neighbor_count(i) + 1);
        let mut placed = false;
        for (j, w) in self.neighbors(i) {
            if !placed && j > i {
                entries.push((i, 1.0));
                placed = true;
            }
            entries.push((j, -w / d));
        }
        if !placed {
            entries.push((i, 1.0));
        }
        Ok(LaplacianRow { owner: i, entries })
    }

    pub fn laplacian_rows(&self) -> Vec<LaplacianRow> {
        (0..self.node_count())
            .map(|i| self.laplacian_row(i).expect("id in range"))
            .collect()
    }

    /// Dense row-major `L = I - D^{-1} W`.
    pub fn dense_laplacian(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n + i] = 1.0;
            for (j, w) in self.neighbors(i) {
                l[i * n + j] = -w / self.degree[i];
            }
        }
        l
    }

    /// Dense row-major `L_sym = D^{-1/2} (D - W) D^{-1/2}`.
    pub fn dense_symmetric_laplacian(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n + i] = 1.0;
            for (j, w) in self.neighbors(i) {
                l[i * n + j] = -w / (self.degree[i] * self.degree[j]).sqrt();
            }
        }
        l
    }

    /// Component id per node, labelled in order of the lowest node id.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                for (j, _) in self.neighbors(i) {
                    if comp[j] == usize::MAX {
                        comp[j] = next;
                        queue.push_back(j);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn ensure_connected(&self) -> Result<()> {
        match self.component_count() {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }
}

//! Graph representation and the matrices derived from it.
//!
//! Node indices are 1-based at the API boundary so that edge lists can be
//! copied verbatim from tables; everything is 0-based internally.

mod io;
mod order;
mod random;

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub use io::{format_graph, parse_graph};
pub use order::{bandwidth, lower_support, permute, profile, rcm_order, Permutation};
pub use random::random_connected;

/// A weighted edge with 1-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(source: usize, target: usize, weight: f64) -> Self {
        Edge {
            source,
            target,
            weight,
        }
    }
}

impl From<(usize, usize, f64)> for Edge {
    fn from((source, target, weight): (usize, usize, f64)) -> Self {
        Edge::new(source, target, weight)
    }
}

/// Laplacian constructions for undirected graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaplacianKind {
    /// Diagonal = neighbor count, off-diagonal = -1 for every neighbor.
    UnnormalizedConstant,
    /// Diagonal = sum of incident weights, off-diagonal = -weight.
    GeneralWeighted,
    /// `D^{-1/2} L D^{-1/2}` with `D = diag(L)` of the weighted Laplacian.
    NormalizedSymmetric,
    /// `D^{-1} L`; rows still sum to zero but the matrix is asymmetric.
    NormalizedRandomWalk,
}

/// Immutable weighted graph. Undirected edges are stored once with `source <= target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and normalizes an edge list.
    pub fn new<I, E>(n: usize, directed: bool, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for e in edges {
            let mut e: Edge = e.into();
            for idx in [e.source, e.target] {
                if idx == 0 || idx > n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            if !e.weight.is_finite() {
                return Err(Error::NonFiniteWeight {
                    from: e.source,
                    to: e.target,
                });
            }
            if !directed && e.source > e.target {
                std::mem::swap(&mut e.source, &mut e.target);
            }
            if !seen.insert((e.source, e.target)) {
                return Err(Error::DuplicateEdge {
                    from: e.source,
                    to: e.target,
                });
            }
            out.push(e);
        }
        Ok(Graph {
            n,
            directed,
            edges: out,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of stored entries, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// 0-based neighbor lists of the undirected skeleton, sorted, self-loops dropped.
    pub fn skeleton_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            let (a, b) = (e.source - 1, e.target - 1);
            if a == b {
                continue;
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Neighbor counts in the undirected skeleton.
    pub fn degrees(&self) -> Vec<usize> {
        self.skeleton_neighbors().iter().map(Vec::len).collect()
    }

    /// True iff every node is reachable from node 1 in the undirected skeleton.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        reach_count(&self.skeleton_neighbors(), 0) == self.n
    }

    /// Strong connectivity over the directed edges (self-loops ignored).
    /// For undirected graphs this equals [`Graph::is_connected`].
    pub fn is_strongly_connected(&self) -> bool {
        if !self.directed {
            return self.is_connected();
        }
        if self.n == 0 {
            return true;
        }
        let mut fwd = vec![Vec::new(); self.n];
        let mut bwd = vec![Vec::new(); self.n];
        for e in &self.edges {
            if e.source != e.target {
                fwd[e.source - 1].push(e.target - 1);
                bwd[e.target - 1].push(e.source - 1);
            }
        }
        reach_count(&fwd, 0) == self.n && reach_count(&bwd, 0) == self.n
    }

    /// Matrix with entry `(source, target) = weight`, mirrored for undirected graphs.
    /// Self-loops land on the diagonal.
    pub fn weight_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            m[(e.source - 1, e.target - 1)] = e.weight;
            if !self.directed {
                m[(e.target - 1, e.source - 1)] = e.weight;
            }
        }
        m
    }

    /// 0/1 adjacency of the undirected skeleton, without self-loops.
    pub fn skeleton_adjacency(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for (k, list) in self.skeleton_neighbors().iter().enumerate() {
            for &l in list {
                m[(k, l)] = 1.0;
            }
        }
        m
    }

    pub fn laplacian(&self, kind: LaplacianKind) -> Result<DenseMatrix> {
        if self.directed {
            return Err(Error::DirectedGraph);
        }
        let n = self.n;
        let mut l = DenseMatrix::zeros(n, n);
        for e in &self.edges {
            let (a, b) = (e.source - 1, e.target - 1);
            if a == b {
                continue;
            }
            let c = match kind {
                LaplacianKind::UnnormalizedConstant => 1.0,
                _ => e.weight,
            };
            l[(a, b)] -= c;
            l[(b, a)] -= c;
            l[(a, a)] += c;
            l[(b, b)] += c;
        }
        match kind {
            LaplacianKind::UnnormalizedConstant | LaplacianKind::GeneralWeighted => Ok(l),
            LaplacianKind::NormalizedSymmetric | LaplacianKind::NormalizedRandomWalk => {
                let diag: Vec<f64> = (0..n).map(|k| l[(k, k)]).collect();
                if let Some(k) = diag.iter().position(|&d| d == 0.0) {
                    return Err(Error::ZeroDegreeNode(k + 1));
                }
                if kind == LaplacianKind::NormalizedSymmetric {
                    let s: Vec<f64> = diag.iter().map(|d| 1.0 / d.abs().sqrt()).collect();
                    Ok(DenseMatrix::from_fn(n, n, |i, j| s[i] * l[(i, j)] * s[j]))
                } else {
                    Ok(DenseMatrix::from_fn(n, n, |i, j| l[(i, j)] / diag[i]))
                }
            }
        }
    }

    /// Renumbers nodes so that old node `p.old_of(i)` becomes node `i`.
    pub fn relabel(&self, p: &Permutation) -> Result<Graph> {
        if p.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        let new_of_old = p.inverse();
        let edges = self.edges.iter().map(|e| {
            Edge::new(
                new_of_old.old_of(e.source - 1) + 1,
                new_of_old.old_of(e.target - 1) + 1,
                e.weight,
            )
        });
        Graph::new(self.n, self.directed, edges)
    }
}

/// "Right Laplacian" of a square weight matrix: off-diagonal entries negated,
/// diagonal set so that every row sums to zero. Diagonal input entries are ignored.
pub fn right_laplacian(weights: &DenseMatrix) -> Result<DenseMatrix> {
    let n = crate::matrix::ensure_square(weights)?;
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && weights[(i, j)] != 0.0 {
                l[(i, j)] = -weights[(i, j)];
                l[(i, i)] += weights[(i, j)];
            }
        }
    }
    Ok(l)
}

fn reach_count(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count
}

//! Node reorderings: permutations, bandwidth/profile measures and reverse Cuthill-McKee.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::matrix::{ensure_square, DenseMatrix};

/// Bijection on node indices stored as `new -> old` (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    new_to_old: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            new_to_old: (0..n).collect(),
        }
    }

    /// `order[i]` is the (1-based) old index that becomes new index `i + 1`.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut zero = Vec::with_capacity(n);
        for &o in order {
            if o == 0 || o > n {
                return Err(Error::IndexOutOfRange { index: o, n });
            }
            zero.push(o - 1);
        }
        Self::from_zero_based(zero)
    }

    pub fn from_zero_based(new_to_old: Vec<usize>) -> Result<Self> {
        let n = new_to_old.len();
        let mut seen = vec![false; n];
        for &o in &new_to_old {
            if o >= n {
                return Err(Error::IndexOutOfRange { index: o + 1, n });
            }
            if seen[o] {
                return Err(Error::InvalidParameter(format!(
                    "index {} repeated in permutation",
                    o + 1
                )));
            }
            seen[o] = true;
        }
        Ok(Permutation { new_to_old })
    }

    pub fn len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_to_old.is_empty()
    }

    /// Old (0-based) index sitting at new position `new`.
    pub fn old_of(&self, new: usize) -> usize {
        self.new_to_old[new]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.new_to_old
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.new_to_old.iter().map(|o| o + 1).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (new, &old) in self.new_to_old.iter().enumerate() {
            inv[old] = new;
        }
        Permutation { new_to_old: inv }
    }

    /// Reorders a node-indexed vector: `out[i] = v[old_of(i)]`.
    pub fn apply<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.new_to_old.iter().map(|&o| v[o].clone()).collect()
    }

    /// Inverse of [`Permutation::apply`].
    pub fn unapply<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.inverse().apply(v)
    }
}

/// Symmetric conjugation `P M P^T`: `result(i, j) = m(old_of(i), old_of(j))`.
pub fn permute(m: &DenseMatrix, p: &Permutation) -> Result<DenseMatrix> {
    let n = ensure_square(m)?;
    if p.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: p.len(),
        });
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        m[(p.old_of(i), p.old_of(j))]
    }))
}

/// Largest `|i - j|` over nonzero off-diagonal entries.
pub fn bandwidth(m: &DenseMatrix) -> usize {
    let mut bw = 0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                bw = bw.max(i.abs_diff(j));
            }
        }
    }
    bw
}

/// Envelope size: for each row, the distance from the diagonal to its first
/// nonzero entry on or left of it (pattern taken symmetrically).
pub fn profile(m: &DenseMatrix) -> usize {
    let n = m.nrows();
    let mut total = 0;
    for i in 0..n {
        let first = (0..i)
            .find(|&j| m[(i, j)] != 0.0 || m[(j, i)] != 0.0)
            .unwrap_or(i);
        total += i - first;
    }
    total
}

/// Lower-triangular support in columns `1..n-1`, diagonal always included.
pub fn lower_support(m: &DenseMatrix) -> Result<DMatrix<bool>> {
    let n = ensure_square(m)?;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "lower support needs at least two nodes".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, n - 1, |k, l| {
        k == l || (k > l && m[(k, l)] != 0.0)
    }))
}

/// Reverse Cuthill-McKee ordering of the undirected skeleton.
///
/// The traversal starts from a pseudo-peripheral node (repeated BFS from a
/// minimum-degree node) and visits neighbors by increasing degree, lowest
/// index first. If the input ordering already has a strictly smaller
/// bandwidth and every node but the last has a higher-numbered neighbor,
/// the identity is returned instead.
pub fn rcm_order(g: &Graph) -> Result<Permutation> {
    let n = g.n();
    if n == 0 {
        return Ok(Permutation::identity(0));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let adj = g.skeleton_neighbors();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let start = (0..n).min_by_key(|&v| (degree[v], v)).unwrap();
    let root = pseudo_peripheral(&adj, &degree, start);

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut queue = VecDeque::from([root]);
    visited[root] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
        next.sort_by_key(|&v| (degree[v], v));
        for v in next {
            visited[v] = true;
            queue.push_back(v);
        }
    }
    order.reverse();
    let rcm = Permutation::from_zero_based(order)?;

    let identity = Permutation::identity(n);
    if ordering_bandwidth(&adj, &identity) < ordering_bandwidth(&adj, &rcm)
        && has_later_neighbors(&adj)
    {
        return Ok(identity);
    }
    Ok(rcm)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], start: usize) -> usize {
    let mut root = start;
    let (mut depth, mut last) = bfs_last_level(adj, root);
    loop {
        let candidate = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (d, l) = bfs_last_level(adj, candidate);
        if d > depth {
            root = candidate;
            depth = d;
            last = l;
        } else {
            return root;
        }
    }
}

fn bfs_last_level(adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; adj.len()];
    level[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &adj[u] {
                if level[v] == usize::MAX {
                    level[v] = depth + 1;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

fn ordering_bandwidth(adj: &[Vec<usize>], p: &Permutation) -> usize {
    let pos = p.inverse();
    let mut bw = 0;
    for (u, list) in adj.iter().enumerate() {
        for &v in list {
            bw = bw.max(pos.old_of(u).abs_diff(pos.old_of(v)));
        }
    }
    bw
}

fn has_later_neighbors(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    (0..n.saturating_sub(1)).all(|u| adj[u].iter().any(|&v| v > u))
}

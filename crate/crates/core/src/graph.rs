//! Graph view of a sparse matrix: BFS distances and exact diameter.
//!
//! Nodes are unknowns; edges are the symmetrized off-diagonal nonzero pattern
//! with the diagonal ignored. Distances count edge hops, which bounds how far
//! a single sparse product can move information.

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Hard guard on the node count for all-pairs sweeps.
pub const DIAMETER_GUARD: usize = 100_000;
/// Above this node count the all-pairs sweep logs a warning.
pub const DIAMETER_WARN: usize = 10_000;

/// Symmetrized adjacency lists of the nonzero pattern, diagonal dropped.
fn adjacency(a: &CsrMatrix) -> Result<Vec<Vec<usize>>> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let n = a.n_rows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.iter_entries() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    Ok(adj)
}

fn bfs(adj: &[Vec<usize>], sources: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Minimum edge count from any source to every node; `None` marks nodes that
/// are unreachable from the source set.
pub fn bfs_distances(a: &CsrMatrix, sources: &[usize]) -> Result<Vec<Option<usize>>> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    let n = a.n_rows();
    for &s in sources {
        if s >= n {
            return Err(Error::IndexOutOfRange { index: s, len: n });
        }
    }
    let adj = adjacency(a)?;
    Ok(bfs(&adj, sources))
}

/// Exact graph diameter via all-pairs BFS.
///
/// Fails on disconnected graphs, reporting the component count.
pub fn graph_diameter(a: &CsrMatrix) -> Result<usize> {
    let n = a.n_rows();
    if n > DIAMETER_GUARD {
        return Err(Error::SizeGuard {
            context: "graph_diameter",
            required: n,
            guard: DIAMETER_GUARD,
        });
    }
    if n > DIAMETER_WARN {
        log::warn!("graph_diameter: all-pairs BFS on {n} nodes may be slow");
    }
    if n == 0 {
        return Ok(0);
    }
    let adj = adjacency(a)?;

    let first = bfs(&adj, &[0]);
    if first.iter().any(Option::is_none) {
        let mut components = 0;
        let mut seen = vec![false; n];
        for s in 0..n {
            if !seen[s] {
                components += 1;
                for (v, d) in bfs(&adj, &[s]).iter().enumerate() {
                    if d.is_some() {
                        seen[v] = true;
                    }
                }
            }
        }
        return Err(Error::Disconnected { components });
    }

    let mut diameter = 0;
    for s in 0..n {
        for d in bfs(&adj, &[s]).into_iter().flatten() {
            diameter = diameter.max(d);
        }
    }
    Ok(diameter)
}

//! Color-avoiding components.
//!
//! Two vertices are CA-connected when they are connected in `G^i` for every
//! color `i`. The CA-partition is therefore the meet of the `k` component
//! partitions of the color-avoided views.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{ColoredMultigraph, GraphView, ViewMode};
use crate::partition::Partition;
use crate::union_find::UnionFind;

/// Largest `n` accepted by [`ca_partition_oracle`].
pub const ORACLE_MAX_N: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct CaReport {
    pub partition: Partition,
    /// `ℓ ↦ N_ℓ`.
    pub histogram: BTreeMap<usize, usize>,
    pub max_size: usize,
    /// Component partitions of `G^1, …, G^k`.
    pub avoided_partitions: Vec<Partition>,
}

impl CaReport {
    pub fn count(&self, size: usize) -> usize {
        self.histogram.get(&size).copied().unwrap_or(0)
    }
}

pub fn components(view: &GraphView<'_>) -> Partition {
    let mut uf = UnionFind::new(view.graph().n());
    for (u, v) in view.raw_edges() {
        uf.union(u, v);
    }
    Partition::from_union_find(&mut uf)
}

/// Connected components of `G^i`.
pub fn components_avoiding(g: &ColoredMultigraph, color: usize) -> Result<Partition> {
    Ok(components(&g.view(ViewMode::Avoid(color))?))
}

pub fn size_census(p: &Partition) -> BTreeMap<usize, usize> {
    p.size_census()
}

pub fn ca_partition(g: &ColoredMultigraph) -> CaReport {
    let avoided: Vec<Partition> = (0..g.k())
        .into_par_iter()
        .map(|i| components_avoiding(g, i).expect("color in range"))
        .collect();
    let partition = match avoided.split_first() {
        None => Partition::singletons(g.n()),
        Some((first, rest)) => rest.iter().fold(first.clone(), |acc, p| {
            acc.meet(p).expect("same vertex set")
        }),
    };
    let histogram = partition.size_census();
    let max_size = histogram.keys().next_back().copied().unwrap_or(0);
    CaReport {
        partition,
        histogram,
        max_size,
        avoided_partitions: avoided,
    }
}

/// Pairwise CA-relation by breadth-first search in every `G^i`.
///
/// `result[u][v]` is true iff `v` is reachable from `u` in all `k` avoided views.
pub fn ca_relation(g: &ColoredMultigraph) -> Result<Vec<Vec<bool>>> {
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_N });
    }
    let mut rel = vec![vec![true; n]; n];
    for color in 0..g.k() {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in g.view(ViewMode::Avoid(color))?.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, row) in rel.iter_mut().enumerate() {
            let mut seen = vec![false; n];
            seen[u] = true;
            let mut queue = VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            for (cell, reached) in row.iter_mut().zip(seen) {
                *cell &= reached;
            }
        }
    }
    Ok(rel)
}

/// Brute-force CA-partition for small graphs (`n ≤ 16`), independent of
/// union-find and partition meets.
pub fn ca_partition_oracle(g: &ColoredMultigraph) -> Result<Partition> {
    let rel = ca_relation(g)?;
    let keys = rel
        .iter()
        .map(|row| row.iter().position(|&c| c).expect("reflexive"));
    Ok(Partition::from_keys(keys))
}

//! Set partitions of `0..n` with canonical labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::union_find::UnionFind;

/// `label[v]` is the smallest element of the block containing `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    label: Vec<usize>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Partition {
            label: (0..n).collect(),
        }
    }

    pub fn one_block(n: usize) -> Self {
        Partition { label: vec![0; n] }
    }

    /// Canonicalizes arbitrary block identifiers: elements with equal keys
    /// share a block.
    pub fn from_keys<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut first: HashMap<K, usize> = HashMap::new();
        let label = keys
            .into_iter()
            .enumerate()
            .map(|(v, key)| *first.entry(key).or_insert(v))
            .collect();
        Partition { label }
    }

    pub fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.len();
        // Scanning in increasing order, the first member seen of each root is its minimum.
        let mut rep = vec![usize::MAX; n];
        let label = (0..n)
            .map(|v| {
                let r = uf.find(v);
                if rep[r] == usize::MAX {
                    rep[r] = v;
                }
                rep[r]
            })
            .collect();
        Partition { label }
    }

    pub fn n(&self) -> usize {
        self.label.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }

    pub fn label(&self, v: usize) -> usize {
        self.label[v]
    }

    pub fn same_block(&self, u: usize, v: usize) -> bool {
        self.label[u] == self.label[v]
    }

    /// Coarsest common refinement: `v`, `w` share a block iff they do in both.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch(self.n(), other.n()));
        }
        Ok(Partition::from_keys(
            self.label.iter().zip(&other.label).map(|(&a, &b)| (a, b)),
        ))
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n() == coarser.n()
            && (0..self.n()).all(|v| coarser.label[v] == coarser.label[self.label[v]])
    }

    /// Blocks in order of representative, each sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut index = vec![usize::MAX; self.n()];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (v, &rep) in self.label.iter().enumerate() {
            if index[rep] == usize::MAX {
                index[rep] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[index[rep]].push(v);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.n()];
        for &rep in &self.label {
            count[rep] += 1;
        }
        count.into_iter().filter(|&c| c > 0).collect()
    }

    /// `ℓ ↦ N_ℓ`, the number of blocks of size exactly `ℓ`.
    pub fn size_census(&self) -> BTreeMap<usize, usize> {
        let mut census = BTreeMap::new();
        for s in self.block_sizes() {
            *census.entry(s).or_insert(0) += 1;
        }
        census
    }

    pub fn max_block(&self) -> usize {
        self.block_sizes().into_iter().max().unwrap_or(0)
    }

    pub fn block_count(&self) -> usize {
        self.label.iter().enumerate().filter(|(v, &r)| *v == r).count()
    }

    /// `block <rep>: v1 v2 …`, one line per block, sorted by representative.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for b in self.blocks() {
            let members: Vec<String> = b.iter().map(usize::to_string).collect();
            writeln!(s, "block {}: {}", b[0], members.join(" ")).unwrap();
        }
        s
    }
}

//! Structures that carry CA-components: repeated edges, short cycles and
//! their color separation, and per-component excess.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ca::{self, CaReport};
use crate::error::{Error, Result};
use crate::graph::{ColorSet, ColoredMultigraph, Edge, ViewMode};
use crate::partition::Partition;

pub const DEFAULT_MAX_CYCLE_LEN: usize = 16;
pub const MAX_CYCLE_LEN_CAP: usize = 24;

/// Adjacency of the collapsed simple graph `G`, with the color set of each edge.
#[derive(Debug, Clone)]
pub struct ColoredAdjacency {
    offsets: Vec<usize>,
    targets: Vec<(usize, ColorSet)>,
}

impl ColoredAdjacency {
    pub fn new(g: &ColoredMultigraph) -> Self {
        Self::from_colored_edges(g.n(), &g.colored_edges())
    }

    fn from_colored_edges(n: usize, edges: &[(Edge, ColorSet)]) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &((u, v), _) in edges {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![(0, ColorSet::EMPTY); 2 * edges.len()];
        for &((u, v), c) in edges {
            targets[fill[u]] = (v, c);
            fill[u] += 1;
            targets[fill[v]] = (u, c);
            fill[v] += 1;
        }
        ColoredAdjacency { offsets, targets }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, ColorSet)] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn colors(&self, u: usize, v: usize) -> Option<ColorSet> {
        self.neighbors(u).iter().find(|(w, _)| *w == v).map(|&(_, c)| c)
    }

    /// Membership in the 2-core (vertices left after repeatedly deleting
    /// vertices of degree at most one). Every cycle lies in the 2-core.
    pub fn two_core(&self) -> Vec<bool> {
        let n = self.n();
        let mut deg: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &(w, _) in self.neighbors(v) {
                if alive[w] {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        stack.push(w);
                    }
                }
            }
        }
        alive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatedEdge {
    pub edge: Edge,
    pub colors: ColorSet,
}

/// Every pair present in at least two layers, with its color set.
pub fn repeated_edges(g: &ColoredMultigraph) -> Vec<RepeatedEdge> {
    g.colored_edges()
        .into_iter()
        .filter(|(_, c)| c.len() >= 2)
        .map(|(edge, colors)| RepeatedEdge { edge, colors })
        .collect()
}

/// A simple cycle of `G` in canonical orientation: smallest vertex first,
/// then its smaller cycle neighbor. `edge_colors[i]` belongs to the edge
/// `vertices[i] – vertices[(i + 1) % len]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub vertices: Vec<usize>,
    pub edge_colors: Vec<ColorSet>,
    pub max_parts: usize,
}

impl CycleRecord {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `length,colors,max_parts` with colors 1-based, `|` within an edge and
    /// `;` between edges.
    pub fn csv_row(&self) -> String {
        let colors: Vec<String> = self.edge_colors.iter().map(ToString::to_string).collect();
        format!("{},{},{}", self.len(), colors.join(";"), self.max_parts)
    }
}

pub const CYCLE_CSV_HEADER: &str = "length,colors,max_parts";

fn check_max_len(max_len: usize) -> Result<()> {
    if (3..=MAX_CYCLE_LEN_CAP).contains(&max_len) {
        Ok(())
    } else {
        Err(Error::CycleLenOutOfRange(max_len))
    }
}

/// All simple cycles of the collapsed graph with length in `3..=max_len`,
/// each exactly once, ordered by starting vertex then discovery order.
pub fn enumerate_cycles(g: &ColoredMultigraph, max_len: usize) -> Result<Vec<CycleRecord>> {
    check_max_len(max_len)?;
    let adj = ColoredAdjacency::new(g);
    Ok(enumerate_with(&adj, max_len))
}

fn enumerate_with(adj: &ColoredAdjacency, max_len: usize) -> Vec<CycleRecord> {
    let core = adj.two_core();
    let starts: Vec<usize> = (0..adj.n()).filter(|&v| core[v]).collect();
    starts
        .par_iter()
        .flat_map_iter(|&s| {
            let mut out = Vec::new();
            let mut path = vec![s];
            let mut colors = Vec::new();
            cycles_from(adj, &core, max_len, &mut path, &mut colors, &mut out);
            out
        })
        .collect()
}

fn cycles_from(
    adj: &ColoredAdjacency,
    core: &[bool],
    max_len: usize,
    path: &mut Vec<usize>,
    colors: &mut Vec<ColorSet>,
    out: &mut Vec<CycleRecord>,
) {
    let start = path[0];
    let last = *path.last().unwrap();
    for &(w, c) in adj.neighbors(last) {
        if w == start {
            // Each cycle is found twice, once per direction; keep the one
            // whose second vertex is smaller than its last.
            if path.len() >= 3 && path[1] < last {
                let mut edge_colors = colors.clone();
                edge_colors.push(c);
                let max_parts = max_separation(&edge_colors).expect("nonempty color sets");
                out.push(CycleRecord {
                    vertices: path.clone(),
                    edge_colors,
                    max_parts,
                });
            }
            continue;
        }
        if w < start || !core[w] || path.len() >= max_len || path.contains(&w) {
            continue;
        }
        path.push(w);
        colors.push(c);
        cycles_from(adj, core, max_len, path, colors, out);
        colors.pop();
        path.pop();
    }
}

/// Largest `ℓ` such that the cyclic sequence of edge color sets splits into
/// `ℓ` consecutive nonempty arcs whose color unions are pairwise disjoint.
pub fn max_separation(edge_colors: &[ColorSet]) -> Result<usize> {
    if edge_colors.is_empty() {
        return Err(Error::Domain("empty cycle".into()));
    }
    if let Some(i) = edge_colors.iter().position(|c| c.is_empty()) {
        return Err(Error::EmptyColorSet(i));
    }
    let len = edge_colors.len();
    let distinct = edge_colors.iter().fold(ColorSet::EMPTY, |a, &c| a.union(c)).len();
    let bound = len.min(distinct);
    let mut best = 1;
    for first in 0..len {
        best = best.max(arcs_from(edge_colors, first, first + len, ColorSet::EMPTY, 0));
        if best == bound {
            break;
        }
    }
    Ok(best)
}

/// Most arcs covering positions `pos..end` (cyclic indices) when the arcs
/// so far used `used` colors; `0` if no split is possible.
fn arcs_from(
    colors: &[ColorSet],
    pos: usize,
    end: usize,
    used: ColorSet,
    count: usize,
) -> usize {
    let len = colors.len();
    let mut arc = ColorSet::EMPTY;
    let mut best = 0;
    for stop in pos + 1..=end {
        arc = arc.union(colors[(stop - 1) % len]);
        if arc.intersects(used) {
            break;
        }
        if stop == end {
            best = best.max(count + 1);
        } else {
            best = best.max(arcs_from(colors, stop, end, used.union(arc), count + 1));
        }
    }
    best
}

/// Per-component structure of `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    /// Smallest vertex of the component.
    pub rep: usize,
    pub size: usize,
    pub edges: usize,
    /// `edges − size + 1`.
    pub excess: usize,
    pub repeated: usize,
}

impl ComponentRecord {
    /// More than one cycle, a cycle together with a repeated edge, or two
    /// repeated edges.
    pub fn is_flagged(&self) -> bool {
        self.excess >= 2 || (self.excess >= 1 && self.repeated >= 1) || self.repeated >= 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcessCensus {
    /// Components with at least one edge, by representative.
    pub components: Vec<ComponentRecord>,
    pub flags: Vec<ComponentRecord>,
}

pub fn excess_census(g: &ColoredMultigraph) -> ExcessCensus {
    let comps = ca::components(&g.view(ViewMode::All).expect("all colors"));
    excess_with(&comps, &g.colored_edges())
}

fn excess_with(comps: &Partition, edges: &[(Edge, ColorSet)]) -> ExcessCensus {
    let mut by_rep: BTreeMap<usize, ComponentRecord> = BTreeMap::new();
    for &((u, _), c) in edges {
        let rep = comps.label(u);
        let rec = by_rep.entry(rep).or_insert(ComponentRecord {
            rep,
            size: 0,
            edges: 0,
            excess: 0,
            repeated: 0,
        });
        rec.edges += 1;
        if c.len() >= 2 {
            rec.repeated += 1;
        }
    }
    for &rep in comps.labels() {
        if let Some(rec) = by_rep.get_mut(&rep) {
            rec.size += 1;
        }
    }
    let components: Vec<ComponentRecord> = by_rep
        .into_values()
        .map(|mut r| {
            r.excess = r.edges + 1 - r.size;
            r
        })
        .collect();
    let flags = components.iter().filter(|r| r.is_flagged()).cloned().collect();
    ExcessCensus { components, flags }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusResult {
    /// Number of repeated edges.
    pub c2: usize,
    /// `m ↦ C_m` for `3 ≤ m ≤ max_len`.
    pub cm: BTreeMap<usize, usize>,
    /// `ℓ ↦ Y_ℓ`, cycles separated into exactly `ℓ` parts, `2 ≤ ℓ ≤ k`.
    pub y: BTreeMap<usize, usize>,
    pub flags: Vec<ComponentRecord>,
}

impl CensusResult {
    pub fn cycles(&self, m: usize) -> usize {
        self.cm.get(&m).copied().unwrap_or(0)
    }

    pub fn separated(&self, parts: usize) -> usize {
        self.y.get(&parts).copied().unwrap_or(0)
    }

    /// Summary object with keys `c2`, `cm`, `y`, `flags`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

pub fn census(g: &ColoredMultigraph, max_len: usize) -> Result<CensusResult> {
    check_max_len(max_len)?;
    let edges = g.colored_edges();
    let adj = ColoredAdjacency::from_colored_edges(g.n(), &edges);
    let cycles = enumerate_with(&adj, max_len);
    let mut cm: BTreeMap<usize, usize> = (3..=max_len).map(|m| (m, 0)).collect();
    let mut y: BTreeMap<usize, usize> = (2..=g.k()).map(|l| (l, 0)).collect();
    for c in &cycles {
        *cm.get_mut(&c.len()).expect("length within bound") += 1;
        if c.max_parts >= 2 {
            *y.entry(c.max_parts).or_insert(0) += 1;
        }
    }
    let comps = ca::components(&g.view(ViewMode::All)?);
    Ok(CensusResult {
        c2: edges.iter().filter(|(_, c)| c.len() >= 2).count(),
        cm,
        y,
        flags: excess_with(&comps, &edges).flags,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    SingleVertex,
    SingleEdge,
    Cycle(CycleRecord),
    Other,
}

/// Classifies the structure carrying each CA-component of one graph.
///
/// Uses the subcritical characterization: a repeated edge in a tree
/// component, or the unique cycle of a unicyclic component whose maximal
/// separation equals the block size. Anything else is reported as `Other`.
pub struct SupportClassifier<'a> {
    report: &'a CaReport,
    adj: ColoredAdjacency,
    comps: Partition,
    records: HashMap<usize, ComponentRecord>,
    core: Vec<bool>,
    core_start: HashMap<usize, usize>,
}

impl<'a> SupportClassifier<'a> {
    pub fn new(g: &ColoredMultigraph, report: &'a CaReport) -> Self {
        let edges = g.colored_edges();
        let adj = ColoredAdjacency::from_colored_edges(g.n(), &edges);
        let comps = ca::components(&g.view(ViewMode::All).expect("all colors"));
        let records = excess_with(&comps, &edges)
            .components
            .into_iter()
            .map(|r| (r.rep, r))
            .collect();
        let core = adj.two_core();
        let mut core_start = HashMap::new();
        for v in (0..g.n()).filter(|&v| core[v]) {
            core_start.entry(comps.label(v)).or_insert(v);
        }
        SupportClassifier {
            report,
            adj,
            comps,
            records,
            core,
            core_start,
        }
    }

    pub fn classify(&self, block: &[usize]) -> Result<Support> {
        let ca = &self.report.partition;
        let Some(&first) = block.first() else {
            return Err(Error::NotCaBlock);
        };
        if block.iter().any(|&v| v >= ca.n()) {
            return Err(Error::NotCaBlock);
        }
        let label = ca.label(first);
        let block_size = ca.labels().iter().filter(|&&l| l == label).count();
        let mut sorted = block.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != block.len()
            || block_size != block.len()
            || block.iter().any(|&v| ca.label(v) != label)
        {
            return Err(Error::NotCaBlock);
        }
        if block.len() == 1 {
            return Ok(Support::SingleVertex);
        }
        let rep = self.comps.label(first);
        let Some(rec) = self.records.get(&rep) else {
            return Ok(Support::Other);
        };
        if block.len() == 2 && rec.excess == 0 {
            let repeated = self
                .adj
                .colors(sorted[0], sorted[1])
                .is_some_and(|c| c.len() >= 2);
            return Ok(if repeated { Support::SingleEdge } else { Support::Other });
        }
        if rec.excess != 1 {
            return Ok(Support::Other);
        }
        let cycle = self.unique_cycle(self.core_start[&rep]);
        if block.iter().all(|v| cycle.vertices.contains(v)) && cycle.max_parts == block.len() {
            Ok(Support::Cycle(cycle))
        } else {
            Ok(Support::Other)
        }
    }

    /// Walks the 2-core of a unicyclic component, which is its cycle.
    fn unique_cycle(&self, start: usize) -> CycleRecord {
        let core_nbrs = |v: usize| {
            self.adj
                .neighbors(v)
                .iter()
                .filter(|(w, _)| self.core[*w])
                .copied()
                .collect::<Vec<_>>()
        };
        let first = core_nbrs(start);
        debug_assert_eq!(first.len(), 2);
        let (next, c) = if first[0].0 < first[1].0 { first[0] } else { first[1] };
        let mut vertices = vec![start];
        let mut edge_colors = vec![c];
        let (mut prev, mut cur) = (start, next);
        while cur != start {
            vertices.push(cur);
            let &(w, c) = core_nbrs(cur)
                .iter()
                .find(|(w, _)| *w != prev)
                .expect("cycle vertex has two core neighbors");
            edge_colors.push(c);
            prev = cur;
            cur = w;
        }
        let max_parts = max_separation(&edge_colors).expect("nonempty colors");
        CycleRecord {
            vertices,
            edge_colors,
            max_parts,
        }
    }
}

/// One-shot classification; computes the CA-partition of `g` first.
pub fn classify_ca_support(g: &ColoredMultigraph, block: &[usize]) -> Result<Support> {
    let report = ca::ca_partition(g);
    SupportClassifier::new(g, &report).classify(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::figure1_gadget;

    fn g(n: usize, layers: Vec<Vec<Edge>>) -> ColoredMultigraph {
        ColoredMultigraph::from_layers(n, layers).unwrap()
    }

    fn cs(sets: &[&[usize]]) -> Vec<ColorSet> {
        sets.iter().map(|s| ColorSet::from_colors(s.iter().copied())).collect()
    }

    fn rainbow_triangle() -> ColoredMultigraph {
        g(3, vec![vec![(0, 1)], vec![(1, 2)], vec![(0, 2)]])
    }

    fn complete(v: usize) -> ColoredMultigraph {
        let edges = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
        g(v, vec![edges, vec![]])
    }

    #[test]
    fn repeated() {
        let r = repeated_edges(&g(3, vec![vec![(0, 1)], vec![(0, 1), (1, 2)]]));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].colors, ColorSet::from_colors([0, 1]));
        assert!(repeated_edges(&figure1_gadget(3, true)).is_empty());
    }

    #[test]
    fn cycles_small() {
        let t = enumerate_cycles(&rainbow_triangle(), 16).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].vertices, vec![0, 1, 2]);
        assert_eq!(t[0].max_parts, 3);

        let bowtie = g(5, vec![vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]]);
        assert_eq!(enumerate_cycles(&bowtie, 16).unwrap().len(), 2);

        let k4 = enumerate_cycles(&complete(4), 4).unwrap();
        assert_eq!(k4.iter().filter(|c| c.len() == 3).count(), 4);
        assert_eq!(k4.iter().filter(|c| c.len() == 4).count(), 3);
        assert!(enumerate_cycles(&complete(4), 2).is_err());
        assert!(enumerate_cycles(&complete(4), 25).is_err());
    }

    #[test]
    fn separation_cases() {
        assert_eq!(max_separation(&cs(&[&[0], &[1], &[2]])).unwrap(), 3);
        // alternating colors: each color's edges are interleaved with the
        // other's, so no two arcs can have disjoint colors
        assert_eq!(max_separation(&cs(&[&[0], &[1], &[0], &[1]])).unwrap(), 1);
        assert_eq!(max_separation(&cs(&[&[0], &[0], &[1], &[1]])).unwrap(), 2);
        assert_eq!(max_separation(&cs(&[&[0, 1], &[1], &[1, 2], &[1]])).unwrap(), 1);
        // an arc may wrap around the start of the sequence
        assert_eq!(max_separation(&cs(&[&[0], &[1], &[1], &[2], &[0]])).unwrap(), 3);
        assert_eq!(
            max_separation(&cs(&[&[0], &[], &[1]])),
            Err(Error::EmptyColorSet(1))
        );
    }

    #[test]
    fn census_cases() {
        let c = census(&rainbow_triangle(), 16).unwrap();
        assert_eq!((c.c2, c.cycles(3), c.separated(3)), (0, 1, 1));
        let doubled = census(&g(2, vec![vec![(0, 1)], vec![(0, 1)]]), 16).unwrap();
        assert_eq!(doubled.c2, 1);
        assert!(doubled.cm.values().all(|&v| v == 0));
        let json = c.to_json();
        for key in ["c2", "cm", "y", "flags"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn excess_cases() {
        let tree = excess_census(&g(4, vec![vec![(0, 1), (1, 2), (1, 3)]]));
        assert_eq!(tree.components.len(), 1);
        assert_eq!(tree.components[0].excess, 0);
        assert!(tree.flags.is_empty());

        let bowtie = g(5, vec![vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]]);
        let e = excess_census(&bowtie);
        assert_eq!(e.flags.len(), 1);
        assert_eq!(e.flags[0].excess, 2);

        let tri_doubled = g(3, vec![vec![(0, 1), (1, 2), (0, 2)], vec![(0, 1)]]);
        assert_eq!(excess_census(&tri_doubled).flags.len(), 1);
    }

    #[test]
    fn support_cases() {
        match classify_ca_support(&rainbow_triangle(), &[0, 1, 2]).unwrap() {
            Support::Cycle(c) => assert_eq!(c.max_parts, 3),
            other => panic!("{other:?}"),
        }
        let doubled = g(3, vec![vec![(0, 1)], vec![(0, 1)]]);
        assert_eq!(classify_ca_support(&doubled, &[0, 1]).unwrap(), Support::SingleEdge);
        assert_eq!(classify_ca_support(&doubled, &[2]).unwrap(), Support::SingleVertex);
        assert_eq!(classify_ca_support(&doubled, &[0]), Err(Error::NotCaBlock));
        assert_eq!(classify_ca_support(&doubled, &[0, 2]), Err(Error::NotCaBlock));
    }

    #[test]
    fn closed_gadget_is_other() {
        let gadget = figure1_gadget(1, true);
        let report = ca::ca_partition(&gadget);
        let cls = SupportClassifier::new(&gadget, &report);
        for b in report.partition.blocks().iter().filter(|b| b.len() == 2) {
            assert_eq!(cls.classify(b).unwrap(), Support::Other);
        }
    }
}

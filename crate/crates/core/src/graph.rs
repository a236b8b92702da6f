//! Randomly colored Erdős–Rényi multigraphs.
//!
//! A [`ColoredMultigraph`] is `k` simple edge layers on the shared vertex set
//! `0..n`. Colors are 0-based in the API (`0..k`); file formats and
//! human-facing output name them `1..=k`.

use std::collections::HashSet;
use std::fmt;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ColorParams;
use crate::seed;

pub type Edge = (usize, usize);

/// A set of colors stored as a bitmask (bit `i` is color `i`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ColorSet(pub u32);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn single(color: usize) -> Self {
        ColorSet(1 << color)
    }

    /// All colors `0..k`.
    pub fn full(k: usize) -> Self {
        ColorSet(((1u64 << k) - 1) as u32)
    }

    pub fn from_colors<I: IntoIterator<Item = usize>>(colors: I) -> Self {
        ColorSet(colors.into_iter().fold(0, |m, c| m | (1 << c)))
    }

    pub fn contains(self, color: usize) -> bool {
        self.0 >> color & 1 == 1
    }

    pub fn insert(&mut self, color: usize) {
        self.0 |= 1 << color;
    }

    pub fn union(self, other: ColorSet) -> ColorSet {
        ColorSet(self.0 | other.0)
    }

    pub fn intersects(self, other: ColorSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&c| self.contains(c))
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// 1-based, `|`-separated: colors {0, 2} print as `1|3`.
impl fmt::Display for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|c| (c + 1).to_string()).collect();
        f.write_str(&parts.join("|"))
    }
}

/// `n` vertices and `k` edge layers. Each layer holds distinct pairs `(u, v)`
/// with `u < v`, sorted lexicographically. A pair may occur in several layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredMultigraph {
    n: usize,
    layers: Vec<Vec<Edge>>,
}

impl ColoredMultigraph {
    /// Builds a graph from raw layers, normalizing each pair to `u < v` and
    /// sorting. Rejects self-loops, out-of-range vertices and in-layer duplicates.
    pub fn from_layers(n: usize, layers: Vec<Vec<Edge>>) -> Result<Self> {
        if layers.len() > crate::params::MAX_COLORS {
            return Err(Error::InvalidParams(format!("too many layers: {}", layers.len())));
        }
        let mut out = Vec::with_capacity(layers.len());
        for (i, layer) in layers.into_iter().enumerate() {
            let mut norm = Vec::with_capacity(layer.len());
            for (u, v) in layer {
                for w in [u, v] {
                    if w >= n {
                        return Err(Error::VertexOutOfRange { vertex: w, n });
                    }
                }
                if u == v {
                    return Err(Error::SelfLoop(u, i));
                }
                norm.push((u.min(v), u.max(v)));
            }
            norm.sort_unstable();
            if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(w[0].0, w[0].1, i));
            }
            out.push(norm);
        }
        Ok(ColoredMultigraph { n, layers: out })
    }

    pub fn empty(n: usize, k: usize) -> Self {
        ColoredMultigraph {
            n,
            layers: vec![Vec::new(); k],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, color: usize) -> &[Edge] {
        &self.layers[color]
    }

    pub fn layers(&self) -> &[Vec<Edge>] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Vec<Edge>> {
        self.layers
    }

    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn check_color(&self, color: usize) -> Result<()> {
        if color < self.k() {
            Ok(())
        } else {
            Err(Error::ColorOutOfRange { color, k: self.k() })
        }
    }

    pub fn view(&self, mode: ViewMode) -> Result<GraphView<'_>> {
        let mask = match mode {
            ViewMode::All => ColorSet::full(self.k()),
            ViewMode::Avoid(i) => {
                self.check_color(i)?;
                ColorSet(ColorSet::full(self.k()).0 & !(1 << i))
            }
            ViewMode::Only(set) => {
                if let Some(c) = set.iter().find(|&c| c >= self.k()) {
                    return Err(Error::ColorOutOfRange { color: c, k: self.k() });
                }
                set
            }
        };
        Ok(GraphView { graph: self, mask })
    }

    /// Simple graph `G` with the color set of every distinct pair, sorted by pair.
    pub fn colored_edges(&self) -> Vec<(Edge, ColorSet)> {
        let mut all: Vec<(Edge, usize)> = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(c, l)| l.iter().map(move |&e| (e, c)))
            .collect();
        all.sort_unstable();
        let mut out: Vec<(Edge, ColorSet)> = Vec::with_capacity(all.len());
        for (e, c) in all {
            match out.last_mut() {
                Some((last, set)) if *last == e => set.insert(c),
                _ => out.push((e, ColorSet::single(c))),
            }
        }
        out
    }
}

/// Which layers a [`GraphView`] selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewMode {
    /// `G^i`: every layer except color `i`.
    Avoid(usize),
    /// `G_I`: the union of the listed layers.
    Only(ColorSet),
    /// `G`: all layers.
    All,
}

/// The union of a subset of layers, borrowed from the underlying graph.
#[derive(Debug, Clone, Copy)]
pub struct GraphView<'a> {
    graph: &'a ColoredMultigraph,
    mask: ColorSet,
}

impl<'a> GraphView<'a> {
    pub fn graph(&self) -> &'a ColoredMultigraph {
        self.graph
    }

    pub fn colors(&self) -> ColorSet {
        self.mask
    }

    /// Edges of the selected layers; a pair present in several of them is
    /// yielded once per layer.
    pub fn raw_edges(&self) -> impl Iterator<Item = Edge> + 'a {
        let mask = self.mask;
        self.graph
            .layers
            .iter()
            .enumerate()
            .filter(move |(c, _)| mask.contains(*c))
            .flat_map(|(_, l)| l.iter().copied())
    }

    /// Edge set of the view with multiplicity collapsed, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut e: Vec<Edge> = self.raw_edges().collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// Samples `k` independent layers `G(n, λ_i / n)`.
///
/// Layer `i` is drawn from the stream `split(seed, i)`: first its edge count
/// `Binomial(n(n-1)/2, λ_i/n)`, then that many distinct uniform pairs by
/// rejection. Layers are generated in parallel; the result does not depend on
/// the thread pool.
pub fn generate(params: &ColorParams, n: usize, seed: u64) -> Result<ColoredMultigraph> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
    }
    if let Some(l) = params.lambdas().iter().find(|&&l| l > n as f64) {
        return Err(Error::InvalidParams(format!(
            "intensity {l} exceeds n = {n}"
        )));
    }
    let layers = params
        .lambdas()
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| sample_layer(n, lambda / n as f64, seed::split(seed, i as u64)))
        .collect();
    Ok(ColoredMultigraph { n, layers })
}

/// A single `G(n, p)` edge list, sorted.
pub fn sample_layer(n: usize, p: f64, seed: u64) -> Vec<Edge> {
    let mut rng = seed::rng_from(seed);
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let m = Binomial::new(pairs, p.clamp(0.0, 1.0))
        .expect("probability in [0, 1]")
        .sample(&mut rng) as usize;
    let mut seen: HashSet<u64> = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let (a, b) = (u.min(v), u.max(v));
        if seen.insert(a as u64 * n as u64 + b as u64) {
            edges.push((a, b));
        }
    }
    edges.sort_unstable();
    edges
}

pub const BLUE: usize = 0;
pub const RED: usize = 1;
pub const GREEN: usize = 2;

/// The ladder gadget: two paths of `2ℓ+1` edges (odd edges blue, even edges
/// red) joined by green rungs at their first `2ℓ+1` positions. With
/// `closing_edge`, an extra blue edge joins the two terminal vertices.
///
/// Path A occupies vertices `0..=2ℓ+1`, path B the next `2ℓ+2` vertices.
pub fn figure1_gadget(ell: usize, closing_edge: bool) -> ColoredMultigraph {
    assert!(ell >= 1, "gadget needs ell >= 1");
    let len = 2 * ell + 1;
    let a = |j: usize| j;
    let b = |j: usize| len + 1 + j;
    let mut layers = vec![Vec::new(); 3];
    for j in 1..=len {
        let color = if j % 2 == 1 { BLUE } else { RED };
        layers[color].push((a(j - 1), a(j)));
        layers[color].push((b(j - 1), b(j)));
    }
    for j in 0..len {
        layers[GREEN].push((a(j), b(j)));
    }
    if closing_edge {
        layers[BLUE].push((a(len), b(len)));
    }
    ColoredMultigraph::from_layers(2 * (len + 1), layers).expect("gadget is well formed")
}

const HEADER: &str = "caperc-graph v1";

/// Text format:
///
/// ```text
/// caperc-graph v1 n=<n> k=<k>
/// layer 1 m=<count>
/// <u> <v>
/// ...
/// ```
///
/// Vertices are 0-based with `u < v`, sorted; layers are numbered `1..=k`.
pub fn serialize(g: &ColoredMultigraph) -> String {
    use fmt::Write;
    let mut s = String::new();
    writeln!(s, "{HEADER} n={} k={}", g.n, g.k()).unwrap();
    for (i, layer) in g.layers.iter().enumerate() {
        writeln!(s, "layer {} m={}", i + 1, layer.len()).unwrap();
        for (u, v) in layer {
            writeln!(s, "{u} {v}").unwrap();
        }
    }
    s
}

pub fn deserialize(text: &str) -> Result<ColoredMultigraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let bad = |line: usize, msg: &str| Error::Malformed {
        line,
        msg: msg.to_string(),
    };
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty input"))?;
    let rest = header
        .strip_prefix(HEADER)
        .ok_or_else(|| bad(1, "missing header"))?;
    let fields: Vec<&str> = rest.split_whitespace().collect();
    let (n, k) = match fields.as_slice() {
        [n, k] => (
            parse_kv(n, "n").ok_or_else(|| bad(1, "bad n field"))?,
            parse_kv(k, "k").ok_or_else(|| bad(1, "bad k field"))?,
        ),
        _ => return Err(bad(1, "expected n=<n> k=<k>")),
    };
    if k > crate::params::MAX_COLORS {
        return Err(bad(1, "too many layers"));
    }

    let mut layers: Vec<Vec<Edge>> = Vec::with_capacity(k);
    for expect in 1..=k {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| bad(0, &format!("missing layer {expect}")))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        let m = match f.as_slice() {
            ["layer", i, m] if i.parse::<usize>().ok() == Some(expect) => {
                parse_kv(m, "m").ok_or_else(|| bad(ln, "bad m field"))?
            }
            _ => return Err(bad(ln, &format!("expected `layer {expect} m=<count>`"))),
        };
        let mut layer = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = lines.next().ok_or_else(|| bad(0, "truncated layer"))?;
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => (u, v),
                _ => return Err(bad(ln, "expected `<u> <v>`")),
            };
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(Error::SelfLoop(u, expect - 1));
            }
            layer.push((u, v));
        }
        layers.push(layer);
    }
    if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(bad(ln, "trailing content"));
    }
    ColoredMultigraph::from_layers(n, layers)
}

fn parse_kv(field: &str, key: &str) -> Option<usize> {
    field.strip_prefix(key)?.strip_prefix('=')?.parse().ok()
}

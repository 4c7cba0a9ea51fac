//! Labelled simple graphs stored as dyad-indexed bits, plus every sufficient
//! statistic the model families need.
//!
//! Dyads are enumerated in a fixed lexicographic order:
//!
//! * undirected: `(0,1), (0,2), …, (0,n-1), (1,2), …` (only `i < j`)
//! * directed: `(0,1), (0,2), …, (0,n-1), (1,0), (1,2), …` (all `i != j`)
//!
//! That order is shared by [`Graph`], [`crate::models::LogitMatrix`], the
//! sampler and the enumeration oracle, so statistics vectors are reproducible
//! bit for bit.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Number of dyads on `n` nodes.
pub fn dyad_count(n: usize, directed: bool) -> usize {
    if n < 2 {
        0
    } else if directed {
        n * (n - 1)
    } else {
        n * (n - 1) / 2
    }
}

/// Canonical index of the dyad `(i, j)`, or `None` for `i == j` or out-of-range
/// nodes. Undirected queries are symmetric in `i` and `j`.
pub fn dyad_index(n: usize, directed: bool, i: usize, j: usize) -> Option<usize> {
    if i == j || i >= n || j >= n {
        return None;
    }
    if directed {
        Some(i * (n - 1) + if j < i { j } else { j - 1 })
    } else {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Some(a * n - a * (a + 1) / 2 + (b - a - 1))
    }
}

/// Iterates dyads in canonical order.
pub fn dyads(n: usize, directed: bool) -> impl Iterator<Item = (usize, usize)> + Clone {
    (0..n).flat_map(move |i| {
        let start = if directed { 0 } else { i + 1 };
        (start..n).filter(move |&j| j != i).map(move |j| (i, j))
    })
}

/// A bijection on `0..n`, stored as the image of each node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &p in &images {
            if p >= n || seen[p] {
                return Err(Error::InvalidPermutation { n });
            }
            seen[p] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// The transposition swapping `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(a, b);
        Self(v)
    }

    /// `i -> i + shift (mod n)`.
    pub fn cyclic_shift(n: usize, shift: usize) -> Self {
        Self((0..n).map(|i| (i + shift) % n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Self(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    /// Moves node-indexed values: `result[π(i)] = values[i]`.
    pub fn permute_values<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out = values.to_vec();
        for (i, v) in values.iter().enumerate() {
            out[self.0[i]] = v.clone();
        }
        out
    }
}

/// Block labels for every node, with all blocks `0..r` occupied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockAssignment {
    labels: Vec<usize>,
    r: usize,
}

impl BlockAssignment {
    /// Requires labels to already be dense: every block in `0..r` non-empty,
    /// where `r = max label + 1`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidBlocks("no nodes".into()));
        }
        let r = labels.iter().max().map_or(0, |m| m + 1);
        let mut occupied = vec![false; r];
        for &l in &labels {
            occupied[l] = true;
        }
        if let Some(k) = occupied.iter().position(|o| !o) {
            return Err(Error::InvalidBlocks(format!("block {k} is empty")));
        }
        Ok(Self { labels, r })
    }

    /// Relabels arbitrary labels onto `0..r` in increasing label order, dropping
    /// unused labels.
    pub fn compacted(labels: &[usize]) -> Result<Self> {
        let distinct: Vec<usize> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let dense = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present"))
            .collect();
        Self::new(dense)
    }

    /// Every node in its own block.
    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            r: n,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn block_of(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.r];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Number of dyads between blocks `k` and `l` (within `k` when `k == l`).
    pub fn pair_dyads(&self, k: usize, l: usize, directed: bool) -> usize {
        let sizes = self.block_sizes();
        if k == l {
            dyad_count(sizes[k], directed)
        } else {
            sizes[k] * sizes[l]
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.labels.len() != n {
            return Err(Error::DimensionMismatch {
                what: "block labels",
                expected: n,
                found: self.labels.len(),
            });
        }
        Ok(())
    }
}

/// Edge counts between block pairs.
///
/// Undirected counts live on `k <= l`; [`BlockCounts::get`] canonicalises the
/// pair. Directed counts are indexed by (source block, target block).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    r: usize,
    directed: bool,
    counts: Vec<usize>,
}

impl BlockCounts {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, k: usize, l: usize) -> usize {
        let (k, l) = if !self.directed && k > l { (l, k) } else { (k, l) };
        self.counts[k * self.r + l]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Block pairs carrying a parameter: `k <= l` undirected, all pairs directed.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (r, directed) = (self.r, self.directed);
        (0..r).flat_map(move |k| ((if directed { 0 } else { k })..r).map(move |l| (k, l)))
    }
}

/// Per-block degree statistics.
///
/// Block degrees count between-block incidences only; edges inside a block
/// appear in `within` and nowhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockDegrees {
    Undirected {
        degree: Vec<usize>,
        within: Vec<usize>,
    },
    Directed {
        out_degree: Vec<usize>,
        in_degree: Vec<usize>,
        within: Vec<usize>,
    },
}

impl BlockDegrees {
    pub fn within(&self) -> &[usize] {
        match self {
            BlockDegrees::Undirected { within, .. } | BlockDegrees::Directed { within, .. } => within,
        }
    }
}

/// A labelled simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    directed: bool,
    adjacency: Vec<bool>,
}

fn kind(directed: bool) -> &'static str {
    if directed {
        "directed"
    } else {
        "undirected"
    }
}

impl Graph {
    pub fn empty(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            adjacency: vec![false; dyad_count(n, directed)],
        }
    }

    pub fn complete(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            adjacency: vec![true; dyad_count(n, directed)],
        }
    }

    /// Builds a graph from an edge list. Self-loops, out-of-range nodes and
    /// duplicate edges are rejected (for undirected graphs `(i,j)` and `(j,i)`
    /// are the same edge).
    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n, directed);
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            let d = dyad_index(n, directed, i, j)
                .ok_or_else(|| Error::InvalidGraph(format!("edge ({i},{j}) out of range for n={n}")))?;
            if g.adjacency[d] {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i},{j})")));
            }
            g.adjacency[d] = true;
        }
        Ok(g)
    }

    /// Builds a graph directly from canonical dyad bits.
    pub fn from_dyad_bits(n: usize, directed: bool, bits: Vec<bool>) -> Result<Self> {
        let expected = dyad_count(n, directed);
        if bits.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "dyad bits",
                expected,
                found: bits.len(),
            });
        }
        Ok(Self {
            n,
            directed,
            adjacency: bits,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn dyad_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn dyad_bits(&self) -> &[bool] {
        &self.adjacency
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        dyad_index(self.n, self.directed, i, j).is_some_and(|d| self.adjacency[d])
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&b| b).count()
    }

    /// Edges in canonical dyad order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        dyads(self.n, self.directed)
            .zip(self.adjacency.iter())
            .filter_map(|(d, &b)| b.then_some(d))
    }

    pub fn kind(&self) -> &'static str {
        kind(self.directed)
    }

    pub(crate) fn expect_directed(&self, directed: bool) -> Result<()> {
        if self.directed != directed {
            return Err(Error::WrongGraphKind {
                expected: kind(directed),
                found: kind(self.directed),
            });
        }
        Ok(())
    }

    pub fn degree_sequence(&self) -> Result<Vec<usize>> {
        self.expect_directed(false)?;
        let mut d = vec![0; self.n];
        for (i, j) in self.edges() {
            d[i] += 1;
            d[j] += 1;
        }
        Ok(d)
    }

    /// Out-degrees and in-degrees of a directed graph.
    pub fn out_in_degrees(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        self.expect_directed(true)?;
        let mut out = vec![0; self.n];
        let mut inn = vec![0; self.n];
        for (i, j) in self.edges() {
            out[i] += 1;
            inn[j] += 1;
        }
        Ok((out, inn))
    }

    pub fn block_edge_counts(&self, blocks: &BlockAssignment) -> Result<BlockCounts> {
        blocks.check_len(self.n)?;
        let r = blocks.r();
        let mut counts = vec![0; r * r];
        for (i, j) in self.edges() {
            let (mut k, mut l) = (blocks.block_of(i), blocks.block_of(j));
            if !self.directed && k > l {
                std::mem::swap(&mut k, &mut l);
            }
            counts[k * r + l] += 1;
        }
        Ok(BlockCounts {
            r,
            directed: self.directed,
            counts,
        })
    }

    pub fn block_degrees(&self, blocks: &BlockAssignment) -> Result<BlockDegrees> {
        let e = self.block_edge_counts(blocks)?;
        let r = e.r();
        let within: Vec<usize> = (0..r).map(|k| e.get(k, k)).collect();
        let between = |k: usize, reverse: bool| -> usize {
            (0..r)
                .filter(|&l| l != k)
                .map(|l| if reverse { e.get(l, k) } else { e.get(k, l) })
                .sum()
        };
        Ok(if self.directed {
            BlockDegrees::Directed {
                out_degree: (0..r).map(|k| between(k, false)).collect(),
                in_degree: (0..r).map(|k| between(k, true)).collect(),
                within,
            }
        } else {
            BlockDegrees::Undirected {
                degree: (0..r).map(|k| between(k, false)).collect(),
                within,
            }
        })
    }

    /// Relabels nodes: edge `(i,j)` becomes `(π(i), π(j))`.
    pub fn permute(&self, pi: &Permutation) -> Result<Graph> {
        if pi.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "permutation",
                expected: self.n,
                found: pi.len(),
            });
        }
        Graph::from_edges(
            self.n,
            self.directed,
            self.edges().map(|(i, j)| (pi.apply(i), pi.apply(j))),
        )
    }
}

//! Persistent graph homology of a weighted graph.
//!
//! Sweeping a threshold `eps` upward and keeping edges with weight `> eps`
//! yields a shrinking filtration. Components are born exactly at the weights
//! of a maximum spanning tree and cycles die exactly at the remaining edge
//! weights, so one Kruskal pass produces both sorted sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Self {
            u: u as u32,
            v: v as u32,
            w,
        }
    }
}

/// Undirected simple graph with nonnegative finite edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n_nodes: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Normalizes each edge to `u < v` and rejects self-loops, duplicate
    /// pairs, out-of-range endpoints and negative or non-finite weights.
    pub fn new(n_nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::invalid("graph has no nodes"));
        }
        if n_nodes > u32::MAX as usize {
            return Err(Error::invalid("graph too large for 32-bit node ids"));
        }
        let mut edges = edges;
        for (i, e) in edges.iter_mut().enumerate() {
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
            if e.u == e.v {
                return Err(Error::invalid(format!("edge {i} is a self-loop on {}", e.u)));
            }
            if e.v as usize >= n_nodes {
                return Err(Error::invalid(format!(
                    "edge {i} endpoint {} out of range for {n_nodes} nodes",
                    e.v
                )));
            }
            if !e.w.is_finite() {
                return Err(Error::NonFinite(format!("weight of edge {i}")));
            }
            if e.w < 0.0 {
                return Err(Error::invalid(format!("edge {i} has negative weight {}", e.w)));
            }
            // collapse -0.0 so the bit-level sort key stays monotone
            e.w += 0.0;
        }
        let mut pairs: Vec<(u32, u32)> = edges.iter().map(|e| (e.u, e.v)).collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self { n_nodes, edges })
    }

    /// Complete graph with weights from `weight(u, v)` for `u < v`.
    pub fn complete(n_nodes: usize, mut weight: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut edges = Vec::with_capacity(n_nodes * n_nodes.saturating_sub(1) / 2);
        for u in 0..n_nodes {
            for v in (u + 1)..n_nodes {
                edges.push(Edge::new(u, v, weight(u, v)));
            }
        }
        Self::new(n_nodes, edges)
    }

    /// Caller guarantees the invariants of [`WeightedGraph::new`].
    pub(crate) fn from_edges_unchecked(n_nodes: usize, edges: Vec<Edge>) -> Self {
        Self { n_nodes, edges }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
}

/// Sorted birth values (maximum spanning tree weights) and sorted death
/// values (all other edge weights) of a connected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PersistenceJson", into = "PersistenceJson")]
pub struct GraphPersistence {
    n_nodes: usize,
    births: Vec<f64>,
    deaths: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PersistenceJson {
    n_nodes: usize,
    births: Vec<f64>,
    deaths: Vec<f64>,
}

impl TryFrom<PersistenceJson> for GraphPersistence {
    type Error = Error;

    fn try_from(raw: PersistenceJson) -> Result<Self> {
        GraphPersistence::new(raw.n_nodes, raw.births, raw.deaths)
    }
}

impl From<GraphPersistence> for PersistenceJson {
    fn from(p: GraphPersistence) -> Self {
        PersistenceJson {
            n_nodes: p.n_nodes,
            births: p.births,
            deaths: p.deaths,
        }
    }
}

fn check_sorted(name: &str, xs: &[f64]) -> Result<()> {
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{name}[{i}]")));
    }
    if let Some(i) = xs.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::format(format!("{name} not ascending at index {}", i + 1)));
    }
    Ok(())
}

impl GraphPersistence {
    pub fn new(n_nodes: usize, births: Vec<f64>, deaths: Vec<f64>) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::invalid(format!(
                "persistence needs at least 2 nodes, got {n_nodes}"
            )));
        }
        if births.len() != n_nodes - 1 {
            return Err(Error::CardinalityMismatch {
                what: "births vs n_nodes - 1",
                left: births.len(),
                right: n_nodes - 1,
            });
        }
        check_sorted("births", &births)?;
        check_sorted("deaths", &deaths)?;
        Ok(Self {
            n_nodes,
            births,
            deaths,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn births(&self) -> &[f64] {
        &self.births
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    /// `(beta0, beta1)` of the graph keeping only edges with weight `> eps`.
    pub fn betti_at(&self, eps: f64) -> (usize, usize) {
        let removed_tree_edges = self.births.partition_point(|&b| b <= eps);
        let surviving_cycles = self.deaths.len() - self.deaths.partition_point(|&d| d <= eps);
        (1 + removed_tree_edges, surviving_cycles)
    }

    pub(crate) fn same_shape(&self, other: &GraphPersistence) -> Result<()> {
        if self.births.len() != other.births.len() {
            return Err(Error::CardinalityMismatch {
                what: "birth sets",
                left: self.births.len(),
                right: other.births.len(),
            });
        }
        if self.deaths.len() != other.deaths.len() {
            return Err(Error::CardinalityMismatch {
                what: "death sets",
                left: self.deaths.len(),
                right: other.deaths.len(),
            });
        }
        Ok(())
    }
}

/// Packs an edge into a key whose ascending order is
/// (weight descending, u ascending, v ascending). Weights are nonnegative
/// and finite, so their IEEE bit patterns order like the values.
#[inline]
fn kruskal_key(e: &Edge) -> u128 {
    let w = !e.w.to_bits() as u128;
    (w << 64) | ((e.u as u128) << 32) | e.v as u128
}

#[inline]
fn key_parts(key: u128) -> (u32, u32, f64) {
    let w = f64::from_bits(!((key >> 64) as u64));
    ((key >> 32) as u32, key as u32, w)
}

/// Descending-weight order key; the bits of a nonnegative finite weight
/// order like the value.
#[inline]
fn weight_key(w: f64) -> u64 {
    !w.to_bits()
}

#[inline]
fn key_weight(key: u64) -> f64 {
    f64::from_bits(!key)
}

/// Kruskal on descending weights: tree edges are births, the rest deaths.
///
/// All weights are sorted once as 8-byte keys. Kruskal itself, with the
/// full (weight desc, u asc, v asc) order, only runs over the heaviest
/// prefix of edges, which is widened until the tree spans every node; Kruskal
/// over the whole list would pick exactly the same tree from that prefix.
/// Deaths are the sorted weights minus the births.
pub fn graph_persistence(graph: &WeightedGraph) -> Result<GraphPersistence> {
    let m = graph.n_nodes();
    if m < 2 {
        return Err(Error::invalid(format!(
            "persistence needs at least 2 nodes, got {m}"
        )));
    }
    let tree_size = m - 1;
    let n_edges = graph.n_edges();
    if n_edges < tree_size {
        return Err(Error::Disconnected {
            found: spanning_forest_size(graph),
            expected: tree_size,
        });
    }

    let mut all: Vec<u64> = graph.edges().iter().map(|e| weight_key(e.w)).collect();
    all.sort_unstable();

    let mut prefix = (4 * m).min(n_edges);
    let births = loop {
        // every edge at least as heavy as the prefix's lightest one
        let cutoff = all[prefix - 1];
        let mut keys: Vec<u128> = graph
            .edges()
            .iter()
            .filter(|e| weight_key(e.w) <= cutoff)
            .map(kruskal_key)
            .collect();
        keys.sort_unstable();
        let tree = kruskal_tree(m, &keys);
        if tree.len() == tree_size {
            break tree;
        }
        if prefix == n_edges {
            return Err(Error::Disconnected {
                found: tree.len(),
                expected: tree_size,
            });
        }
        prefix = (prefix * 4).min(n_edges);
    };

    // births and `all` are both heaviest-first; the collect reuses `all`
    let mut next_birth = births.iter().map(|&w| weight_key(w)).peekable();
    let mut deaths: Vec<f64> = all
        .into_iter()
        .filter(|&key| {
            if next_birth.peek() == Some(&key) {
                next_birth.next();
                false
            } else {
                true
            }
        })
        .map(key_weight)
        .collect();
    debug_assert!(next_birth.peek().is_none());

    let mut births = births;
    births.reverse();
    deaths.reverse();
    Ok(GraphPersistence {
        n_nodes: m,
        births,
        deaths,
    })
}

/// Tree edge weights chosen by Kruskal over `keys` (already sorted), in
/// selection order. Stops once the tree spans all nodes.
fn kruskal_tree(n_nodes: usize, keys: &[u128]) -> Vec<f64> {
    let mut uf = UnionFind::new(n_nodes);
    let mut tree = Vec::with_capacity(n_nodes - 1);
    for &key in keys {
        let (u, v, w) = key_parts(key);
        if uf.union(u as usize, v as usize) {
            tree.push(w);
            if tree.len() == n_nodes - 1 {
                break;
            }
        }
    }
    tree
}

fn spanning_forest_size(graph: &WeightedGraph) -> usize {
    let mut uf = UnionFind::new(graph.n_nodes());
    graph
        .edges()
        .iter()
        .filter(|e| uf.union(e.u as usize, e.v as usize))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BettiCurves {
    pub beta0: Vec<usize>,
    pub beta1: Vec<usize>,
}

/// Betti numbers of the thresholded graph at each (ascending) threshold.
pub fn betti_curves(graph: &WeightedGraph, thresholds: &[f64]) -> Result<BettiCurves> {
    if let Some(i) = thresholds.iter().position(|t| t.is_nan()) {
        return Err(Error::NonFinite(format!("threshold {i}")));
    }
    if let Some(i) = thresholds.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::invalid(format!(
            "thresholds not ascending at index {}",
            i + 1
        )));
    }
    let pers = graph_persistence(graph)?;
    let (beta0, beta1) = thresholds.iter().map(|&t| pers.betti_at(t)).unzip();
    Ok(BettiCurves { beta0, beta1 })
}

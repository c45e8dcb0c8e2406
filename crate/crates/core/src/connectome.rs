//! Functional connectomes: absolute Pearson correlation between the
//! functional vectors (activation columns) of every pair of neurons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{Edge, WeightedGraph};

/// Neuron outputs over a functional dataset, row-major: row `i` is sample
/// `i`, column `j` is the functional vector of neuron `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix {
    values: Vec<f64>,
    n_samples: usize,
    n_neurons: usize,
}

impl ActivationMatrix {
    pub fn new(n_samples: usize, n_neurons: usize, values: Vec<f64>) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::invalid(format!(
                "activation matrix needs at least 2 samples, got {n_samples}"
            )));
        }
        if n_neurons == 0 {
            return Err(Error::invalid("activation matrix has no neurons"));
        }
        if values.len() != n_samples * n_neurons {
            return Err(Error::CardinalityMismatch {
                what: "activation values vs n_samples * n_neurons",
                left: values.len(),
                right: n_samples * n_neurons,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "sample {}, neuron {}",
                pos / n_neurons,
                pos % n_neurons
            )));
        }
        Ok(Self {
            values,
            n_samples,
            n_neurons,
        })
    }

    /// Builds from per-sample rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_neurons = rows.first().map_or(0, Vec::len);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_neurons) {
            return Err(Error::format(format!(
                "row {i} has {} values, expected {n_neurons}",
                row.len()
            )));
        }
        Self::new(rows.len(), n_neurons, rows.concat())
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, sample: usize, neuron: usize) -> f64 {
        self.values[sample * self.n_neurons + neuron]
    }

    /// The functional vector of one neuron.
    pub fn column(&self, neuron: usize) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.get(i, neuron)).collect()
    }
}

/// Symmetric `M x M` matrix of absolute correlations with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConnectomeJson", into = "ConnectomeJson")]
pub struct Connectome {
    weights: Vec<f64>,
    n_neurons: usize,
}

#[derive(Serialize, Deserialize)]
struct ConnectomeJson {
    n_neurons: usize,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<ConnectomeJson> for Connectome {
    type Error = Error;

    fn try_from(raw: ConnectomeJson) -> Result<Self> {
        if raw.weights.len() != raw.n_neurons {
            return Err(Error::format(format!(
                "connectome declares {} neurons but has {} rows",
                raw.n_neurons,
                raw.weights.len()
            )));
        }
        if let Some((j, row)) = raw
            .weights
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != raw.n_neurons)
        {
            return Err(Error::format(format!(
                "connectome row {j} has {} entries, expected {}",
                row.len(),
                raw.n_neurons
            )));
        }
        Connectome::from_weights(raw.n_neurons, raw.weights.concat())
    }
}

impl From<Connectome> for ConnectomeJson {
    fn from(c: Connectome) -> Self {
        let weights = c
            .weights
            .chunks(c.n_neurons.max(1))
            .map(<[f64]>::to_vec)
            .collect();
        ConnectomeJson {
            n_neurons: c.n_neurons,
            weights,
        }
    }
}

impl Connectome {
    /// Validates symmetry, the zero diagonal and the `[0, 1]` range.
    pub fn from_weights(n_neurons: usize, mut weights: Vec<f64>) -> Result<Self> {
        if n_neurons == 0 {
            return Err(Error::invalid("connectome has no neurons"));
        }
        if weights.len() != n_neurons * n_neurons {
            return Err(Error::CardinalityMismatch {
                what: "connectome entries vs n_neurons^2",
                left: weights.len(),
                right: n_neurons * n_neurons,
            });
        }
        for w in &mut weights {
            *w += 0.0;
        }
        for j in 0..n_neurons {
            if weights[j * n_neurons + j] != 0.0 {
                return Err(Error::format(format!("nonzero diagonal at ({j},{j})")));
            }
            for k in (j + 1)..n_neurons {
                let w = weights[j * n_neurons + k];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::format(format!(
                        "entry ({j},{k}) = {w} outside [0, 1]"
                    )));
                }
                if w != weights[k * n_neurons + j] {
                    return Err(Error::format(format!("asymmetric entry at ({j},{k})")));
                }
            }
        }
        Ok(Self { weights, n_neurons })
    }

    /// Dense connectome from a graph on at most `M` nodes; absent pairs are 0.
    pub fn from_graph(graph: &WeightedGraph) -> Result<Self> {
        let m = graph.n_nodes();
        let mut weights = vec![0.0; m * m];
        for e in graph.edges() {
            let (u, v) = (e.u as usize, e.v as usize);
            weights[u * m + v] = e.w;
            weights[v * m + u] = e.w;
        }
        Self::from_weights(m, weights)
    }

    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.weights[j * self.n_neurons + k]
    }

    /// The complete graph on all neurons. Zero-weight pairs are kept as edges.
    pub fn to_graph(&self) -> WeightedGraph {
        let m = self.n_neurons;
        let mut edges = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for u in 0..m {
            for v in (u + 1)..m {
                edges.push(Edge {
                    u: u as u32,
                    v: v as u32,
                    w: self.weights[u * m + v],
                });
            }
        }
        WeightedGraph::from_edges_unchecked(m, edges)
    }

    /// Entries strictly below the main diagonal, row by row:
    /// `(1,0), (2,0), (2,1), (3,0), ...`. Length `M(M-1)/2`.
    pub fn lower_triangle(&self) -> Vec<f64> {
        let m = self.n_neurons;
        let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for j in 1..m {
            out.extend_from_slice(&self.weights[j * m..j * m + j]);
        }
        out
    }
}

/// A functional vector shifted to zero mean, with its centered sum of squares.
/// Constant vectors are flagged so their correlation can be pinned to zero.
struct Centered {
    values: Vec<f64>,
    sum_sq: f64,
    constant: bool,
}

impl Centered {
    fn new(xs: &[f64]) -> Self {
        let constant = xs.windows(2).all(|w| w[0] == w[1]);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let values: Vec<f64> = xs.iter().map(|x| x - mean).collect();
        let sum_sq = values.iter().map(|c| c * c).sum();
        Self {
            values,
            sum_sq,
            constant,
        }
    }

    fn correlation(&self, other: &Centered) -> f64 {
        if self.constant || other.constant {
            return 0.0;
        }
        let cross: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        (cross / (self.sum_sq * other.sum_sq).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Pearson correlation of two equal-length vectors, clamped to `[-1, 1]`.
/// A constant vector has no functional signal and correlates as 0.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch {
            what: "pearson inputs",
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::invalid(format!(
            "pearson needs at least 2 samples, got {}",
            a.len()
        )));
    }
    if let Some(i) = a.iter().chain(b).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("pearson input index {i}")));
    }
    Ok(Centered::new(a).correlation(&Centered::new(b)))
}

/// `G[j][k] = |pearson(a_j, a_k)|` for `j != k`, zero on the diagonal.
///
/// Every entry is computed independently of the others, so the result does
/// not depend on the size of the rayon pool.
pub fn build_connectome(acts: &ActivationMatrix) -> Connectome {
    let m = acts.n_neurons();
    let columns: Vec<Centered> = (0..m)
        .into_par_iter()
        .map(|j| Centered::new(&acts.column(j)))
        .collect();

    let upper: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            ((j + 1)..m)
                .map(|k| columns[j].correlation(&columns[k]).abs())
                .collect()
        })
        .collect();

    let mut weights = vec![0.0; m * m];
    for (j, row) in upper.iter().enumerate() {
        for (offset, &w) in row.iter().enumerate() {
            let k = j + 1 + offset;
            weights[j * m + k] = w;
            weights[k * m + j] = w;
        }
    }
    Connectome {
        weights,
        n_neurons: m,
    }
}

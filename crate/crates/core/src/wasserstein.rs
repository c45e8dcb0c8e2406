//! Closed-form Wasserstein statistics on persistence summaries.
//!
//! In one dimension the optimal matching between two equal-size multisets
//! pairs them in sorted order, so the p-Wasserstein distance is the L^p
//! distance between the stored sorted vectors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::GraphPersistence;

/// Order `p` of a Wasserstein distance: any real `p >= 1`, or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!("Wasserstein order must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(Order::Infinity);
        }
        Ok(Order::Finite(p))
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Order::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::invalid(format!("cannot parse Wasserstein order {s:?}")))?;
                Order::finite(p)
            }
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(p) => write!(f, "{p}"),
            Order::Infinity => f.write_str("inf"),
        }
    }
}

/// Which half of a persistence summary a distance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Births,
    Deaths,
    /// `W_{2,B}^2 + W_{2,D}^2`; the order argument is ignored.
    Combined,
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "births" | "b" => Ok(Component::Births),
            "deaths" | "d" => Ok(Component::Deaths),
            "combined" => Ok(Component::Combined),
            _ => Err(Error::invalid(format!("unknown component {s:?}"))),
        }
    }
}

/// L^p distance between two index-aligned vectors.
pub fn sorted_distance(x: &[f64], y: &[f64], order: Order) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::CardinalityMismatch {
            what: "sorted vectors",
            left: x.len(),
            right: y.len(),
        });
    }
    let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
    Ok(match order {
        Order::Infinity => diffs.fold(0.0, f64::max),
        Order::Finite(1.0) => total(diffs),
        Order::Finite(2.0) => total(diffs.map(|d| d * d)).sqrt(),
        Order::Finite(p) => total(diffs.map(|d| d.powf(p))).powf(p.recip()),
    })
}

/// Sum starting from `+0.0`; `Iterator::sum` yields `-0.0` when empty.
fn total(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |acc, v| acc + v)
}

fn sq_euclidean(x: &[f64], y: &[f64]) -> f64 {
    total(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)))
}

/// `W_{p,B}` between the birth sets of two summaries.
pub fn wasserstein_births(g1: &GraphPersistence, g2: &GraphPersistence, order: Order) -> Result<f64> {
    sorted_distance(g1.births(), g2.births(), order)
}

/// `W_{p,D}` between the death sets of two summaries.
pub fn wasserstein_deaths(g1: &GraphPersistence, g2: &GraphPersistence, order: Order) -> Result<f64> {
    sorted_distance(g1.deaths(), g2.deaths(), order)
}

/// `W_{2,B}^2 + W_{2,D}^2`, the squared distance used by topological clustering.
pub fn combined_sq_distance(g1: &GraphPersistence, g2: &GraphPersistence) -> Result<f64> {
    g1.same_shape(g2)?;
    Ok(sq_euclidean(g1.births(), g2.births()) + sq_euclidean(g1.deaths(), g2.deaths()))
}

/// Elementwise means of sorted birth and death vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceBarycenter {
    pub n_inputs: usize,
    pub mean_births: Vec<f64>,
    pub mean_deaths: Vec<f64>,
}

impl PersistenceBarycenter {
    /// Squared combined distance from a summary to this barycenter.
    pub fn sq_distance_to(&self, item: &GraphPersistence) -> f64 {
        sq_euclidean(item.births(), &self.mean_births) + sq_euclidean(item.deaths(), &self.mean_deaths)
    }

    pub(crate) fn from_single(item: &GraphPersistence) -> Self {
        Self {
            n_inputs: 1,
            mean_births: item.births().to_vec(),
            mean_deaths: item.deaths().to_vec(),
        }
    }
}

/// Mean squared L2 deviation of the sorted vectors from their barycenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceVariance {
    pub var_births: f64,
    pub var_deaths: f64,
}

fn check_compatible<'a>(items: impl IntoIterator<Item = &'a GraphPersistence>) -> Result<usize> {
    let mut iter = items.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::invalid("statistics need at least one summary"))?;
    let mut n = 1;
    for item in iter {
        first.same_shape(item)?;
        n += 1;
    }
    Ok(n)
}

/// Coordinatewise mean. Coordinates on which all inputs agree are returned
/// exactly, so duplicates sit at distance zero from their mean.
pub(crate) fn coordinate_mean<'a>(dim: usize, vs: impl Iterator<Item = &'a [f64]> + Clone) -> Vec<f64> {
    let first = vs.clone().next().expect("nonempty");
    let mut acc = vec![0.0; dim];
    let mut uniform = vec![true; dim];
    let mut n = 0usize;
    for v in vs {
        for (l, x) in v.iter().enumerate() {
            acc[l] += x;
            uniform[l] &= *x == first[l];
        }
        n += 1;
    }
    for l in 0..dim {
        acc[l] = if uniform[l] { first[l] } else { acc[l] / n as f64 };
    }
    acc
}

/// Mean of ascending vectors, kept ascending through rounding.
fn sorted_mean<'a>(dim: usize, vs: impl Iterator<Item = &'a [f64]> + Clone) -> Vec<f64> {
    let mut mean = coordinate_mean(dim, vs);
    for l in 1..mean.len() {
        if mean[l] < mean[l - 1] {
            mean[l] = mean[l - 1];
        }
    }
    mean
}

/// Closed-form minimizer of `sum_i W_2^2(., G_i)`: the elementwise mean.
pub fn barycenter(items: &[GraphPersistence]) -> Result<PersistenceBarycenter> {
    barycenter_of(items.iter())
}

pub(crate) fn barycenter_of<'a>(
    items: impl Iterator<Item = &'a GraphPersistence> + Clone,
) -> Result<PersistenceBarycenter> {
    let n = check_compatible(items.clone())?;
    let first = items.clone().next().expect("nonempty");
    Ok(PersistenceBarycenter {
        n_inputs: n,
        mean_births: sorted_mean(first.births().len(), items.clone().map(|g| g.births())),
        mean_deaths: sorted_mean(first.deaths().len(), items.map(|g| g.deaths())),
    })
}

/// Per-coordinate variances `(1/N) sum_i (v_il - mean_l)^2` for births and
/// deaths. Their sums are the totals reported by [`variance`].
pub fn variance_profile(items: &[GraphPersistence]) -> Result<(Vec<f64>, Vec<f64>)> {
    let bary = barycenter(items)?;
    let n = items.len() as f64;
    let profile = |mean: &[f64], pick: fn(&GraphPersistence) -> &[f64]| {
        let mut acc = vec![0.0; mean.len()];
        for item in items {
            for ((a, x), m) in acc.iter_mut().zip(pick(item)).zip(mean) {
                *a += (x - m) * (x - m);
            }
        }
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    };
    Ok((
        profile(&bary.mean_births, GraphPersistence::births),
        profile(&bary.mean_deaths, GraphPersistence::deaths),
    ))
}

/// Wasserstein variance: `(1/N) sum_i ||b_i - mean_b||^2`, likewise for deaths.
pub fn variance(items: &[GraphPersistence]) -> Result<PersistenceVariance> {
    let bary = barycenter(items)?;
    let n = items.len() as f64;
    let var_births = total(items.iter().map(|g| sq_euclidean(g.births(), &bary.mean_births))) / n;
    let var_deaths = total(items.iter().map(|g| sq_euclidean(g.deaths(), &bary.mean_deaths))) / n;
    Ok(PersistenceVariance {
        var_births,
        var_deaths,
    })
}

/// Gradient of `W_{2,B}^2(var, fixed)` with respect to `var`'s sorted births.
pub fn grad_sq_w2_births(var: &GraphPersistence, fixed: &GraphPersistence) -> Result<Vec<f64>> {
    grad_sq(var.births(), fixed.births())
}

/// Gradient of `W_{2,D}^2(var, fixed)` with respect to `var`'s sorted deaths.
pub fn grad_sq_w2_deaths(var: &GraphPersistence, fixed: &GraphPersistence) -> Result<Vec<f64>> {
    grad_sq(var.deaths(), fixed.deaths())
}

/// Gradient of `||x - y||_2^2` in `x`.
pub fn grad_sq(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::CardinalityMismatch {
            what: "gradient operands",
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| 2.0 * (a - b)).collect())
}

/// Symmetric `N x N` matrix of pairwise distances, zero on the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub n: usize,
    pub component: Component,
    pub order: String,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Pairwise distances over a dataset. Each pair is computed independently.
pub fn distance_matrix(
    items: &[GraphPersistence],
    component: Component,
    order: Order,
) -> Result<DistanceMatrix> {
    check_compatible(items)?;
    let n = items.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| match component {
                    Component::Births => wasserstein_births(&items[i], &items[j], order),
                    Component::Deaths => wasserstein_deaths(&items[i], &items[j], order),
                    Component::Combined => combined_sq_distance(&items[i], &items[j]),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            values[i][i + 1 + off] = d;
            values[i + 1 + off][i] = d;
        }
    }
    Ok(DistanceMatrix {
        n,
        component,
        order: match component {
            Component::Combined => "2".to_string(),
            _ => order.to_string(),
        },
        values,
    })
}

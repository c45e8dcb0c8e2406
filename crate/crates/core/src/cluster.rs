//! Centroid-based clustering over persistence summaries ("Top") and over
//! vectorized adjacency matrices (the Euclidean baseline), plus purity.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::connectome::Connectome;
use crate::error::{Error, Result};
use crate::homology::GraphPersistence;
use crate::wasserstein::{barycenter_of, coordinate_mean, PersistenceBarycenter};

/// Items with optional class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset<T> {
    pub items: Vec<T>,
    pub labels: Option<Vec<String>>,
}

impl<T> LabeledDataset<T> {
    pub fn new(items: Vec<T>, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != items.len() {
                return Err(Error::CardinalityMismatch {
                    what: "labels vs items",
                    left: l.len(),
                    right: items.len(),
                });
            }
        }
        Ok(Self { items, labels })
    }

    pub fn unlabeled(items: Vec<T>) -> Self {
        Self {
            items,
            labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterResult<C> {
    pub assignments: Vec<usize>,
    #[serde(skip)]
    pub centroids: Vec<C>,
    /// Sum of squared distances from each item to its centroid.
    pub objective: f64,
    pub n_iterations: usize,
    pub purity: Option<f64>,
    pub seed: u64,
    /// Objective after each centroid update.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LloydConfig {
    pub max_iterations: usize,
    pub min_improvement: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            min_improvement: 1e-12,
        }
    }
}

/// The geometry a Lloyd run needs: a squared item-to-centroid distance and
/// a mean that minimizes the summed squared distance of its members.
pub trait ClusterSpace: Sync {
    type Item: Sync;
    type Centroid: Clone + Send + Sync;

    fn sq_distance(&self, item: &Self::Item, centroid: &Self::Centroid) -> f64;

    fn mean(&self, members: &[&Self::Item]) -> Self::Centroid;

    fn singleton(&self, item: &Self::Item) -> Self::Centroid;
}

pub struct TopSpace;

impl ClusterSpace for TopSpace {
    type Item = GraphPersistence;
    type Centroid = PersistenceBarycenter;

    fn sq_distance(&self, item: &GraphPersistence, c: &PersistenceBarycenter) -> f64 {
        c.sq_distance_to(item)
    }

    fn mean(&self, members: &[&GraphPersistence]) -> PersistenceBarycenter {
        barycenter_of(members.iter().copied()).expect("members are nonempty and compatible")
    }

    fn singleton(&self, item: &GraphPersistence) -> PersistenceBarycenter {
        PersistenceBarycenter::from_single(item)
    }
}

pub struct EuclideanSpace;

impl ClusterSpace for EuclideanSpace {
    type Item = Vec<f64>;
    type Centroid = Vec<f64>;

    fn sq_distance(&self, item: &Vec<f64>, c: &Vec<f64>) -> f64 {
        item.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn mean(&self, members: &[&Vec<f64>]) -> Vec<f64> {
        coordinate_mean(members[0].len(), members.iter().map(|m| m.as_slice()))
    }

    fn singleton(&self, item: &Vec<f64>) -> Vec<f64> {
        item.clone()
    }
}

/// Nearest centroid and its squared distance; ties go to the lowest index.
fn nearest<S: ClusterSpace>(space: &S, item: &S::Item, centroids: &[S::Centroid]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = space.sq_distance(item, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign<S: ClusterSpace>(
    space: &S,
    items: &[S::Item],
    centroids: &[S::Centroid],
) -> (Vec<usize>, Vec<f64>) {
    items
        .par_iter()
        .map(|it| nearest(space, it, centroids))
        .unzip()
}

/// Distance-weighted seeding: the first center is uniform, each further one
/// is drawn with probability proportional to its squared distance to the
/// nearest chosen center. If every remaining item coincides with a center,
/// an unchosen index is drawn uniformly.
fn seed_centroids<S: ClusterSpace>(
    space: &S,
    items: &[S::Item],
    k: usize,
    rng: &mut Xoshiro256PlusPlus,
) -> Vec<S::Centroid> {
    let n = items.len();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![space.singleton(&items[first])];
    let mut min_d: Vec<f64> = items
        .par_iter()
        .map(|it| space.sq_distance(it, &centroids[0]))
        .collect();

    while centroids.len() < k {
        let total: f64 = min_d.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in min_d.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave the target past the last partial sum
            pick.unwrap_or_else(|| min_d.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen[pick] = true;
        let c = space.singleton(&items[pick]);
        min_d
            .par_iter_mut()
            .zip(items.par_iter())
            .for_each(|(d, it)| *d = d.min(space.sq_distance(it, &c)));
        centroids.push(c);
    }
    centroids
}

/// Moves, for every empty cluster, the item farthest from its current
/// centroid (taken from clusters with more than one member) into it.
fn repair_empty(assignments: &mut [usize], dists: &mut [f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far: Option<usize> = None;
        for i in 0..assignments.len() {
            if sizes[assignments[i]] > 1 && far.is_none_or(|f| dists[i] > dists[f]) {
                far = Some(i);
            }
        }
        let i = far.expect("k <= n leaves a cluster with spare members");
        sizes[assignments[i]] -= 1;
        sizes[c] = 1;
        assignments[i] = c;
        dists[i] = 0.0;
    }
}

fn update<S: ClusterSpace>(space: &S, items: &[S::Item], assignments: &[usize], k: usize) -> Vec<S::Centroid> {
    let mut members: Vec<Vec<&S::Item>> = vec![Vec::new(); k];
    for (item, &a) in items.iter().zip(assignments) {
        members[a].push(item);
    }
    members.par_iter().map(|m| space.mean(m)).collect()
}

fn objective<S: ClusterSpace>(
    space: &S,
    items: &[S::Item],
    assignments: &[usize],
    centroids: &[S::Centroid],
) -> f64 {
    // sequential sum: identical result for every pool size
    let per_item: Vec<f64> = items
        .par_iter()
        .zip(assignments.par_iter())
        .map(|(it, &a)| space.sq_distance(it, &centroids[a]))
        .collect();
    per_item.iter().sum()
}

/// Lloyd's algorithm: alternate nearest-centroid assignment and centroid
/// recomputation until assignments stop changing, the objective improves by
/// less than `min_improvement`, or `max_iterations` updates have run.
pub fn lloyd<S: ClusterSpace>(
    space: &S,
    items: &[S::Item],
    k: usize,
    seed: u64,
    config: LloydConfig,
) -> Result<ClusterResult<S::Centroid>> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k > items.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the number of items ({})",
            items.len()
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let seeds = seed_centroids(space, items, k, &mut rng);
    let (mut assignments, mut dists) = assign(space, items, &seeds);

    let mut centroids = seeds;
    let mut trace = Vec::new();
    let mut n_iterations = 0;
    let mut prev = f64::INFINITY;
    while n_iterations < config.max_iterations {
        repair_empty(&mut assignments, &mut dists, k);
        centroids = update(space, items, &assignments, k);
        let obj = objective(space, items, &assignments, &centroids);
        n_iterations += 1;
        trace.push(obj);

        let (next, next_dists) = assign(space, items, &centroids);
        if next == assignments || prev - obj < config.min_improvement {
            break;
        }
        prev = obj;
        assignments = next;
        dists = next_dists;
    }

    let objective = *trace.last().expect("at least one update runs");
    Ok(ClusterResult {
        assignments,
        centroids,
        objective,
        n_iterations,
        purity: None,
        seed,
        objective_trace: trace,
    })
}

fn check_compatible(items: &[GraphPersistence]) -> Result<()> {
    if let Some(first) = items.first() {
        for it in &items[1..] {
            first.same_shape(it)?;
        }
    }
    Ok(())
}

fn with_purity<C>(mut result: ClusterResult<C>, labels: Option<&[String]>) -> Result<ClusterResult<C>> {
    if let Some(labels) = labels {
        result.purity = Some(purity(&result.assignments, labels)?);
    }
    Ok(result)
}

/// Topological clustering: squared `W_{2,B}^2 + W_{2,D}^2` distances with
/// Wasserstein barycenters as centroids.
pub fn top_cluster(
    data: &LabeledDataset<GraphPersistence>,
    k: usize,
    seed: u64,
) -> Result<ClusterResult<PersistenceBarycenter>> {
    check_compatible(&data.items)?;
    let result = lloyd(&TopSpace, &data.items, k, seed, LloydConfig::default())?;
    with_purity(result, data.labels.as_deref())
}

/// Euclidean k-means on the strict lower triangles of the adjacency matrices.
pub fn adj_cluster(data: &LabeledDataset<Connectome>, k: usize, seed: u64) -> Result<ClusterResult<Vec<f64>>> {
    if let Some(first) = data.items.first() {
        if let Some(bad) = data.items.iter().find(|c| c.n_neurons() != first.n_neurons()) {
            return Err(Error::CardinalityMismatch {
                what: "connectome sizes",
                left: first.n_neurons(),
                right: bad.n_neurons(),
            });
        }
    }
    let vectors: Vec<Vec<f64>> = data.items.iter().map(Connectome::lower_triangle).collect();
    let result = lloyd(&EuclideanSpace, &vectors, k, seed, LloydConfig::default())?;
    with_purity(result, data.labels.as_deref())
}

/// `(1/N) sum_k max_class |cluster_k ∩ class|`.
pub fn purity<L: Eq + Hash>(assignments: &[usize], labels: &[L]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(Error::CardinalityMismatch {
            what: "assignments vs labels",
            left: assignments.len(),
            right: labels.len(),
        });
    }
    if assignments.is_empty() {
        return Err(Error::invalid("purity of an empty clustering"));
    }
    let mut counts: HashMap<usize, HashMap<&L, usize>> = HashMap::new();
    for (&a, l) in assignments.iter().zip(labels) {
        *counts.entry(a).or_default().entry(l).or_default() += 1;
    }
    let majority: usize = counts
        .values()
        .map(|per_class| per_class.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / assignments.len() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialsReport<C> {
    pub mean_purity: f64,
    /// Population standard deviation over trials.
    pub std_purity: f64,
    pub trials: Vec<ClusterResult<C>>,
}

impl<C> TrialsReport<C> {
    /// Trial with the lowest objective; ties go to the earliest seed.
    pub fn best(&self) -> &ClusterResult<C> {
        self.trials
            .iter()
            .reduce(|best, t| if t.objective < best.objective { t } else { best })
            .expect("at least one trial")
    }

    /// `seed,purity,objective,iterations` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,purity,objective,iterations\n");
        for t in &self.trials {
            let purity = t.purity.map(|p| p.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", t.seed, purity, t.objective, t.n_iterations));
        }
        out
    }
}

/// Runs `n_trials` clusterings with seeds `base_seed..base_seed + n_trials`
/// and summarizes their purity. Trials run in parallel; each is a pure
/// function of its seed.
pub fn run_trials<T, C, F>(
    data: &LabeledDataset<T>,
    k: usize,
    n_trials: usize,
    base_seed: u64,
    cluster: F,
) -> Result<TrialsReport<C>>
where
    T: Sync,
    C: Send,
    F: Fn(&LabeledDataset<T>, usize, u64) -> Result<ClusterResult<C>> + Sync,
{
    if data.labels.is_none() {
        return Err(Error::invalid("trials report purity and need labels"));
    }
    if n_trials == 0 {
        return Err(Error::invalid("n_trials must be positive"));
    }
    let trials: Vec<ClusterResult<C>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| cluster(data, k, base_seed.wrapping_add(t)))
        .collect::<Result<_>>()?;
    let purities: Vec<f64> = trials.iter().map(|t| t.purity.expect("labels present")).collect();
    let n = purities.len() as f64;
    let mean = purities.iter().sum::<f64>() / n;
    let var = purities.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    Ok(TrialsReport {
        mean_purity: mean,
        std_purity: var.sqrt(),
        trials,
    })
}

//! Synthetic modular networks and the pairwise-distance runtime benchmark.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{graph_persistence, Edge, WeightedGraph};
use crate::wasserstein::combined_sq_distance;

/// Complete graph whose nodes fall into `n_modules` balanced contiguous
/// blocks. Edges inside a block draw from the within range, edges across
/// blocks from the between range; with probability `noise_swap_prob` an
/// edge draws from the other range instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularSpec {
    pub n_nodes: usize,
    pub n_modules: usize,
    pub within_low: f64,
    pub within_high: f64,
    pub between_low: f64,
    pub between_high: f64,
    #[serde(default)]
    pub noise_swap_prob: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ModularSpec {
    /// Four modules, within weights in `[0.5, 1]`, between in `[0, 0.5]`,
    /// 10% swapped.
    pub fn benchmark(n_nodes: usize, seed: u64) -> Self {
        Self {
            n_nodes,
            n_modules: 4,
            within_low: 0.5,
            within_high: 1.0,
            between_low: 0.0,
            between_high: 0.5,
            noise_swap_prob: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::invalid("modular graph needs at least 2 nodes"));
        }
        if self.n_modules == 0 || self.n_modules > self.n_nodes {
            return Err(Error::invalid(format!(
                "n_modules must be in 1..={}, got {}",
                self.n_nodes, self.n_modules
            )));
        }
        for (name, lo, hi) in [
            ("within", self.within_low, self.within_high),
            ("between", self.between_low, self.between_high),
        ] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::invalid(format!(
                    "{name} range [{lo}, {hi}] must satisfy 0 <= low <= high <= 1"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.noise_swap_prob) {
            return Err(Error::invalid(format!(
                "noise_swap_prob {} outside [0, 1]",
                self.noise_swap_prob
            )));
        }
        Ok(())
    }

    /// Module of each node; the first `n_nodes % n_modules` blocks get one extra node.
    pub fn modules(&self) -> Vec<usize> {
        let base = self.n_nodes / self.n_modules;
        let extra = self.n_nodes % self.n_modules;
        (0..self.n_modules)
            .flat_map(|q| std::iter::repeat_n(q, base + usize::from(q < extra)))
            .collect()
    }
}

pub fn gen_modular(spec: &ModularSpec) -> Result<WeightedGraph> {
    spec.validate()?;
    let module = spec.modules();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let m = spec.n_nodes;
    let mut edges = Vec::with_capacity(m * (m - 1) / 2);
    for u in 0..m {
        for v in (u + 1)..m {
            let mut within = module[u] == module[v];
            if spec.noise_swap_prob > 0.0 && rng.gen::<f64>() < spec.noise_swap_prob {
                within = !within;
            }
            let (lo, hi) = if within {
                (spec.within_low, spec.within_high)
            } else {
                (spec.between_low, spec.between_high)
            };
            edges.push(Edge::new(u, v, lo + (hi - lo) * rng.gen::<f64>()));
        }
    }
    Ok(WeightedGraph::from_edges_unchecked(m, edges))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub m: usize,
    pub n_edges: usize,
    pub mean_s: f64,
    pub std_s: f64,
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("m,n_edges,mean_s,std_s\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.m, r.n_edges, r.mean_s, r.std_s));
    }
    out
}

/// Times `graph_persistence` on two modular graphs plus their combined
/// distance, for each size. One warm-up run per size is discarded, then the
/// repetitions cycle through all sizes so slow periods affect every size.
pub fn bench_distance(sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("sizes must be ascending"));
    }
    let pairs: Vec<(WeightedGraph, WeightedGraph)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let s = seed.wrapping_add(2 * i as u64);
            Ok((
                gen_modular(&ModularSpec::benchmark(m, s))?,
                gen_modular(&ModularSpec::benchmark(m, s + 1))?,
            ))
        })
        .collect::<Result<_>>()?;
    let run = |(g1, g2): &(WeightedGraph, WeightedGraph)| -> Result<f64> {
        let start = Instant::now();
        let p1 = graph_persistence(g1)?;
        let p2 = graph_persistence(g2)?;
        std::hint::black_box(combined_sq_distance(&p1, &p2)?);
        Ok(start.elapsed().as_secs_f64())
    };
    for pair in &pairs {
        run(pair)?;
    }
    let mut times = vec![Vec::with_capacity(reps); sizes.len()];
    for _ in 0..reps {
        for (pair, t) in pairs.iter().zip(&mut times) {
            t.push(run(pair)?);
        }
    }
    Ok(sizes
        .iter()
        .zip(&pairs)
        .zip(&times)
        .map(|((&m, (g1, _)), t)| {
            let mean = t.iter().sum::<f64>() / reps as f64;
            let var = t.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / reps as f64;
            BenchRow {
                m,
                n_edges: g1.n_edges(),
                mean_s: mean,
                std_s: var.sqrt(),
            }
        })
        .collect())
}

//! Topological summaries of neural-network functional connectomes.
//!
//! Pipeline: an [`ActivationMatrix`] of neuron outputs becomes a
//! [`Connectome`] of absolute Pearson correlations, which is summarized by a
//! [`GraphPersistence`] (sorted maximum-spanning-tree births and sorted
//! remaining-edge deaths). Summaries of equal node count are compared with
//! closed-form Wasserstein distances, averaged into barycenters and
//! clustered with Lloyd's algorithm.

pub mod cluster;
pub mod connectome;
pub mod error;
pub mod graphgen;
pub mod homology;
pub mod io;
pub mod union_find;
pub mod wasserstein;

pub use cluster::{
    adj_cluster, purity, run_trials, top_cluster, ClusterResult, LabeledDataset, LloydConfig,
    TrialsReport,
};
pub use connectome::{build_connectome, pearson, ActivationMatrix, Connectome};
pub use error::{Error, Result};
pub use graphgen::{bench_distance, gen_modular, BenchRow, ModularSpec};
pub use homology::{betti_curves, graph_persistence, BettiCurves, Edge, GraphPersistence, WeightedGraph};
pub use wasserstein::{
    barycenter, combined_sq_distance, distance_matrix, grad_sq_w2_births, grad_sq_w2_deaths,
    variance, variance_profile, wasserstein_births, wasserstein_deaths, Component, DistanceMatrix,
    Order, PersistenceBarycenter, PersistenceVariance,
};

//! `topofc`: functional connectome topology pipelines.

mod manifest;
mod plot;

use std::io::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use topofc_core::graphgen::bench_to_csv;
use topofc_core::{
    adj_cluster, barycenter, bench_distance, build_connectome, combined_sq_distance, distance_matrix,
    gen_modular, graph_persistence, io, run_trials, top_cluster, variance, wasserstein_births,
    wasserstein_deaths, ClusterResult, Component, Connectome, Error, GraphPersistence, LabeledDataset,
    ModularSpec, Order,
};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "topofc", version, about = "Persistent graph homology of functional connectomes")]
struct Cli {
    /// Worker threads; results are identical for every value.
    #[arg(long, global = true, env = "TOPOFC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Top,
    Adj,
}

#[derive(Subcommand)]
enum Command {
    /// Absolute-correlation connectome from an activation matrix (CSV or AMAT).
    Connectome {
        #[arg(long)]
        input: PathBuf,
        /// `.json` writes JSON, anything else the CONN binary.
        #[arg(long)]
        output: PathBuf,
    },
    /// Births and deaths of a connectome.
    Persistence {
        #[arg(long)]
        input: PathBuf,
        /// `.json` writes JSON, anything else the PERS binary.
        #[arg(long)]
        output: PathBuf,
    },
    /// Prints `W_B W_D combined` for two summaries.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Order of W_B and W_D: a real >= 1 or `inf`.
        #[arg(long, default_value = "2")]
        p: Order,
    },
    /// Pairwise distances between summaries.
    DistanceMatrix {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        /// births, deaths or combined.
        #[arg(long, default_value = "combined")]
        component: Component,
        #[arg(long, default_value = "2")]
        p: Order,
        /// `.json` writes JSON, anything else CSV; stdout if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Wasserstein barycenter of summaries, as JSON.
    Barycenter {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Prints `var_births var_deaths`.
    Variance {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lloyd clustering over several seeded trials.
    Cluster {
        /// Persistence summaries or connectomes (`top`), connectomes (`adj`).
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "top")]
        method: Method,
        /// CSV with a `label` header, one row per input.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Best trial as JSON; stdout if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trials_csv: Option<PathBuf>,
    },
    /// Runtime of persistence plus distance on modular graphs.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV; stdout if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Log-log SVG of the timings.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Modular connectome from a JSON generator spec.
    GenModular {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Step-curve SVG of one or more summaries.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        pers: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Barycenter with a one-standard-deviation band.
        #[arg(long)]
        band: bool,
    },
    /// Prints `eps,beta0,beta1` rows for a summary or connectome.
    Betti {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        thresholds: Vec<f64>,
    },
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

/// Persistence summary from a summary file, or computed from a connectome.
fn load_persistence(path: &Path) -> anyhow::Result<GraphPersistence> {
    match io::read_persistence(path) {
        Ok(p) => Ok(p),
        Err(err @ Error::Io(_)) => Err(err).with_context(|| path.display().to_string()),
        Err(err) => match io::read_connectome(path) {
            Ok(c) => Ok(graph_persistence(&c.to_graph())?),
            Err(_) => Err(err).with_context(|| path.display().to_string()),
        },
    }
}

fn load_all<T: Send>(
    paths: &[PathBuf],
    load: impl Fn(&Path) -> anyhow::Result<T> + Sync,
) -> anyhow::Result<Vec<T>> {
    paths.par_iter().map(|p| load(p)).collect()
}

fn read_connectome(path: &Path) -> anyhow::Result<Connectome> {
    io::read_connectome(path).with_context(|| path.display().to_string())
}

fn emit(output: Option<&Path>, bytes: &[u8], manifest: &mut RunManifest) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            io::write_file(path, bytes).with_context(|| path.display().to_string())?;
            manifest.output(path);
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Connectome { input, output } => {
            let mut m = RunManifest::start("connectome");
            let acts = io::read_activation(&input).with_context(|| input.display().to_string())?;
            m.input(&input)
                .param("n_samples", acts.n_samples())
                .param("n_neurons", acts.n_neurons());
            io::write_connectome(&output, &build_connectome(&acts))?;
            m.output(&output).finish()?;
        }
        Command::Persistence { input, output } => {
            let mut m = RunManifest::start("persistence");
            let pers = graph_persistence(&read_connectome(&input)?.to_graph())?;
            io::write_persistence(&output, &pers)?;
            m.input(&input).output(&output).param("n_nodes", pers.n_nodes()).finish()?;
        }
        Command::Distance { a, b, p } => {
            let (pa, pb) = (load_persistence(&a)?, load_persistence(&b)?);
            let wb = wasserstein_births(&pa, &pb, p)?;
            let wd = wasserstein_deaths(&pa, &pb, p)?;
            let combined = combined_sq_distance(&pa, &pb)?;
            println!("{wb} {wd} {combined}");
        }
        Command::DistanceMatrix { inputs, component, p, output } => {
            let mut m = RunManifest::start("distance-matrix");
            let items = load_all(&inputs, load_persistence)?;
            let dm = distance_matrix(&items, component, p)?;
            let bytes = match output.as_deref() {
                Some(path) if is_json(path) => io::to_json(&dm)?,
                _ => dm.to_csv().into_bytes(),
            };
            inputs.iter().for_each(|i| {
                m.input(i);
            });
            m.param("component", format!("{component:?}").to_lowercase())
                .param("p", p.to_string());
            emit(output.as_deref(), &bytes, &mut m)?;
            m.finish()?;
        }
        Command::Barycenter { inputs, output } => {
            let mut m = RunManifest::start("barycenter");
            let items = load_all(&inputs, load_persistence)?;
            let bary = barycenter(&items)?;
            inputs.iter().for_each(|i| {
                m.input(i);
            });
            emit(output.as_deref(), &io::to_json(&bary)?, &mut m)?;
            m.finish()?;
        }
        Command::Variance { inputs, output } => {
            let mut m = RunManifest::start("variance");
            let items = load_all(&inputs, load_persistence)?;
            let var = variance(&items)?;
            println!("{} {}", var.var_births, var.var_deaths);
            if let Some(path) = output {
                inputs.iter().for_each(|i| {
                    m.input(i);
                });
                io::write_file(&path, &io::to_json(&var)?)?;
                m.output(&path).finish()?;
            }
        }
        Command::Cluster { inputs, k, trials, seed, method, labels, output, trials_csv } => {
            if k == 0 || k > inputs.len() {
                return Err(usage(format!("--k must be in 1..={}, got {k}", inputs.len())));
            }
            if trials == 0 {
                return Err(usage("--trials must be positive"));
            }
            let labels = labels
                .as_deref()
                .map(|p| io::read_labels(p).with_context(|| p.display().to_string()))
                .transpose()?;
            let mut m = RunManifest::start("cluster");
            inputs.iter().for_each(|i| {
                m.input(i);
            });
            m.param("k", k)
                .param("trials", trials)
                .param("seed", seed)
                .param("method", match method {
                    Method::Top => "top",
                    Method::Adj => "adj",
                });
            let (best_json, csv) = match method {
                Method::Top => {
                    let data = LabeledDataset::new(load_all(&inputs, load_persistence)?, labels)?;
                    cluster_trials(&data, k, trials, seed, top_cluster)?
                }
                Method::Adj => {
                    let data = LabeledDataset::new(load_all(&inputs, read_connectome)?, labels)?;
                    cluster_trials(&data, k, trials, seed, adj_cluster)?
                }
            };
            emit(output.as_deref(), &best_json, &mut m)?;
            if let Some(path) = trials_csv {
                io::write_file(&path, csv.as_bytes())?;
                m.output(&path);
            }
            m.finish()?;
        }
        Command::Bench { sizes, reps, seed, output, plot } => {
            let mut m = RunManifest::start("bench");
            let rows = bench_distance(&sizes, reps, seed)?;
            let sizes_json: Vec<u64> = sizes.iter().map(|&s| s as u64).collect();
            m.param("sizes", sizes_json).param("reps", reps).param("seed", seed);
            emit(output.as_deref(), bench_to_csv(&rows).as_bytes(), &mut m)?;
            if let Some(path) = plot {
                io::write_file(&path, plot::bench_svg(&rows).as_bytes())?;
                m.output(&path);
            }
            m.finish()?;
        }
        Command::GenModular { spec, output } => {
            let mut m = RunManifest::start("gen-modular");
            let text = std::fs::read(&spec).with_context(|| spec.display().to_string())?;
            let parsed: ModularSpec = serde_json::from_slice(&text)
                .map_err(Error::from)
                .with_context(|| spec.display().to_string())?;
            let graph = gen_modular(&parsed)?;
            io::write_connectome(&output, &Connectome::from_graph(&graph)?)?;
            m.input(&spec)
                .output(&output)
                .param("seed", parsed.seed)
                .param("n_nodes", parsed.n_nodes)
                .finish()?;
        }
        Command::Plot { pers, output, band } => {
            let mut m = RunManifest::start("plot");
            let items = load_all(&pers, load_persistence)?;
            let named: Vec<(String, GraphPersistence)> = pers
                .iter()
                .map(|p| p.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned()))
                .zip(items)
                .collect();
            let svg = plot::persistence_svg(&named, band)?;
            io::write_file(&output, svg.as_bytes())?;
            pers.iter().for_each(|i| {
                m.input(i);
            });
            m.output(&output).param("band", band).finish()?;
        }
        Command::Betti { input, thresholds } => {
            if thresholds.iter().any(|t| t.is_nan()) {
                return Err(usage("thresholds must not be NaN"));
            }
            let pers = load_persistence(&input)?;
            let mut out = String::from("eps,beta0,beta1\n");
            for &eps in &thresholds {
                let (b0, b1) = pers.betti_at(eps);
                out.push_str(&format!("{eps},{b0},{b1}\n"));
            }
            print!("{out}");
        }
    }
    Ok(())
}

/// Runs seeded trials and returns the best trial's JSON and the trials CSV.
/// Purity columns are filled only when labels are present.
fn cluster_trials<T: Sync, C: Send + Sync>(
    data: &LabeledDataset<T>,
    k: usize,
    trials: usize,
    seed: u64,
    cluster: impl Fn(&LabeledDataset<T>, usize, u64) -> topofc_core::Result<ClusterResult<C>> + Sync,
) -> anyhow::Result<(Vec<u8>, String)> {
    if data.labels.is_some() {
        let report = run_trials(data, k, trials, seed, cluster)?;
        eprintln!("mean purity {} (std {})", report.mean_purity, report.std_purity);
        return Ok((io::to_json(report.best())?, report.to_csv()));
    }
    let results: Vec<ClusterResult<C>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| cluster(data, k, seed.wrapping_add(t)))
        .collect::<topofc_core::Result<_>>()?;
    let report = topofc_core::TrialsReport { mean_purity: f64::NAN, std_purity: f64::NAN, trials: results };
    Ok((io::to_json(report.best())?, report.to_csv()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::InvalidArgument(_) | Error::Format(_) | Error::Json(_) | Error::NonFinite(_) => 2,
            Error::Io(_) | Error::Disconnected { .. } | Error::CardinalityMismatch { .. } => 3,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    4
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
        Err(_) => ExitCode::from(4),
    }
}

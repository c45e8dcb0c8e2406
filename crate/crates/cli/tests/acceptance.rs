//! Acceptance criteria. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero if any criterion fails. Criteria run one after
//! another so the timing checks see an otherwise idle machine.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use tempfile::TempDir;
use topofc_core::wasserstein::sorted_distance;
use topofc_core::{
    barycenter, bench_distance, betti_curves, combined_sq_distance, gen_modular, graph_persistence,
    grad_sq_w2_births, run_trials, top_cluster, wasserstein_births, wasserstein_deaths, Edge,
    GraphPersistence, LabeledDataset, ModularSpec, Order, PersistenceBarycenter, WeightedGraph,
};
use topofc_oracle::{betti_oracle, complement_weights, mst_weight_oracle, transport_oracle, EdgeTriple};

const HOMOLOGY_GRAPHS: usize = 600;
const TRANSPORT_PAIRS: usize = 600;
const TRANSPORT_TOL: f64 = 1e-12;
const GRADIENT_PAIRS: usize = 200;
const FD_STEP: f64 = 1e-6;
const GRADIENT_REL_TOL: f64 = 1e-5;
const PERTURBATIONS: usize = 100;
const PERTURBATION_SCALE: f64 = 1e-3;
const STABILITY_GRAPHS: usize = 150;
const ETA: f64 = 0.01;
const STABILITY_SLACK: f64 = 1e-12;
const RUNTIME_LIMIT_S: f64 = 5.0;
const RUNTIME_RATIO_LIMIT: f64 = 5.0;
const RUNTIME_REPS: usize = 7;
const GRADED_PURITY_FLOOR: f64 = 0.5;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn triples(g: &WeightedGraph) -> Vec<EdgeTriple> {
    g.edges().iter().map(|e| (e.u as usize, e.v as usize, e.w)).collect()
}

/// Connected graph on `m` nodes: a random spanning path plus each other pair
/// with probability one half. Half the graphs use a coarse weight grid so
/// ties are frequent.
fn random_connected(m: usize, rng: &mut Xoshiro256PlusPlus) -> WeightedGraph {
    let coarse = rng.gen_bool(0.5);
    let weight = |rng: &mut Xoshiro256PlusPlus| {
        if coarse {
            rng.gen_range(0..=8) as f64 / 8.0
        } else {
            rng.gen::<f64>()
        }
    };
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut on_path = vec![false; m * m];
    for w in order.windows(2) {
        on_path[w[0].min(w[1]) * m + w[0].max(w[1])] = true;
    }
    let mut edges = Vec::new();
    for u in 0..m {
        for v in (u + 1)..m {
            if on_path[u * m + v] || rng.gen_bool(0.5) {
                edges.push(Edge::new(u, v, weight(rng)));
            }
        }
    }
    WeightedGraph::new(m, edges).unwrap()
}

fn random_complete(m: usize, rng: &mut Xoshiro256PlusPlus) -> WeightedGraph {
    WeightedGraph::complete(m, |_, _| rng.gen::<f64>()).unwrap()
}

fn cardinality() -> Outcome {
    let mut r = rng(1);
    for m in 3..=50 {
        let p = graph_persistence(&random_complete(m, &mut r)).map_err(|e| e.to_string())?;
        let deaths = 1 + m * (m - 3) / 2;
        if p.births().len() != m - 1 || p.deaths().len() != deaths {
            return Err(format!("M={m}: {} births, {} deaths", p.births().len(), p.deaths().len()));
        }
    }
    Ok("M = 3..50".into())
}

fn homology_oracle() -> Outcome {
    let mut r = rng(2);
    let mut thresholds_checked = 0;
    for i in 0..HOMOLOGY_GRAPHS {
        let m = r.gen_range(2..=8);
        let g = random_connected(m, &mut r);
        let edges = triples(&g);
        let p = graph_persistence(&g).map_err(|e| e.to_string())?;
        let tree = mst_weight_oracle(m, &edges).ok_or("oracle reports disconnected")?;
        if p.births() != tree.as_slice() {
            return Err(format!("graph {i}: births {:?} vs oracle {tree:?}", p.births()));
        }
        let rest = complement_weights(&edges, &tree);
        if p.deaths() != rest.as_slice() {
            return Err(format!("graph {i}: deaths {:?} vs oracle {rest:?}", p.deaths()));
        }
        let mut eps: Vec<f64> = edges.iter().map(|e| e.2).collect();
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        let mut thresholds = vec![-1.0, 2.0];
        for w in eps.windows(2) {
            thresholds.push(0.5 * (w[0] + w[1]));
        }
        thresholds.extend(&eps);
        thresholds.sort_by(f64::total_cmp);
        let curves = betti_curves(&g, &thresholds).map_err(|e| e.to_string())?;
        for (t, &e) in thresholds.iter().enumerate() {
            let want = betti_oracle(m, &edges, e);
            let got = (curves.beta0[t], curves.beta1[t]);
            if got != want || p.betti_at(e) != want {
                return Err(format!("graph {i} eps {e}: curves {got:?}, summary {:?}, oracle {want:?}", p.betti_at(e)));
            }
            thresholds_checked += 1;
        }
    }
    Ok(format!("{HOMOLOGY_GRAPHS} graphs, {thresholds_checked} thresholds, exact"))
}

fn transport_oracle_check() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for i in 0..TRANSPORT_PAIRS {
        let n = r.gen_range(1..=6);
        let mut x: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
        let mut y: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
        let (xu, yu) = (x.clone(), y.clone());
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for p in [1.0, 2.0] {
            let closed = sorted_distance(&x, &y, Order::Finite(p)).map_err(|e| e.to_string())?;
            let err = (closed - transport_oracle(&xu, &yu, Some(p))).abs();
            worst = worst.max(err);
            if err > TRANSPORT_TOL {
                return Err(format!("pair {i}, p={p}: error {err:e}"));
            }
        }
    }
    Ok(format!("{TRANSPORT_PAIRS} pairs, p in {{1,2}}, max error {worst:e}"))
}

/// Ascending vector with consecutive gaps of at least `min_gap`.
fn spaced_sorted(n: usize, min_gap: f64, rng: &mut Xoshiro256PlusPlus) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut x = rng.gen::<f64>() * 0.1;
    for _ in 0..n {
        v.push(x);
        x += min_gap + rng.gen::<f64>() * 0.2;
    }
    v
}

fn gradient_check() -> Outcome {
    let mut r = rng(4);
    let sq_w2 = |a: &GraphPersistence, b: &GraphPersistence| {
        let w = wasserstein_births(a, b, Order::Finite(2.0)).unwrap();
        w * w
    };
    let mut worst = 0.0f64;
    let mut accepted = 0;
    while accepted < GRADIENT_PAIRS {
        let n = r.gen_range(2..=8);
        let x = spaced_sorted(n, 0.01, &mut r);
        let y = spaced_sorted(n, 0.01, &mut r);
        if x.iter().zip(&y).any(|(a, b)| (a - b).abs() < 0.01) {
            continue;
        }
        accepted += 1;
        let var = GraphPersistence::new(n + 1, x.clone(), vec![]).unwrap();
        let fixed = GraphPersistence::new(n + 1, y, vec![]).unwrap();
        let grad = grad_sq_w2_births(&var, &fixed).map_err(|e| e.to_string())?;
        for l in 0..n {
            let shifted = |h: f64| {
                let mut v = x.clone();
                v[l] += h;
                GraphPersistence::new(n + 1, v, vec![]).unwrap()
            };
            let fd = (sq_w2(&shifted(FD_STEP), &fixed) - sq_w2(&shifted(-FD_STEP), &fixed)) / (2.0 * FD_STEP);
            let rel = (fd - grad[l]).abs() / grad[l].abs();
            worst = worst.max(rel);
            if rel > GRADIENT_REL_TOL {
                return Err(format!("pair {accepted} coordinate {l}: analytic {} vs fd {fd}", grad[l]));
            }
        }
    }
    Ok(format!("{GRADIENT_PAIRS} tie-free pairs, max relative error {worst:e}"))
}

fn barycenter_optimality() -> Outcome {
    let mut r = rng(5);
    let items: Vec<GraphPersistence> = (0..8)
        .map(|_| graph_persistence(&random_complete(10, &mut r)).unwrap())
        .collect();
    let bary = barycenter(&items).map_err(|e| e.to_string())?;
    let objective = |c: &PersistenceBarycenter| items.iter().map(|g| c.sq_distance_to(g)).sum::<f64>();
    let at_mean = objective(&bary);
    let dim = bary.mean_births.len() + bary.mean_deaths.len();
    let mut smallest_gap = f64::INFINITY;
    for t in 0..PERTURBATIONS {
        let dir: Vec<f64> = (0..dim).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let step: Vec<f64> = dir.iter().map(|d| d / norm * PERTURBATION_SCALE).collect();
        let (sb, sd) = step.split_at(bary.mean_births.len());
        let moved = PersistenceBarycenter {
            n_inputs: bary.n_inputs,
            mean_births: bary.mean_births.iter().zip(sb).map(|(m, s)| m + s).collect(),
            mean_deaths: bary.mean_deaths.iter().zip(sd).map(|(m, s)| m + s).collect(),
        };
        let gap = objective(&moved) - at_mean;
        smallest_gap = smallest_gap.min(gap);
        if gap <= 0.0 {
            return Err(format!("perturbation {t} lowers the objective by {}", -gap));
        }
    }
    Ok(format!("{PERTURBATIONS} perturbations, smallest increase {smallest_gap:e}"))
}

fn stability() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for i in 0..STABILITY_GRAPHS {
        let m = r.gen_range(3..=30);
        let g = if r.gen_bool(0.5) { random_complete(m, &mut r) } else { random_connected(m, &mut r) };
        let noisy: Vec<Edge> = g
            .edges()
            .iter()
            .map(|e| Edge { w: (e.w + r.gen_range(-ETA..=ETA)).max(0.0), ..*e })
            .collect();
        let h = WeightedGraph::new(m, noisy).unwrap();
        let (pg, ph) = (graph_persistence(&g).unwrap(), graph_persistence(&h).unwrap());
        let wb = wasserstein_births(&pg, &ph, Order::Infinity).unwrap();
        let wd = wasserstein_deaths(&pg, &ph, Order::Infinity).unwrap();
        worst = worst.max(wb).max(wd);
        if wb > ETA + STABILITY_SLACK || wd > ETA + STABILITY_SLACK {
            return Err(format!("graph {i}: W_inf births {wb}, deaths {wd}"));
        }
    }
    Ok(format!("{STABILITY_GRAPHS} graphs, eta {ETA}, max shift {worst:.6}"))
}

fn modular(n_nodes: usize, within: (f64, f64), between: (f64, f64), seed: u64) -> GraphPersistence {
    let spec = ModularSpec {
        n_nodes,
        n_modules: 3,
        within_low: within.0,
        within_high: within.1,
        between_low: between.0,
        between_high: between.1,
        noise_swap_prob: 0.0,
        seed,
    };
    graph_persistence(&gen_modular(&spec).unwrap()).unwrap()
}

fn clustering_disjoint() -> Outcome {
    let mut items = Vec::new();
    let mut labels = Vec::new();
    for i in 0..20 {
        items.push(modular(12, (0.8, 0.95), (0.55, 0.7), 1000 + i));
        labels.push("high".to_string());
        items.push(modular(12, (0.4, 0.5), (0.05, 0.3), 2000 + i));
        labels.push("low".to_string());
    }
    let data = LabeledDataset::new(items, Some(labels)).unwrap();
    let report = run_trials(&data, 2, 20, 0, top_cluster).map_err(|e| e.to_string())?;
    if report.mean_purity != 1.0 {
        return Err(format!("mean purity {}", report.mean_purity));
    }
    Ok(format!("2 classes x 20, 20 trials, mean purity {}", report.mean_purity))
}

fn clustering_graded() -> Outcome {
    let mut items = Vec::new();
    let mut labels = Vec::new();
    for c in 0..10u64 {
        let lo = 0.3 + 0.05 * c as f64;
        for i in 0..10 {
            items.push(modular(12, (lo, lo + 0.2), (0.0, 0.3), 10_000 + 100 * c + i));
            labels.push(format!("class{c}"));
        }
    }
    let data = LabeledDataset::new(items, Some(labels)).unwrap();
    let report = run_trials(&data, 10, 20, 0, top_cluster).map_err(|e| e.to_string())?;
    let line = format!(
        "10 overlapping classes x 10, k=10, 20 trials, mean purity {:.3} (std {:.3})",
        report.mean_purity, report.std_purity
    );
    if report.mean_purity >= GRADED_PURITY_FLOOR {
        Ok(line)
    } else {
        Err(line)
    }
}

fn runtime() -> Outcome {
    let g1 = gen_modular(&ModularSpec::benchmark(2000, 11)).unwrap();
    let g2 = gen_modular(&ModularSpec::benchmark(2000, 12)).unwrap();
    let start = Instant::now();
    let p1 = graph_persistence(&g1).unwrap();
    let p2 = graph_persistence(&g2).unwrap();
    std::hint::black_box(combined_sq_distance(&p1, &p2).unwrap());
    let single = start.elapsed().as_secs_f64();
    drop((g1, g2, p1, p2));

    let rows = bench_distance(&[1000, 2000], RUNTIME_REPS, 21).map_err(|e| e.to_string())?;
    let ratio = rows[1].mean_s / rows[0].mean_s;
    let line = format!(
        "M=2000 pair {single:.3} s ({} edges each); mean over {RUNTIME_REPS} reps {:.3} s vs {:.3} s at M=1000, ratio {ratio:.2}",
        rows[1].n_edges, rows[1].mean_s, rows[0].mean_s
    );
    if single <= RUNTIME_LIMIT_S && rows[1].mean_s <= RUNTIME_LIMIT_S && ratio <= RUNTIME_RATIO_LIMIT {
        Ok(line)
    } else {
        Err(line)
    }
}

struct Capture {
    stdout: Vec<u8>,
    files: Vec<(String, Vec<u8>)>,
}

fn activation_csv(seed: u64, samples: usize, neurons: usize) -> String {
    let mut r = rng(seed);
    let header: Vec<String> = (0..neurons).map(|j| format!("neuron_{j}")).collect();
    let mut out = header.join(",") + "\n";
    for _ in 0..samples {
        let row: Vec<String> = (0..neurons).map(|_| r.gen::<f64>().to_string()).collect();
        out += &(row.join(",") + "\n");
    }
    out
}

/// Runs a fixed pipeline with the given thread count and collects stdout
/// and every non-manifest output file.
fn pipeline(threads: &str) -> Result<Vec<(String, Capture)>, String> {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut labels = String::from("label\n");
    for i in 0..6 {
        std::fs::write(d.join(format!("a{i}.csv")), activation_csv(i, 40, 14)).unwrap();
        let spec = format!(
            r#"{{"n_nodes":14,"n_modules":2,"within_low":{},"within_high":0.95,"between_low":0,"between_high":0.3,"noise_swap_prob":0.05,"seed":{i}}}"#,
            if i % 2 == 0 { 0.4 } else { 0.7 }
        );
        std::fs::write(d.join(format!("s{i}.json")), spec).unwrap();
        labels += if i % 2 == 0 { "weak\n" } else { "strong\n" };
    }
    std::fs::write(d.join("labels.csv"), labels).unwrap();

    let pers: Vec<String> = (0..6).map(|i| format!("g{i}.pers")).collect();
    let conns: Vec<String> = (0..6).map(|i| format!("g{i}.json")).collect();
    let mut steps: Vec<Vec<String>> = Vec::new();
    for i in 0..6 {
        steps.push(vec!["connectome".into(), "--input".into(), format!("a{i}.csv"), "--output".into(), format!("c{i}.bin")]);
        steps.push(vec!["persistence".into(), "--input".into(), format!("c{i}.bin"), "--output".into(), format!("c{i}.json")]);
        steps.push(vec!["gen-modular".into(), "--spec".into(), format!("s{i}.json"), "--output".into(), conns[i].clone()]);
        steps.push(vec!["persistence".into(), "--input".into(), conns[i].clone(), "--output".into(), pers[i].clone()]);
    }
    let with = |head: &[&str], list: &[String], tail: &[&str]| -> Vec<String> {
        head.iter().map(|s| s.to_string()).chain(list.iter().cloned()).chain(tail.iter().map(|s| s.to_string())).collect()
    };
    steps.push(vec!["distance".into(), "--a".into(), pers[0].clone(), "--b".into(), pers[1].clone(), "--p".into(), "inf".into()]);
    steps.push(with(&["distance-matrix", "--inputs"], &pers, &["--output", "dm.csv"]));
    steps.push(with(&["distance-matrix", "--component", "births", "--p", "1", "--inputs"], &pers, &["--output", "dm.json"]));
    steps.push(with(&["barycenter", "--inputs"], &pers, &["--output", "bary.json"]));
    steps.push(with(&["variance", "--inputs"], &pers, &["--output", "var.json"]));
    steps.push(with(&["cluster", "--k", "2", "--trials", "8", "--seed", "5", "--labels", "labels.csv", "--inputs"], &pers, &["--output", "top.json", "--trials-csv", "top.csv"]));
    steps.push(with(&["cluster", "--method", "adj", "--k", "3", "--trials", "8", "--inputs"], &conns, &["--trials-csv", "adj.csv"]));
    steps.push(with(&["plot", "--band", "--pers"], &pers, &["--output", "band.svg"]));
    steps.push(vec!["plot".into(), "--pers".into(), "c0.json".into(), "--output".into(), "one.svg".into()]);
    steps.push(vec!["betti".into(), "--input".into(), conns[0].clone(), "--thresholds".into(), "0,0.25,0.5,0.75".into()]);
    steps.push(vec!["bench".into(), "--sizes".into(), "50,100".into(), "--reps".into(), "2".into(), "--output".into(), "bench.csv".into()]);

    let mut captures = Vec::new();
    for step in steps {
        let before: std::collections::BTreeSet<_> = list_files(d);
        let out = Command::new(env!("CARGO_BIN_EXE_topofc"))
            .arg("--threads")
            .arg(threads)
            .args(&step)
            .current_dir(d)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{step:?}: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let files = list_files(d)
            .difference(&before)
            .filter(|f| !f.ends_with(".manifest.json"))
            .map(|f| (f.clone(), std::fs::read(d.join(f)).unwrap()))
            .collect();
        captures.push((step.join(" "), Capture { stdout: out.stdout, files }));
    }
    Ok(captures)
}

fn list_files(d: &Path) -> std::collections::BTreeSet<String> {
    std::fs::read_dir(d)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect()
}

/// Timing columns of the runtime benchmark are measurements, not results;
/// only its size and edge-count columns are compared.
fn comparable(name: &str, bytes: &[u8]) -> Vec<u8> {
    if name != "bench.csv" {
        return bytes.to_vec();
    }
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",") + "\n")
        .collect::<String>()
        .into_bytes()
}

fn determinism() -> Outcome {
    let one = pipeline("1")?;
    let eight = pipeline("8")?;
    let mut compared = 0;
    for ((cmd, a), (_, b)) in one.iter().zip(&eight) {
        if a.stdout != b.stdout {
            return Err(format!("stdout differs for `{cmd}`"));
        }
        if a.files.len() != b.files.len() {
            return Err(format!("different outputs for `{cmd}`"));
        }
        for ((na, fa), (nb, fb)) in a.files.iter().zip(&b.files) {
            if na != nb || comparable(na, fa) != comparable(nb, fb) {
                return Err(format!("{na} differs for `{cmd}`"));
            }
            compared += 1;
        }
    }
    Ok(format!("{} commands, {compared} output files, threads 1 vs 8 byte-identical", one.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("cardinality identity", cardinality),
        ("oracle equivalence: homology", homology_oracle),
        ("oracle equivalence: transport", transport_oracle_check),
        ("gradient check", gradient_check),
        ("barycenter optimality", barycenter_optimality),
        ("stability", stability),
        ("clustering recovery: disjoint classes", clustering_disjoint),
        ("clustering recovery: graded classes", clustering_graded),
        ("runtime", runtime),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

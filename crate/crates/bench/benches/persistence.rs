use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use topofc_core::{
    build_connectome, combined_sq_distance, gen_modular, graph_persistence, ActivationMatrix,
    ModularSpec,
};

fn bench_graph_persistence(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_persistence");
    group.sample_size(10);
    for m in [250, 500, 1000, 2000] {
        let g = gen_modular(&ModularSpec::benchmark(m, 7)).unwrap();
        group.throughput(Throughput::Elements(g.n_edges() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(m), &g, |b, g| {
            b.iter(|| graph_persistence(g).unwrap())
        });
    }
    group.finish();
}

fn bench_pairwise_distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("pair_distance");
    group.sample_size(10);
    for m in [500, 1000, 2000] {
        let g1 = gen_modular(&ModularSpec::benchmark(m, 1)).unwrap();
        let g2 = gen_modular(&ModularSpec::benchmark(m, 2)).unwrap();
        group.bench_function(BenchmarkId::from_parameter(m), |b| {
            b.iter(|| {
                let p1 = graph_persistence(&g1).unwrap();
                let p2 = graph_persistence(&g2).unwrap();
                combined_sq_distance(&p1, &p2).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_connectome(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_connectome");
    group.sample_size(10);
    for m in [64, 128, 256] {
        let n = 500;
        let values: Vec<f64> = (0..n * m)
            .map(|i| ((i as f64) * 0.618_033_988_7).fract() - 0.5)
            .collect();
        let acts = ActivationMatrix::new(n, m, values).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &acts, |b, acts| {
            b.iter(|| build_connectome(acts))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_graph_persistence, bench_pairwise_distance, bench_connectome);
criterion_main!(benches);

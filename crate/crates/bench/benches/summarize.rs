use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sumlife_bench::{edge_graph, prepared_task};
use sumlife_core::features::sample_batch;
use sumlife_core::lifelong::task_rng;
use sumlife_core::nn::{Architecture, BatchInput, Hyper, Network};
use sumlife_core::summary::{summarize, SummaryModel, SummaryOptions};
use sumlife_core::synthetic::eight_class_snapshot;

fn bench_summarize(c: &mut Criterion) {
    let mut group = c.benchmark_group("summarize");
    group.sample_size(10);
    for edges in [10_000usize, 100_000, 1_000_000] {
        let g = edge_graph(edges);
        group.throughput(Throughput::Elements(edges as u64));
        for model in [SummaryModel::Ac1, SummaryModel::Ac2] {
            group.bench_with_input(BenchmarkId::new(model.to_string(), edges), &g, |b, g| {
                b.iter(|| summarize(g, model, SummaryOptions::default()))
            });
        }
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let task = prepared_task(edge_graph(100_000), SummaryModel::Ac1);
    let mut group = c.benchmark_group("sample_batch");
    for hops in [0usize, 1, 2] {
        group.bench_function(BenchmarkId::from_parameter(hops), |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            b.iter(|| {
                sample_batch(
                    &task.graph,
                    &task.features,
                    &task.labels,
                    &task.split,
                    hops,
                    1000,
                    &mut rng,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_training_step(c: &mut Criterion) {
    let task = prepared_task(eight_class_snapshot(1), SummaryModel::Ac1);
    let classes = task.labels.iter().max().map_or(1, |m| *m as usize + 1);
    let mut group = c.benchmark_group("training_step");
    for arch in [
        Architecture::Mlp,
        Architecture::GraphMlp,
        Architecture::Gcn,
        Architecture::GcnEdges,
    ] {
        let mut rng = task_rng(3, 0);
        let hops = arch.batch_hops(1);
        let batch = sample_batch(
            &task.graph,
            &task.features,
            &task.labels,
            &task.split,
            hops,
            1000,
            &mut rng,
        )
        .unwrap();
        let batch = if arch.edge_as_vertex() {
            sumlife_core::features::edge_as_vertex_transform(&batch).unwrap()
        } else {
            batch
        };
        let input = BatchInput::from_subgraph(&batch, task.features.width());
        let net = Network::new(arch, Hyper::defaults(arch), task.features.width(), classes, &mut rng).unwrap();
        group.bench_function(arch.to_string(), |b| {
            let mut drop_rng = ChaCha8Rng::seed_from_u64(5);
            b.iter(|| net.loss_and_grads(&input, Some(&mut drop_rng)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_summarize, bench_sampling, bench_training_step);
criterion_main!(benches);

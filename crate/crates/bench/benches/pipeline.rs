use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hashjack_core::synth::{planted_partition_graph, ActivityConfig, Mixing, PartyGroup, PublicGroup};
use hashjack_core::{
    build_network, generate, louvain, split_streams, undirected_projection, AccountRegistry, SynthConfig,
};

fn config(scale: usize) -> SynthConfig {
    SynthConfig {
        seed: 7,
        parties: vec![PartyGroup { name: "#afd".into(), partisans: 2 * scale, contra: scale / 2 }],
        public_hashtags: vec![PublicGroup { name: "#coronavirusde".into(), pro: 7 * scale, contra: scale / 2 }],
        activity: ActivityConfig::default(),
        mixing: Mixing { p_in: 0.98, p_out: 0.02 },
        hijack: [("#afd".to_string(), [("#coronavirusde".to_string(), 0.3)].into())].into(),
        participation: 1.0,
        start: "2020-05-28T00:00:00Z".parse().unwrap(),
        noise_hashtags: Vec::new(),
        noise_rate: 0.0,
    }
}

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth");
    group.sample_size(10);
    for scale in [1_000usize, 10_000] {
        let cfg = config(scale);
        group.bench_with_input(BenchmarkId::from_parameter(scale * 10), &cfg, |b, cfg| {
            b.iter(|| generate(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn bench_build(c: &mut Criterion) {
    let (records, _) = generate(&config(10_000)).unwrap();
    let tracked: BTreeSet<String> = ["#afd", "#coronavirusde"].map(String::from).into();
    let mut group = c.benchmark_group("build_network");
    group.sample_size(10);
    group.throughput(Throughput::Elements(records.len() as u64));
    group.bench_function("split+build", |b| {
        b.iter(|| {
            let split = split_streams(&records, &tracked).unwrap();
            let mut registry = AccountRegistry::from_records_sorted(split.streams.values().flatten());
            for (tag, stream) in &split.streams {
                black_box(build_network(tag, stream, &mut registry));
            }
        })
    });
    group.finish();
}

fn bench_louvain(c: &mut Criterion) {
    let mut group = c.benchmark_group("louvain");
    group.sample_size(10);
    let (g, _) = planted_partition_graph(&[250; 4], 0.1, 0.005, 1);
    group.bench_function("planted_1000", |b| b.iter(|| louvain(black_box(&g), 1.0, 42).unwrap()));

    let (records, _) = generate(&config(10_000)).unwrap();
    let tracked: BTreeSet<String> = ["#coronavirusde".to_string()].into();
    let split = split_streams(&records, &tracked).unwrap();
    let mut registry = AccountRegistry::from_records_sorted(split.streams.values().flatten());
    let net = build_network("#coronavirusde", &split.streams["#coronavirusde"], &mut registry);
    let g = undirected_projection(&net);
    group.bench_function("synthetic_public_network", |b| {
        b.iter(|| louvain(black_box(&g), 0.3, 42).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_generate, bench_build, bench_louvain);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rashomon_bench::{demo_data, synthetic_bundle, uniform_grid};
use rashomon_core::learners::ForestParams;
use rashomon_core::{
    gold_derivative, pairwise_disparity, pdi, profile_bundle, run_detect, train, GoldParams,
    MeasureConfig, MeasureKind, ModelSpec, Profile, ProfileOptions, RashomonConfig, SignTolerance,
    Variant,
};

fn measures(c: &mut Criterion) {
    let g = uniform_grid("x", 101, -3.0, 3.0);
    let a = Profile::new("a", g.clone(), g.points.iter().map(|z| z.sin()).collect()).unwrap();
    let b = Profile::new("b", g.clone(), g.points.iter().map(|z| (1.7 * z).cos()).collect()).unwrap();
    c.bench_function("gold_derivative m=101", |bch| {
        bch.iter(|| gold_derivative(black_box(&a), GoldParams::default()).unwrap())
    });
    c.bench_function("pdi m=101", |bch| {
        bch.iter(|| pdi(black_box(&a), black_box(&b), GoldParams::default(), SignTolerance::default()).unwrap())
    });
}

fn disparity(c: &mut Criterion) {
    let (bundle, _) = synthetic_bundle(20, 10, 101);
    for kind in MeasureKind::ALL {
        let cfg = MeasureConfig::new(kind);
        c.bench_function(&format!("pairwise_disparity {kind} 20x10x101"), |bch| {
            bch.iter(|| pairwise_disparity(black_box(&bundle), &cfg).unwrap())
        });
    }
}

fn detect(c: &mut Criterion) {
    let (bundle, scores) = synthetic_bundle(50, 10, 101);
    for variant in [Variant::Full, Variant::Greedy] {
        let cfg = RashomonConfig {
            k: Some(7),
            variant,
            ..Default::default()
        };
        c.bench_function(&format!("detect {variant:?} 50 models"), |bch| {
            bch.iter(|| run_detect(black_box(&scores), &bundle, &cfg).unwrap())
        });
    }
}

fn profiles(c: &mut Criterion) {
    let data = demo_data();
    let spec = ModelSpec::RandomForest(ForestParams {
        n_trees: 100,
        max_depth: 6,
        min_samples_leaf: 3,
        max_features: 0.3,
        bootstrap: true,
    });
    let models: Vec<_> = (0..9)
        .map(|i| train(&format!("rf{i}"), &spec, &data, i).unwrap())
        .collect();
    let refs: Vec<_> = models.iter().collect();
    let opts = ProfileOptions::default();
    let mut group = c.benchmark_group("profile_bundle");
    group.sample_size(10);
    group.bench_function("9 forests x 13 variables x m=101", |bch| {
        bch.iter(|| profile_bundle(black_box(&refs), &data, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, measures, disparity, detect, profiles);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ricci_mcf::hypersurface::PinchingParams;
use ricci_mcf::par;
use ricci_mcf::verify::suite::{generic_case, residual_maxima};
use ricci_mcf::warped::oracle::frame_oracle;
use ricci_mcf::warped::{AmbientMetric, Perturbation};

fn oracle_nodes(c: &mut Criterion) {
    let p = Perturbation { amp_phi: 0.02, mode_phi: 3, amp_b: 0.01, mode_b: 2 };
    let g = AmbientMetric::perturbed(2, 1.0, 200, p).unwrap();
    let nodes: Vec<usize> = (20..=180).collect();
    let mut group = c.benchmark_group("frame_oracle_sweep");
    group.bench_function(BenchmarkId::new("parallel", nodes.len()), |b| {
        b.iter(|| par::map_items(&nodes, |&j| frame_oracle(black_box(&g), j).unwrap().scalar()))
    });
    group.bench_function(BenchmarkId::new("sequential", nodes.len()), |b| {
        b.iter(|| par::map_items_sequential(&nodes, |&j| frame_oracle(black_box(&g), j).unwrap().scalar()))
    });
    group.finish();
}

fn residual_levels(c: &mut Criterion) {
    let params = PinchingParams::new(2, 0.1).unwrap();
    let levels = [100usize, 200, 400];
    let run = |&m: &usize| {
        let (g, curve) = generic_case(2, m).unwrap();
        residual_maxima(&g, curve, params).unwrap()
    };
    let mut group = c.benchmark_group("residual_levels");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| par::map_items(black_box(&levels), run)));
    group.bench_function("sequential", |b| b.iter(|| par::map_items_sequential(black_box(&levels), run)));
    group.finish();
}

criterion_group!(benches, oracle_nodes, residual_levels);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use floorscan_bench::{grid_dxf, main_cluster, one_room_dxf};
use floorscan_core::config::FloorscanConfig;
use floorscan_core::pipeline::{analyze_dxf, AnalyzeOptions};
use floorscan_core::raster::{label_components, rasterize};
use floorscan_core::wall_pipeline::{run_filter_cascade, PipelineConfig};

fn ccl(c: &mut Criterion) {
    let cluster = main_cluster(&grid_dxf(4));
    let mut g = c.benchmark_group("label_components");
    g.sample_size(10);
    for res in [1024usize, 2048, 4096] {
        let img = rasterize(&cluster.segments, res, 1);
        g.bench_with_input(BenchmarkId::from_parameter(res), &img, |b, img| b.iter(|| label_components(black_box(img))));
    }
    g.finish();
}

fn cascade(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut g = c.benchmark_group("filter_cascade");
    for side in [1usize, 4, 8] {
        let cluster = main_cluster(&grid_dxf(side));
        g.bench_with_input(BenchmarkId::new("segments", cluster.segments.len()), &cluster, |b, cl| {
            b.iter(|| run_filter_cascade(black_box(cl), &cfg))
        });
    }
    g.finish();
}

fn full(c: &mut Criterion) {
    let cfg = FloorscanConfig::default();
    let mut g = c.benchmark_group("analyze_dxf");
    g.sample_size(10);
    let room = one_room_dxf();
    g.bench_function("one_room", |b| b.iter(|| analyze_dxf(black_box(&room), &cfg, AnalyzeOptions::default())));
    let big = grid_dxf(8);
    g.bench_function("grid_8x8", |b| b.iter(|| analyze_dxf(black_box(&big), &cfg, AnalyzeOptions::default())));
    g.finish();
}

criterion_group!(benches, ccl, cascade, full);
criterion_main!(benches);

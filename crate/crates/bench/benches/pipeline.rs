use criterion::{criterion_group, criterion_main, Criterion};
use pdc_bench::kitti_sized_frame;
use pdc_core::filter::{bilateral_blur, gaussian_blur};
use pdc_core::morphology::dilate_fill;
use pdc_core::spgraph::{build_adjacency, build_regions};
use pdc_core::superpixel::segment;
use pdc_core::{run_pdc, to_gray, BlurKind, Domain, Kernel, PdcConfig, DEFAULT_MAX_DEPTH};
use std::hint::black_box;

fn stages(c: &mut Criterion) {
    let (rgb, sparse, gt) = kitti_sized_frame(1);
    let cfg = PdcConfig::default();
    let inv = sparse.invert(DEFAULT_MAX_DEPTH).unwrap();
    let dense = gt.invert(DEFAULT_MAX_DEPTH).unwrap();
    let lab = segment(&rgb, &cfg.segmentation).unwrap();
    let gray = to_gray(&rgb);

    c.bench_function("to_gray", |b| b.iter(|| to_gray(black_box(&rgb))));
    c.bench_function("initial_dilate", |b| {
        b.iter(|| dilate_fill(black_box(&inv), &Kernel::diamond(5), Domain::All))
    });
    c.bench_function("segment", |b| b.iter(|| segment(black_box(&rgb), &cfg.segmentation)));
    c.bench_function("region_graph", |b| {
        b.iter(|| (build_regions(&lab, &gray).unwrap(), build_adjacency(&lab)))
    });
    c.bench_function("gaussian_blur", |b| b.iter(|| gaussian_blur(black_box(&dense), 5, 1.1)));
    c.bench_function("bilateral_blur", |b| {
        b.iter(|| bilateral_blur(black_box(&dense), 5, 1.5, 2.0))
    });
}

fn end_to_end(c: &mut Criterion) {
    let (rgb, sparse, _) = kitti_sized_frame(2);
    let mut group = c.benchmark_group("run_pdc");
    group.sample_size(10);
    for (name, blur, sets) in [
        ("sets_bilateral", BlurKind::Bilateral, true),
        ("sets_no_blur", BlurKind::None, true),
        ("no_sets_no_blur", BlurKind::None, false),
    ] {
        let cfg = PdcConfig {
            blur,
            use_superpixel_sets: sets,
            ..PdcConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| run_pdc(black_box(&rgb), black_box(&sparse), &cfg)));
    }
    group.finish();
}

criterion_group!(benches, stages, end_to_end);
criterion_main!(benches);

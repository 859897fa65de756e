use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qwrad::modulation::bessel::bessel_j_ladder;
use qwrad::scenario::ScenarioConfig;
use qwrad::smith_purcell::{spectral_map, MapChannel};
use qwrad::{fourier_coefficient, wigner_function, Complex64, WignerRequest};

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_ladder_60_11.4", |b| b.iter(|| bessel_j_ladder(black_box(60), black_box(11.4))));
}

fn bunching(c: &mut Criterion) {
    let r = ScenarioConfig::preset("fig4").unwrap().resolve().unwrap();
    let st = r.modulated_state().unwrap().unwrap();
    c.bench_function("bunching_b1_to_b8", |b| {
        b.iter(|| (1..=8).map(|l| fourier_coefficient(&st, l, black_box(r.drift_time))).sum::<Complex64>())
    });
}

fn wigner(c: &mut Criterion) {
    let r = ScenarioConfig::preset("fig3").unwrap().resolve().unwrap();
    let st = r.modulated_state().unwrap().unwrap();
    let req = WignerRequest::new(512, 256);
    let mut g = c.benchmark_group("wigner");
    g.sample_size(10);
    g.bench_function("wigner_512x256", |b| b.iter(|| wigner_function(&st, black_box(r.drift_time), &req).unwrap()));
    g.finish();
}

fn spr_map(c: &mut Criterion) {
    let r = ScenarioConfig::preset("fig5d").unwrap().resolve().unwrap();
    let src = r.spr_source().unwrap();
    let mut g = c.benchmark_group("spr_map");
    g.sample_size(10);
    g.bench_function("modulated_fig5d", |b| b.iter(|| spectral_map(&src, &r.axes, MapChannel::Modulated).unwrap()));
    g.finish();
}

criterion_group!(benches, bessel, bunching, wigner, spr_map);
criterion_main!(benches);

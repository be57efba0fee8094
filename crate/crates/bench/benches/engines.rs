use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ionghz_core::experiments::{degree_grid, sweep, Engine, SweepSpec, System};
use ionghz_core::model::spectrum_numeric;
use ionghz_core::{EngineControls, ModeIndices};

fn system() -> System {
    System::from_ratio(8.95e6, 4.0, ModeIndices::GROUND, 0.05, 0.05).unwrap()
}

fn spectrum(c: &mut Criterion) {
    let sys = system();
    c.bench_function("spectrum_numeric", |b| b.iter(|| spectrum_numeric(black_box(&sys.block)).unwrap()));
}

fn single_point(c: &mut Criterion) {
    let sys = system();
    let mut group = c.benchmark_group("evolve T=pi/4 R=0.01");
    let controls = EngineControls { n_traj: 4096, ..Default::default() };
    for engine in [Engine::Eigenbasis, Engine::Poisson, Engine::Ode, Engine::MonteCarlo] {
        let req = sys.request(0.01, std::f64::consts::FRAC_PI_4, controls);
        group.bench_with_input(BenchmarkId::from_parameter(engine), &req, |b, req| {
            b.iter(|| sys.evolve(engine, black_box(req)).unwrap())
        });
    }
    group.finish();
}

fn figure_sweep(c: &mut Criterion) {
    let spec = SweepSpec { t_grid: degree_grid(0.0, 360.0, 0.25), ..Default::default() };
    c.bench_function("sweep 4R x 1441T eigen", |b| b.iter(|| sweep(black_box(&spec)).unwrap()));
}

criterion_group!(benches, spectrum, single_point, figure_sweep);
criterion_main!(benches);

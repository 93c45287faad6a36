use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use multinoise_core::asymptotics::correlation_error;
use multinoise_core::draws::Draws;
use multinoise_core::gamma::{gamma_osc_many, gamma_shell, i_sigma};
use multinoise_core::wick::reservoir_pair;
use multinoise_core::{Dispersion, ReservoirChannel, Sector, Sign, TestFunction};

fn catalog() -> (Dispersion, TestFunction) {
    (Dispersion::quadratic(1.0, 4.5).unwrap(), TestFunction::gaussian(3.0, 0.45))
}

fn gamma(c: &mut Criterion) {
    let (d, g) = catalog();
    c.bench_function("i_sigma", |b| b.iter(|| i_sigma(&d, &g, black_box(7.5)).unwrap()));
    c.bench_function("gamma_osc_0_to_3", |b| b.iter(|| gamma_osc_many(&d, &g, black_box(&[0, 1, 2, 3])).unwrap()));
    c.bench_function("gamma_shell_3", |b| b.iter(|| gamma_shell(&d, &g, black_box(3)).unwrap()));
}

fn correlations(c: &mut Criterion) {
    let (d, g) = catalog();
    let gammas = gamma_osc_many(&d, &g, &[0]).unwrap();
    let ch = ReservoirChannel::new(d, g, 0.25, 1e-10).unwrap();
    let f = TestFunction::gaussian(0.3, 0.8);
    let h = TestFunction::gaussian(-0.2, 1.1).modulated(-0.5);
    c.bench_function("reservoir_pair", |b| b.iter(|| reservoir_pair(&ch, black_box(&f), &h).unwrap()));
    let signs = [Sign::Minus, Sign::Minus, Sign::Plus, Sign::Plus];
    let smears = [f.clone(), h.clone(), h.clone(), f.clone()];
    c.bench_function("correlation_error_4pt", |b| {
        b.iter(|| correlation_error(&signs, &smears, 0, black_box(0.25), &ch, &gammas).unwrap())
    });
}

fn fock(c: &mut Criterion) {
    let sector = Sector::hermite(1, 1.0, 6, 4).unwrap();
    let mut draws = Draws::new(1);
    let phi = sector.random_vector(&mut draws, 3);
    let f = TestFunction::combination(&draws.complex_vec(6), &sector.basis);
    c.bench_function("sector_build_n1_m6", |b| b.iter(|| Sector::hermite(1, 1.0, black_box(6), 4).unwrap()));
    c.bench_function("create_rank3", |b| b.iter(|| sector.create(black_box(&f), &phi).unwrap()));
    c.bench_function("annihilate_rank3", |b| b.iter(|| sector.annihilate(black_box(&f), &phi).unwrap()));
    c.bench_function("fock_inner_metric", |b| b.iter(|| sector.fock_inner(black_box(&phi), &phi, true).unwrap()));
}

criterion_group!(benches, gamma, correlations, fock);
criterion_main!(benches);

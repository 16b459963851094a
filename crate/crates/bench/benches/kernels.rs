use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nhbs_bench::{held_photon_config, lossy_splitter, stored_magnon, FWHM};
use nhbs_core::fock::{cascade_three, output_distribution, splitter_network, FockInput};
use nhbs_core::mbloch::{evolve, Solver};
use nhbs_core::splitter::{phi_rt_analytic, PhiRtParams};
use nhbs_core::stats::{self, OverlapEnvelope};
use nhbs_core::PulseEnvelope;

fn solver(c: &mut Criterion) {
    let config = held_photon_config(101).unwrap();
    c.bench_function("solver_step_nz101", |b| {
        let mut s = Solver::new(&config).unwrap();
        b.iter(|| s.step().unwrap());
    });
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    g.bench_function("held_photon_passage_nz101", |b| {
        b.iter(|| evolve(black_box(&config)).unwrap())
    });
    g.bench_function("store_magnon_nz101", |b| {
        b.iter(|| stored_magnon(black_box(101)).unwrap())
    });
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let m = lossy_splitter().unwrap();
    c.bench_function("dilate_splitter", |b| {
        b.iter(|| splitter_network(black_box(&m)).unwrap())
    });
    let net = splitter_network(&m).unwrap();
    let pair = FockInput::pair(0.7).unwrap();
    c.bench_function("two_photon_distribution", |b| {
        b.iter(|| output_distribution(&net, black_box(&pair)).unwrap())
    });
    let cascade = cascade_three(&m, &m, 1.0).unwrap();
    let triple = FockInput::triple(0.8, 0.6, 0.48).unwrap();
    c.bench_function("three_photon_cascade_distribution", |b| {
        b.iter(|| output_distribution(&cascade, black_box(&triple)).unwrap())
    });
}

fn closed_forms(c: &mut Criterion) {
    let tau_p = PulseEnvelope::gaussian(FWHM, 0.0).unwrap().tau_p();
    let p = PhiRtParams {
        omega_c: 34.18,
        tau_p,
        gamma31: 1.0,
        delta: 10.0,
        eta: 66.0,
    };
    c.bench_function("phi_rt_analytic", |b| {
        b.iter(|| phi_rt_analytic(black_box(&p)).unwrap())
    });
    let env = OverlapEnvelope::from_pulse_fwhm(0.9, FWHM).unwrap();
    c.bench_function("g2_closed_form", |b| {
        b.iter(|| stats::g2(black_box(0.3), black_box(1.0), &env))
    });
}

criterion_group!(benches, solver, oracle, closed_forms);
criterion_main!(benches);

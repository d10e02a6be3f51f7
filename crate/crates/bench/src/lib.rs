//! Criterion benchmarks for the numerical kernels.

use std::hint::black_box;

use criterion::Criterion;
use kaondyn::measures::{concurrence, fully_entangled_fraction, losses, normalized_pair_state};
use kaondyn::numkernel::{expm, re};
use kaondyn::observables::{fit_lambda, synthesize_asymmetry_data, time_grid};
use kaondyn::openquantum::{
    decoherence_ansatz, embed_pair_support, liouvillian, liouvillian_propagate,
};
use kaondyn::{DensityMatrix, KaonConstants, System};

fn constants(lambda: f64) -> KaonConstants {
    KaonConstants {
        lambda,
        ..KaonConstants::default()
    }
}

pub fn linear_algebra(c: &mut Criterion) {
    let k = constants(0.25);
    let spec = decoherence_ansatz(&k, System::PairFull).unwrap();
    let l = liouvillian(&spec).unwrap().scale_re(0.7);
    c.bench_function("expm_liouvillian_16x16", |b| {
        b.iter(|| expm(black_box(&l)).unwrap())
    });

    let bell = DensityMatrix::from_rows(2, &[re(0.5), re(-0.5), re(-0.5), re(0.5)]).unwrap();
    let rho0 = embed_pair_support(&bell).unwrap();
    c.bench_function("propagate_pair_full", |b| {
        b.iter(|| liouvillian_propagate(&spec, black_box(&rho0), 1.3).unwrap())
    });
}

pub fn measures(c: &mut Criterion) {
    let k = constants(0.25);
    let rho = normalized_pair_state(&k, 0.55).unwrap();
    c.bench_function("concurrence", |b| {
        b.iter(|| concurrence(black_box(&rho)).unwrap())
    });
    c.bench_function("fully_entangled_fraction", |b| {
        b.iter(|| fully_entangled_fraction(black_box(&rho)).unwrap())
    });
    c.bench_function("losses", |b| {
        b.iter(|| losses(&k, black_box(0.55)).unwrap())
    });
}

pub fn fitting(c: &mut Criterion) {
    let k = constants(0.25);
    let samples = synthesize_asymmetry_data(&k, &time_grid(20, 10, 2.0, 2.0), 0.01, 3).unwrap();
    c.bench_function("fit_lambda_200", |b| {
        b.iter(|| fit_lambda(black_box(&samples), &k).unwrap())
    });
}

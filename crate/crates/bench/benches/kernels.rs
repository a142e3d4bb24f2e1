use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wishart_hs::analytic::EigenvalueDensity;
use wishart_hs::ensembles::{sample_density_matrix, sample_wishart};
use wishart_hs::figures::{kicked_top_config, FIG5_SET};
use wishart_hs::kickedtop::{FloquetOperator, Trajectory};
use wishart_hs::{EnsembleParams, RngStream};

fn eigensolver(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_eig");
    for n in [5usize, 25] {
        let p = EnsembleParams::new(2, n, n + 4).unwrap();
        let w = sample_wishart(&p, &mut RngStream::new(1));
        g.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| b.iter(|| black_box(w.eig().unwrap())));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_density_matrix");
    for (beta, n) in [(1u8, 5usize), (2, 5), (2, 25)] {
        let p = EnsembleParams::new(beta, n, n + 2).unwrap();
        let mut rng = RngStream::new(7);
        g.bench_function(format!("beta{beta}_n{n}"), |b| b.iter(|| black_box(sample_density_matrix(&p, &mut rng).unwrap())));
    }
    g.finish();
}

fn eig_density(c: &mut Criterion) {
    let p = EnsembleParams::new(2, 25, 29).unwrap();
    c.bench_function("eig_density_build_n25", |b| b.iter(|| black_box(EigenvalueDensity::new(&p).unwrap())));
    let d = EigenvalueDensity::new(&p).unwrap();
    c.bench_function("eig_density_curve_2000", |b| b.iter(|| black_box(d.curve(2000).unwrap())));
}

fn floquet(c: &mut Criterion) {
    let cfg = kicked_top_config(&FIG5_SET, 31, 1).unwrap();
    c.bench_function("floquet_build_25x31", |b| b.iter(|| black_box(FloquetOperator::new(&cfg).unwrap())));
    let mut traj = Trajectory::new(&cfg).unwrap();
    c.bench_function("floquet_step_25x31", |b| b.iter(|| traj.step()));
    c.bench_function("reduced_state_25x31", |b| b.iter(|| black_box(traj.reduced())));
}

criterion_group!(benches, eigensolver, sampling, eig_density, floquet);
criterion_main!(benches);

// SPDX-License-Identifier: Apache-2.0

//! Sequential against data-parallel execution on the three hot loops: the
//! series traces, a batch of matrix instances and resolvent sampling.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semipert::dsperturb::{dyson_phillips, DSPerturbation, DysonPhillipsOptions};
use semipert::exec::Execution;
use semipert::funcspace::{linspace, BoundedFunction};
use semipert::matrixlab::{dp_implemented, random_system, MatrixSystem};
use semipert::transgroup::{resolvent, ResolventQuadrature};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn series(c: &mut Criterion) {
    let pert = DSPerturbation::new("0.4*delta(0) + 0.1*uniform(0,1)".parse().unwrap());
    let u0 = BoundedFunction::rational_bump();
    let mut g = c.benchmark_group("dyson_phillips");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = DysonPhillipsOptions {
            terms: 20,
            dt: 1e-3,
            exec,
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| dyson_phillips(&pert, &u0, 2.0, &opts).unwrap())
        });
    }
    g.finish();
}

fn matrix_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let systems: Vec<MatrixSystem> = (0..8)
        .map(|i| random_system(&mut rng, 2 + i % 7, 3, 0.5).unwrap())
        .collect();
    let mut g = c.benchmark_group("matrix_batch");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.map(&systems, |s| {
                    dp_implemented(s, 1.0, 30, Execution::Sequential)
                        .unwrap()
                        .oracle_error
                })
            })
        });
    }
    g.finish();
}

fn resolvent_sampling(c: &mut Criterion) {
    let q = ResolventQuadrature::new(1.0).unwrap();
    let f = BoundedFunction::rational_bump();
    let image = resolvent(&q, &f).unwrap().function;
    let xs = linspace(-4.0, 4.0, 257);
    let mut g = c.benchmark_group("resolvent_sampling");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&xs, |&x| image.eval(x)))
        });
    }
    g.finish();
}

criterion_group!(benches, series, matrix_batch, resolvent_sampling);
criterion_main!(benches);

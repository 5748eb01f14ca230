use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hopper_core::annealing::{anneal_restarts, AnnealParams};
use hopper_core::insertion::{build_initial, InsertionParams};
use hopper_core::oracle::{solve_exact_with, OracleLimits, OracleMode};
use hopper_core::par::Execution;
use hopper_core::synth::{random_instance, SynthConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle(c: &mut Criterion) {
    let cfg = SynthConfig { customers: 7, trucks: 3, order_tons: (0.5, 1.7), ..Default::default() };
    let inst = random_instance(&cfg, 3);
    let mut g = c.benchmark_group("exact_7_customers");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_exact_with(black_box(&inst), &OracleLimits::default(), OracleMode::Lexicographic, exec))
        });
    }
    g.finish();
}

fn restarts(c: &mut Criterion) {
    let inst = random_instance(&SynthConfig::moderate(), 11);
    let (plan, report) = build_initial(&inst, &InsertionParams::default());
    assert!(report.is_complete());
    let params = AnnealParams { max_iterations: 5_000, ..AnnealParams::default() };
    let seeds: Vec<u64> = (1..=8).collect();
    let mut g = c.benchmark_group("anneal_8_restarts");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| anneal_restarts(black_box(&plan), &inst, &params, &seeds, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, restarts);
criterion_main!(benches);

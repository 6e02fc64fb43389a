use criterion::{black_box, criterion_group, criterion_main, Criterion};

use phaselab::exec::Execution;
use phaselab::grid::default_grid;
use phaselab::oracle::{evolution_operator, OracleConfig};
use phaselab::spin::Axis;
use phaselab::sweep::{build_model, sweep};

fn grid_sweep(c: &mut Criterion) {
    let points = default_grid();
    let mut group = c.benchmark_group("sweep");
    for (name, exec) in [
        ("parallel", Execution::Parallel),
        ("sequential", Execution::Sequential),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| sweep(Axis::Z, black_box(&points), exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_columns(c: &mut Criterion) {
    let model = build_model(Axis::X, &default_grid()[16]).unwrap();
    let mut group = c.benchmark_group("evolution_operator");
    group.sample_size(10);
    for (name, exec) in [
        ("parallel", Execution::Parallel),
        ("sequential", Execution::Sequential),
    ] {
        let cfg = OracleConfig {
            execution: exec,
            ..OracleConfig::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| evolution_operator(&model, black_box(model.period), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, grid_sweep, oracle_columns);
criterion_main!(benches);

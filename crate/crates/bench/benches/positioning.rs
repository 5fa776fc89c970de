use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gdopsel::gdop::per_reference_scores;
use gdopsel::harness::{run_trial, ExperimentConfig};
use gdopsel::measurement::tdoa_from_toa;
use gdopsel::scenario::{centroid, ScenarioKind};
use gdopsel::selection::{select_distance, select_gdop};
use gdopsel::solver::{solve, SolverConfig};
use gdopsel_bench::{ioo_fixture, umi_fixture};
use std::hint::black_box;

fn gdop_scores(c: &mut Criterion) {
    let (scenario, _) = ioo_fixture(3);
    let ids: Vec<_> = scenario.ids().collect();
    let x0 = scenario.ue;
    c.bench_function("per_reference_scores/12", |b| b.iter(|| per_reference_scores(black_box(&ids), &scenario, x0)));
}

fn solver(c: &mut Criterion) {
    let (scenario, toas) = umi_fixture(5);
    let sel = select_distance(&scenario, 4).unwrap();
    let system = tdoa_from_toa(&toas, sel.reference_id, &sel.ordered_ids).unwrap().system(&scenario).unwrap();
    let start = centroid(&system.positions()).unwrap();
    let cfg = SolverConfig::default();
    c.bench_function("solve/4", |b| b.iter(|| solve(black_box(&system), start, &cfg).unwrap()));
}

fn selection(c: &mut Criterion) {
    let (scenario, toas) = ioo_fixture(9);
    let cfg = SolverConfig::default();
    c.bench_function("select_gdop/ioo", |b| b.iter(|| select_gdop(black_box(&scenario), &toas, 4, &cfg).unwrap()));
}

fn trial(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial");
    for kind in [ScenarioKind::Ioo, ScenarioKind::Umi] {
        let cfg = ExperimentConfig::new(kind);
        let mut t = 0;
        group.bench_function(format!("{kind:?}"), |b| {
            b.iter_batched(
                || {
                    t += 1;
                    t
                },
                |t| run_trial(&cfg, t).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, gdop_scores, solver, selection, trial);
criterion_main!(benches);

//! Stage benchmarks over reproducible random instances.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cppweave_core::fixtures;
use cppweave_core::group::{form_groups, Mode};
use cppweave_core::routing::Metric;
use cppweave_core::spp::solve_spp;
use cppweave_core::trail::build_trails;
use cppweave_core::verify::verify_all;

fn bench_routing(c: &mut Criterion) {
    let mut g = c.benchmark_group("routing");
    for nodes in [8usize, 12, 16] {
        let (t, demands) = fixtures::random_instance(1, nodes..=nodes, 4..=4);
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| solve_spp(&t, &demands, Metric::Length).unwrap())
        });
    }
    g.finish();
}

fn bench_conversion(c: &mut Criterion) {
    let mut g = c.benchmark_group("conversion");
    for demands_n in [4u32, 6, 8] {
        let (t, demands) =
            fixtures::random_instance(2, 10..=10, demands_n as usize..=demands_n as usize);
        let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(demands_n), &demands_n, |b, _| {
            b.iter(|| form_groups(&sol, &t, Mode::Strict))
        });
    }
    g.finish();
}

fn bench_trails_and_verify(c: &mut Criterion) {
    let (t, demands) = fixtures::random_instance(3, 10..=10, 6..=6);
    let sol = solve_spp(&t, &demands, Metric::Length).unwrap();
    let design = form_groups(&sol, &t, Mode::Strict);
    c.bench_function("trails", |b| {
        b.iter(|| {
            for gd in &design.groups {
                build_trails(&gd.group, &gd.tree, &sol.demands, &t, 0).unwrap();
            }
        })
    });
    c.bench_function("verify_all", |b| {
        b.iter(|| verify_all(&design, &t).unwrap())
    });
}

criterion_group!(benches, bench_routing, bench_conversion, bench_trails_and_verify);
criterion_main!(benches);

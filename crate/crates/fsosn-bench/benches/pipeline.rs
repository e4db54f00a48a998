//! Pipeline stage timings at full constellation scale: propagation, graph
//! build, per-cell snapshot filtering, routing, and the link-budget chain.
//! Sample counts are modest — these exist to catch order-of-magnitude
//! regressions, not microsecond drift.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fsosn_core::linkbudget::{isl_transmit_power_w, updown_transmit_power_w};
use fsosn_core::netgraph::{LinkModel, NodeRef, SnapshotUniverse};
use fsosn_core::optimizer::{node_weighted_shortest_path, solve_greedy, RoutingProblem};
use fsosn_core::orbital::propagate_constellation;
use fsosn_core::studio::default_scenario;

fn bench_propagation(c: &mut Criterion) {
    let spec = default_scenario().constellation_spec();
    c.bench_function("propagate_1584_satellites", |b| {
        b.iter(|| propagate_constellation(black_box(&spec), black_box(17.0)))
    });
}

fn bench_graph(c: &mut Criterion) {
    let scenario = default_scenario();
    let spec = scenario.constellation_spec();
    let sites = scenario.ground_sites().unwrap();
    let model = LinkModel::default();
    let max_range = scenario.max_range_km();
    let positions = propagate_constellation(&spec, 17.0);

    let mut group = c.benchmark_group("graph");
    group.sample_size(20);
    group.bench_function("universe_build_full_shell", |b| {
        b.iter(|| {
            SnapshotUniverse::build(
                black_box(&positions),
                black_box(&sites),
                &model,
                max_range,
                17.0,
            )
            .unwrap()
        })
    });

    let universe = SnapshotUniverse::build(&positions, &sites, &model, max_range, 17.0).unwrap();
    group.bench_function("snapshot_filter_1575_unlimited", |b| {
        b.iter(|| universe.snapshot(black_box(1575.0), None).unwrap())
    });
    group.finish();
}

fn bench_routing(c: &mut Criterion) {
    let scenario = default_scenario();
    let spec = scenario.constellation_spec();
    let sites = scenario.ground_sites().unwrap();
    let positions = propagate_constellation(&spec, 17.0);
    let universe = SnapshotUniverse::build(
        &positions,
        &sites,
        &LinkModel::default(),
        scenario.max_range_km(),
        17.0,
    )
    .unwrap();
    let snapshot = universe.snapshot(1575.0, None).unwrap();

    // Commodity endpoints by name-sorted ground index, as the sweep does.
    let mut names: Vec<&str> = scenario
        .ground_stations
        .iter()
        .map(|s| s.name.as_str())
        .collect();
    names.sort_unstable();
    let ground = |name: &str| NodeRef::Ground(names.binary_search(&name).unwrap() as u32);
    let commodities: Vec<_> = scenario
        .connections
        .iter()
        .enumerate()
        .map(|(id, conn)| fsosn_core::Commodity {
            id,
            source: ground(&conn.source),
            destination: ground(&conn.destination),
        })
        .collect();

    let mut group = c.benchmark_group("routing");
    group.sample_size(20);
    group.bench_function("shortest_path_ny_london_1575", |b| {
        b.iter(|| {
            node_weighted_shortest_path(
                black_box(&snapshot),
                ground("New York"),
                ground("London"),
                10.0,
                None,
            )
            .unwrap()
        })
    });
    group.bench_function("greedy_cell_5_connections_1575", |b| {
        b.iter(|| {
            let problem = RoutingProblem::new(&snapshot, commodities.clone()).unwrap();
            solve_greedy(black_box(&problem))
        })
    });
    group.finish();
}

fn bench_linkbudget(c: &mut Criterion) {
    let model = LinkModel::default();
    c.bench_function("isl_power_5016km", |b| {
        b.iter(|| isl_transmit_power_w(black_box(&model.optical), black_box(5016.6)).unwrap())
    });
    c.bench_function("updown_power_550km_zenith", |b| {
        b.iter(|| {
            updown_transmit_power_w(
                black_box(&model.optical),
                black_box(&model.atmosphere),
                550.0,
                90.0,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_propagation,
    bench_graph,
    bench_routing,
    bench_linkbudget
);
criterion_main!(benches);

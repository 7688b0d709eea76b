use std::hint::black_box;

use ccabc_bench::square_config;
use ccabc_core::clustering::select_seed_positions;
use ccabc_core::network::deploy;
use ccabc_core::{generate_clusters, Grid, SeedSpec, Simulation};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn ca_step(c: &mut Criterion) {
    let config = square_config(150);
    let rules = config.rules();
    let grid = Grid::new(
        150,
        150,
        config.ca.k,
        &SeedSpec::PrimordialSoup { rng_seed: 3 },
    )
    .unwrap();
    let mut out = grid.clone();
    c.bench_function("ca_step_150", |b| {
        b.iter(|| {
            grid.step_into(&rules, &mut out);
            black_box(&out);
        })
    });
}

fn formation(c: &mut Criterion) {
    let mut group = c.benchmark_group("formation");
    group.sample_size(10);
    for side in [50, 150] {
        let config = square_config(side);
        let network = deploy(
            (side, side),
            config.bs_pos(),
            config.energy.initial,
            config.simulation.sensing_radius,
        );
        let seeds = select_seed_positions(&network, config.seed_count(), 1).unwrap();
        let energy = config.energy_params(&network);
        let params = config.formation_params(energy, 100.0);
        group.bench_function(format!("{side}x{side}"), |b| {
            b.iter(|| black_box(generate_clusters(&network, &params, &seeds).unwrap()))
        });
    }
    group.finish();
}

fn round(c: &mut Criterion) {
    let mut group = c.benchmark_group("round");
    for side in [50, 150] {
        let config = square_config(side);
        let sim = Simulation::new(&config).unwrap();
        group.bench_function(format!("{side}x{side}"), |b| {
            b.iter_batched(
                || sim.clone(),
                |mut s| black_box(s.step()),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, ca_step, formation, round);
criterion_main!(benches);

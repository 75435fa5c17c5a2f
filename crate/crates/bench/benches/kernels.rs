use criterion::{black_box, criterion_group, criterion_main, Criterion};
use liectrl::simulation::{reach_grid, NilpotentGroup};
use liectrl::{decompose, Derivation, Tolerances};
use liectrl_bench::{cube_problem, free_nilpotent, heisenberg};

fn bracket(c: &mut Criterion) {
    let alg = free_nilpotent();
    let x = [0.3, -1.2, 0.7, 0.1, 0.0, 2.0];
    let y = [1.1, 0.4, -0.5, 0.0, 0.3, -1.0];
    let mut out = [0.0; 6];
    c.bench_function("bracket_6d", |b| {
        b.iter(|| alg.bracket_into(black_box(&x), black_box(&y), &mut out))
    });
}

fn bch(c: &mut Criterion) {
    let group = NilpotentGroup::new(free_nilpotent()).unwrap();
    let x = [0.3, -1.2, 0.7, 0.1, 0.0, 2.0];
    let y = [1.1, 0.4, -0.5, 0.0, 0.3, -1.0];
    c.bench_function("bch_6d", |b| b.iter(|| group.product(black_box(&x), black_box(&y))));
}

fn decomposition(c: &mut Criterion) {
    let alg = free_nilpotent();
    // Grading by degree, twisted so that the spectrum has both signs.
    let d = Derivation::diagonal(&[1.0, -2.0, 0.5, -1.0, 1.5, -1.5]);
    let tol = Tolerances::default();
    c.bench_function("decompose_6d", |b| b.iter(|| decompose(&alg, black_box(&d), &tol).unwrap()));
}

fn reach(c: &mut Criterion) {
    let spec = heisenberg(0.0, 0.0);
    let problem = cube_problem(&spec, 2.0, 21);
    let mut group = c.benchmark_group("reach");
    group.sample_size(10);
    group.bench_function("heisenberg_21_cells_t2", |b| b.iter(|| reach_grid(&spec, &problem, 2.0).unwrap()));
    group.finish();
}

criterion_group!(benches, bracket, bch, decomposition, reach);
criterion_main!(benches);

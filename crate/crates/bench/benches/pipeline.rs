use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ness_core::model::{tfim_chain, xxz_dephasing};
use ness_core::oracle::{sparse_steady_state, SparseOptions};
use ness_core::pauli::ops;
use ness_core::symmetry::{twirl_all, RhoCombination, SymmetrySpec};
use ness_core::{assemble, moment_states, solve_feasibility, FeasibilityProblem, SeedDescriptor, SolverOptions};

fn bits(n: usize) -> SeedDescriptor {
    SeedDescriptor::Bitstring { bits: "0".repeat(n) }
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for n in [3, 5, 7] {
        let model = tfim_chain(n, 1.0, 1.0).unwrap();
        let ansatz = moment_states(&model.hamiltonian, &bits(n), 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| assemble(&model, &ansatz).unwrap())
        });
    }
    group.finish();
}

fn feasibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_feasibility");
    group.sample_size(10);
    for n in [2, 3, 4] {
        let model = tfim_chain(n, 1.0, 1.0).unwrap();
        let ansatz = moment_states(&model.hamiltonian, &bits(n), 2 * n - 2).unwrap();
        let problem = FeasibilityProblem {
            overlaps: assemble(&model, &ansatz).unwrap(),
            constraints: Vec::new(),
            options: SolverOptions::default(),
        };
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_feasibility(&problem))
        });
    }
    group.finish();
}

fn sparse_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("sparse_oracle");
    group.sample_size(10);
    for n in [6, 8] {
        let model = tfim_chain(n, 1.0, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| sparse_steady_state(&model, &SparseOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn twirl(c: &mut Criterion) {
    let mut group = c.benchmark_group("twirl_all");
    for n in [3, 4] {
        let model = xxz_dephasing(n, 1.0, 1.0).unwrap();
        let spec = SymmetrySpec::magnetization("M", &ops::magnetization(n)).unwrap();
        let ansatz = moment_states(&model.hamiltonian, &SeedDescriptor::Random { rng_seed: 7 }, 2).unwrap();
        let beta = ness_core::linalg::identity(ansatz.len());
        let rc = RhoCombination::new(ansatz.density(&beta).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| twirl_all(&rc, &spec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, feasibility, sparse_oracle, twirl);
criterion_main!(benches);

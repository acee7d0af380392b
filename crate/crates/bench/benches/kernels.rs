use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mvsim_core::gatekit::{cnot, hadamard, omega_all, op1, op2, op3, toffoli};
use mvsim_core::multiverse::{evolve_step, sample_noise_operators};
use mvsim_core::qstate::basis_state;
use mvsim_core::testing::{random_density, random_state, random_unitary};
use mvsim_core::{densitylab, DensityMatrix, NoiseModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn state_kernels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("state_kernels");
    for nq in [12usize, 16, 20] {
        let psi = random_state(nq, &mut rng);
        let u = random_unitary(1, &mut rng);
        group.bench_with_input(BenchmarkId::new("op1", nq), &psi, |b, psi| {
            b.iter(|| op1(&u, nq / 2, black_box(psi)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("op2_cnot", nq), &psi, |b, psi| {
            b.iter(|| op2(&cnot(), 1, nq, black_box(psi)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("op3_toffoli", nq), &psi, |b, psi| {
            b.iter(|| op3(&toffoli(), 1, nq / 2, nq, black_box(psi)).unwrap())
        });
    }
    for nq in [16usize, 20] {
        let psi = basis_state(nq, 0).unwrap();
        group.bench_with_input(BenchmarkId::new("omega_all_h", nq), &psi, |b, psi| {
            b.iter(|| omega_all(&hadamard(), black_box(psi)).unwrap())
        });
    }
    group.finish();
}

fn density_steps(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("density");
    group.sample_size(20);
    for nq in [2usize, 4, 6] {
        let rho = random_density(nq, &mut rng);
        let model = NoiseModel::default().with_paths(16).with_seed(3);
        let events = sample_noise_operators(&model, nq, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("evolve_step", nq), &rho, |b, rho| {
            b.iter(|| evolve_step(black_box(rho), None, &events, &model).unwrap())
        });
        let rho0 = DensityMatrix::pure(&random_state(nq, &mut rng));
        group.bench_with_input(BenchmarkId::new("fidelity", nq), &rho, |b, rho| {
            b.iter(|| densitylab::fidelity(black_box(rho), &rho0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("entropy", nq), &rho, |b, rho| {
            b.iter(|| densitylab::entropy(black_box(rho)))
        });
    }
    group.finish();
}

criterion_group!(benches, state_kernels, density_steps);
criterion_main!(benches);

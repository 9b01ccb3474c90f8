use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use kicked_duo::{ClassicalEnsemble, GramMatrix, ModelParams, QuantumState, Representation};
use kicked_duo_bench::spread_state;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GRIDS: &[(usize, usize)] = &[(1024, 32), (4096, 64)];

fn floquet(c: &mut Criterion) {
    let mut g = c.benchmark_group("floquet_step");
    g.sample_size(20);
    for &(nc, ni) in GRIDS {
        let (prop, state) = spread_state(nc, ni, 5);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{nc}x{ni}")), &state, |b, s| {
            b.iter_batched_ref(|| s.clone(), |s| prop.floquet_step(s).unwrap(), BatchSize::LargeInput)
        });
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("to_mom_level");
    g.sample_size(20);
    for &(nc, ni) in GRIDS {
        let p = ModelParams::from_com(1.0, 5.0, 1.0, 0.25, 0.5, nc, ni, 1).unwrap();
        let basis = kicked_duo::SpectralBasis::new(&p);
        let s = QuantumState::random(&p, Representation::PosPos, &mut ChaCha8Rng::seed_from_u64(1));
        g.bench_with_input(BenchmarkId::from_parameter(format!("{nc}x{ni}")), &s, |b, s| {
            b.iter_batched_ref(|| s.clone(), |s| basis.to_mom_level(s).unwrap(), BatchSize::LargeInput)
        });
    }
    g.finish();
}

fn gram(c: &mut Criterion) {
    let mut g = c.benchmark_group("gram");
    g.sample_size(10);
    for &(nc, ni) in GRIDS {
        let (prop, mut s) = spread_state(nc, ni, 5);
        prop.basis().to_mom_level(&mut s).unwrap();
        g.bench_function(BenchmarkId::new("matrix", format!("{nc}x{ni}")), |b| {
            b.iter(|| GramMatrix::from_state(&s).unwrap())
        });
        let gm = GramMatrix::from_state(&s).unwrap();
        g.bench_function(BenchmarkId::new("von_neumann", format!("{nc}x{ni}")), |b| {
            b.iter(|| gm.von_neumann_entropy(1e-14))
        });
    }
    g.finish();
}

fn classical(c: &mut Criterion) {
    let p = ModelParams::from_com(1.0, 5.0, 1.0, 0.25, 0.5, 16, 4, 1).unwrap();
    let ens = ClassicalEnsemble::sample(&p, 100_000, 1).unwrap();
    c.bench_function("classical_step/100000", |b| {
        b.iter_batched_ref(|| ens.clone(), |e| e.step(), BatchSize::LargeInput)
    });
}

criterion_group!(benches, floquet, transforms, gram, classical);
criterion_main!(benches);

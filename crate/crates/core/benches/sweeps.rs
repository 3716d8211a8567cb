//! Sequential vs data-parallel evaluation of the verification sweeps.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use specwres::clifford::{verify_trace_lemma_hodge_with, CliffordRep, ModuleKind};
use specwres::jets::{seeded_rng, TorsionJet};
use specwres::operators::verify_trb_identities;
use specwres::parallel::Execution;
use specwres::verify::{run, Group, VerifyOptions};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn trace_identities(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace_identities");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    for n in [4usize, 6] {
        let rep = CliffordRep::build(ModuleKind::Hodge, n).expect("hodge module");
        let t = TorsionJet::random_torsion(n, &mut seeded_rng(1)).value;
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("lemmas/{name}"), n), &n, |b, _| {
                b.iter(|| verify_trace_lemma_hodge_with(black_box(&rep), exec).expect("lemmas"))
            });
            group.bench_with_input(BenchmarkId::new(format!("torsion/{name}"), n), &n, |b, _| {
                b.iter(|| verify_trb_identities(black_box(&t), &rep, exec).expect("identities"))
            });
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    for g in [Group::Vanishing, Group::TwoPath, Group::Chiral] {
        for (name, exec) in MODES {
            let opts = VerifyOptions { groups: vec![g], n: Some(4), seed: 7, count: 8, exec, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, g.name()), &opts, |b, o| b.iter(|| run(black_box(o)).expect("sweep")));
        }
    }
    group.finish();
}

criterion_group!(benches, trace_identities, sweeps);
criterion_main!(benches);

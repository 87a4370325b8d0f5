use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use epswb_core::eff::suite::{certify_instance, hilbertian_candidates, numerals};
use epswb_core::eff::{synthesize_epsilon, EffConfig};
use epswb_core::finite_topos::{characterization_sweep, check_epsilon_topos, ToposCtx};
use epswb_core::Exec;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn topos(c: &mut Criterion) {
    let mut g = c.benchmark_group("finite_topos");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new("characterization_sweep/1x3", name), &exec, |b, &exec| {
            b.iter(|| black_box(characterization_sweep(ToposCtx::new(1).unwrap(), 3, exec)))
        });
        g.bench_with_input(BenchmarkId::new("check_epsilon_topos/2x2", name), &exec, |b, &exec| {
            b.iter(|| black_box(check_epsilon_topos(ToposCtx::new(2).unwrap(), 2, exec)))
        });
    }
    g.finish();
}

fn eff(c: &mut Criterion) {
    let candidates = hilbertian_candidates(2, &[numerals(&[0]), numerals(&[1, 2])]);
    let mut g = c.benchmark_group("eff");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        let cfg = EffConfig { exec, ..EffConfig::default() };
        g.bench_with_input(BenchmarkId::new("hilbertian/2", name), &cfg, |b, cfg| {
            b.iter(|| {
                for (shape, values) in &candidates {
                    let inst = certify_instance(shape, values, cfg).unwrap();
                    black_box(synthesize_epsilon(&inst.prop, cfg).unwrap());
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, topos, eff);
criterion_main!(benches);

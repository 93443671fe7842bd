use criterion::{black_box, criterion_group, criterion_main, Criterion};

use henkin_core::analysis;
use henkin_core::fmac::{self, Fmac};
use henkin_core::logic::{FiniteStructure, Signature};
use henkin_core::providers::provider_by_name;
use henkin_core::scheduler::{self, AuditMode, AuditOptions, RunConfig};

fn construct(provider: &str, rounds: usize) -> henkin_core::ConstructionLog {
    let mut p = provider_by_name(provider, 1).unwrap();
    scheduler::run(p.as_mut(), &RunConfig::new(rounds, 1)).unwrap()
}

fn runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    g.sample_size(10);
    for (p, r) in [("pure-set", 3), ("random-graph", 3), ("vector-f2", 3)] {
        g.bench_function(format!("{p}-r{r}"), |b| b.iter(|| construct(black_box(p), r)));
    }
    g.finish();
}

fn audits(c: &mut Criterion) {
    let log = construct("random-graph", 3);
    let opts = AuditOptions::default();
    let mut g = c.benchmark_group("audit");
    g.sample_size(10);
    for m in [AuditMode::ChainValidity, AuditMode::SplittingDistinctness, AuditMode::Decidedness] {
        g.bench_function(m.as_str(), |b| b.iter(|| scheduler::audit(&log, m, &opts).unwrap()));
    }
    g.finish();
}

fn fmac_ops(c: &mut Criterion) {
    let a: Fmac = "0,1".parse().unwrap();
    let b = Fmac::standard(6);
    c.bench_function("fmac/lifting-count", |x| x.iter(|| fmac::lifting_count(black_box(&a), black_box(&b)).unwrap()));
    c.bench_function("fmac/factor-cover", |x| x.iter(|| fmac::factor_cover(black_box(&Fmac::root()), black_box(&b)).unwrap()));
}

fn rank(c: &mut Criterion) {
    let mut m = FiniteStructure::new(Signature::pure_equality());
    for i in 0..8 {
        m.add_elem(&format!("a{i}"));
    }
    c.bench_function("sprk/pure-8", |x| x.iter(|| analysis::sprk(&m, black_box(&[0]), 8).unwrap()));
}

criterion_group!(benches, runs, audits, fmac_ops, rank);
criterion_main!(benches);

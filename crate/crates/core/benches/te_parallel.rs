use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tecnet_core::market::segment_by_calendar;
use tecnet_core::synthetic::{generate_var_returns, CouplingSpec, TRADING_DAYS_PER_MONTH};
use tecnet_core::te::{te_series, LagPolicy, TeConfig};
use tecnet_core::Execution;

fn bench_te_series(c: &mut Criterion) {
    let spec = CouplingSpec::ten_market_demo(1);
    let policy = LagPolicy::time_zone();
    let cfg = TeConfig::default();
    let mut group = c.benchmark_group("te_series");
    group.sample_size(10);
    for months in [36usize, 120] {
        let rp = generate_var_returns(&spec, months * TRADING_DAYS_PER_MONTH).unwrap();
        let segs = segment_by_calendar(&rp, 12, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("sequential", months), &segs, |b, segs| {
            b.iter(|| te_series(segs, &policy, &cfg, Execution::Sequential).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", months), &segs, |b, segs| {
            b.iter(|| te_series(segs, &policy, &cfg, Execution::Parallel).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_te_series);
criterion_main!(benches);

use bepgp_bench::{fixture, run_workload, WORKLOADS};
use criterion::{criterion_group, criterion_main, Criterion};

fn workloads(c: &mut Criterion) {
    for (rows, basis) in [(242, 50), (242, 250)] {
        let f = fixture(rows, basis).expect("fixture");
        let mut group = c.benchmark_group(format!("m{rows}_n{basis}"));
        group.sample_size(10);
        for w in WORKLOADS {
            group.bench_function(w, |b| b.iter(|| run_workload(w, &f).expect("workload")));
        }
        group.finish();
    }
}

criterion_group!(benches, workloads);
criterion_main!(benches);

//! Sequential vs rayon evaluation of the same checks at the same points.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sqm_core::parse::parse;
use sqm_core::verify::{check_expected, check_fd_oracle};
use sqm_core::zoo::{self, DeRhamOptions, Model};
use sqm_core::{Checker, Execution, Field};

fn de_rham_2d() -> Model {
    let n: Vec<String> = (1..=2).map(|k| format!("x{k}")).collect();
    let om = ["0.3*x1*x2", "0.2*x1", "0.2*x1", "0.1*x2^2"].map(|s| parse(s, &n).unwrap());
    zoo::de_rham(&Field::exprs(2, 2, om.to_vec()), &DeRhamOptions::default()).unwrap()
}

fn models() -> Vec<Model> {
    vec![de_rham_2d(), zoo::instanton(1.0).unwrap(), zoo::wz_modes(&[[0, 0, 0], [1, 0, 0]]).unwrap()]
}

fn bench_checks(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_expected");
    g.sample_size(10);
    for m in models() {
        let spec = m.sample_spec(32, 1).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let ck = Checker::new(spec.clone()).unwrap().with_exec(exec);
            g.bench_with_input(BenchmarkId::new(format!("{exec:?}"), &m.name), &ck, |b, ck| b.iter(|| black_box(check_expected(&m, ck).unwrap())));
        }
    }
    g.finish();
}

fn bench_fd(c: &mut Criterion) {
    let mut g = c.benchmark_group("fd_oracle");
    g.sample_size(10);
    let m = de_rham_2d();
    let fields = m.charge_fields();
    let spec = m.sample_spec(32, 1).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let ck = Checker::new(spec.clone()).unwrap().with_exec(exec);
        g.bench_function(format!("{exec:?}"), |b| b.iter(|| black_box(check_fd_oracle("fd", &fields, 2, &ck).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, bench_checks, bench_fd);
criterion_main!(benches);

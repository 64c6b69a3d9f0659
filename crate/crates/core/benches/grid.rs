use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flatfix::averaging::{det_table, InvariantData};
use flatfix::io::{InputDocument, Problem};
use flatfix::oracle::enumerate_fixed_points;
use flatfix::trace::reidemeister_trace;

fn fixture(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    InputDocument::from_json(&std::fs::read_to_string(path).unwrap()).unwrap().build().unwrap()
}

type Runner = Box<dyn Fn(&mut (dyn FnMut() + Send))>;

/// Pools to compare: one worker against the default width.
fn pools() -> Vec<(String, Runner)> {
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let all = rayon::ThreadPoolBuilder::new().build().unwrap();
        let width = all.current_num_threads();
        vec![
            ("sequential".into(), Box::new(move |f: &mut (dyn FnMut() + Send)| one.install(f))),
            (format!("parallel-{width}"), Box::new(move |f: &mut (dyn FnMut() + Send)| all.install(f))),
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![("sequential".into(), Box::new(|f: &mut (dyn FnMut() + Send)| f()))]
    }
}

fn bench(c: &mut Criterion) {
    let cases = ["hantzsche_wendt_times3.json", "torus2_three_branch.json", "torus2_mixed.json"];
    let problems: Vec<(&str, Problem)> = cases.iter().map(|n| (*n, fixture(n))).collect();
    let pools = pools();

    let mut g = c.benchmark_group("det_table");
    for (name, p) in &problems {
        let inv = InvariantData::new(&p.morphism).unwrap();
        for (label, pool) in &pools {
            g.bench_function(BenchmarkId::new(label.as_str(), name), |b| {
                pool(&mut || b.iter(|| det_table(&inv).unwrap()))
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("trace");
    g.sample_size(20);
    for (name, p) in &problems {
        for (label, pool) in &pools {
            g.bench_function(BenchmarkId::new(label.as_str(), name), |b| {
                pool(&mut || b.iter(|| reidemeister_trace(&p.morphism).unwrap()))
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    for (name, p) in &problems {
        let lift = p.lift.as_ref().unwrap();
        for (label, pool) in &pools {
            g.bench_function(BenchmarkId::new(label.as_str(), name), |b| {
                pool(&mut || b.iter(|| enumerate_fixed_points(&p.morphism, lift, &p.oracle).unwrap()))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);

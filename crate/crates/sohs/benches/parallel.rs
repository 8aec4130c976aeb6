//! Compares the sequential and parallel Betti-table paths: subsets of the
//! vertex set are independent work items, so the parallel build should win
//! once the ambient dimension makes the subset count large.

use criterion::{criterion_group, criterion_main, Criterion};
use sohs::completion::SpecGraph;
use sohs::regularity::{betti_table_seq, MonomialIdeal};

#[cfg(feature = "parallel")]
use sohs::regularity::betti_table_par;

/// Ideal of a pattern whose specification graph is the n-cycle: one
/// generator per chord.
fn cycle_ideal(n: usize) -> MonomialIdeal {
    let mut g = SpecGraph::new(n);
    for v in 0..n {
        g.add_edge(v, (v + 1) % n);
    }
    let pairs: Vec<(usize, usize)> = g.complement().edges();
    MonomialIdeal::new(n, pairs).unwrap()
}

/// Ideal of a two-clique pattern: generators are exactly the cross pairs.
fn split_ideal(n: usize) -> MonomialIdeal {
    let half = n / 2;
    let mut pairs = Vec::new();
    for i in 0..half {
        for j in half..n {
            pairs.push((i, j));
        }
    }
    MonomialIdeal::new(n, pairs).unwrap()
}

fn bench_betti(c: &mut Criterion) {
    let cases = [
        ("cycle-10", cycle_ideal(10)),
        ("cycle-12", cycle_ideal(12)),
        ("split-10", split_ideal(10)),
    ];
    let mut group = c.benchmark_group("betti_table");
    group.sample_size(10);
    for (name, ideal) in &cases {
        group.bench_function(format!("seq/{name}"), |b| {
            b.iter(|| betti_table_seq(ideal).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_function(format!("par/{name}"), |b| {
            b.iter(|| betti_table_par(ideal).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_betti);
criterion_main!(benches);

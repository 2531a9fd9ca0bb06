//! Fixtures shared by the benchmarks.

use spinbound_core::search::sample_weights;
use spinbound_core::{Graph, ListAssignment, NonNegValue, WeightSystem};

/// Random general weights with entries in 1..=9.
pub fn random_weights(g: &Graph, m: usize, seed: u64) -> WeightSystem {
    sample_weights(g, m, seed, 9, false)
}

/// Unit vertex weights and every edge weight equal to 1/2.
pub fn half_edge_weights(g: &Graph, m: usize) -> WeightSystem {
    let mut w = WeightSystem::ones(g, m);
    w.set_all_edges(&vec![vec![NonNegValue::ratio(1, 2); m]; m]);
    w
}

/// Lists `{v mod h, v+1 mod h}` on every vertex.
pub fn sliding_lists(n: usize, h: usize) -> ListAssignment {
    let mut l = ListAssignment::full(n, h);
    for v in 0..n {
        let mut list = vec![v % h, (v + 1) % h];
        list.sort_unstable();
        list.dedup();
        l.set(v, list).unwrap();
    }
    l
}

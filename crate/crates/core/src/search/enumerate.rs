//! Enumeration of small graphs up to isomorphism.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::canon::{canonical_form, CanonicalForm};
use crate::graph::{bipartition, Graph};

/// Largest order for general (and bipartite) enumeration.
pub const MAX_GENERAL_N: usize = 10;
/// Largest order for biregular enumeration.
pub const MAX_BIREGULAR_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("n_max = {n_max} exceeds the ceiling {ceiling} for {filter} enumeration")]
    Ceiling { n_max: usize, ceiling: usize, filter: String },
    #[error("biregular degrees must be positive, got ({a}, {b})")]
    Degrees { a: usize, b: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphFilter {
    /// Bipartite with one class of degree `a` and the other of degree `b`.
    Biregular { a: usize, b: usize },
    Bipartite,
    All,
}

impl fmt::Display for GraphFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFilter::Biregular { a, b } => write!(f, "biregular({a},{b})"),
            GraphFilter::Bipartite => f.write_str("bipartite"),
            GraphFilter::All => f.write_str("all"),
        }
    }
}

impl FromStr for GraphFilter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(GraphFilter::All),
            "bipartite" => Ok(GraphFilter::Bipartite),
            _ => {
                let inner = s
                    .strip_prefix("biregular(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("unknown graph filter `{s}`"))?;
                let (a, b) = inner.split_once(',').ok_or_else(|| format!("expected biregular(a,b), got `{s}`"))?;
                let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad degree `{x}`"));
                Ok(GraphFilter::Biregular { a: parse(a)?, b: parse(b)? })
            }
        }
    }
}

/// Every graph of the class on `2..=n_max` vertices with at least one edge,
/// exactly once up to isomorphism, canonically labelled, ordered by vertex
/// count and then canonical form.
pub fn enumerate_graphs(n_max: usize, filter: GraphFilter, connected_only: bool) -> Result<Vec<Graph>, EnumerateError> {
    let ceiling = match filter {
        GraphFilter::Biregular { .. } => MAX_BIREGULAR_N,
        _ => MAX_GENERAL_N,
    };
    if n_max > ceiling {
        return Err(EnumerateError::Ceiling { n_max, ceiling, filter: filter.to_string() });
    }
    let forms = match filter {
        GraphFilter::Biregular { a, b } => {
            if a == 0 || b == 0 {
                return Err(EnumerateError::Degrees { a, b });
            }
            biregular_forms(n_max, a, b)
        }
        GraphFilter::Bipartite | GraphFilter::All => all_forms(n_max),
    };
    Ok(forms
        .into_iter()
        .map(|f| f.to_graph())
        .filter(|g| g.n() >= 2 && g.edge_count() > 0)
        .filter(|g| !connected_only || g.is_connected())
        .filter(|g| filter != GraphFilter::Bipartite || bipartition(g).is_ok())
        .collect())
}

/// All graphs on `1..=n_max` vertices, each order grown from the previous one
/// by attaching a new vertex to every subset of the existing ones.
fn all_forms(n_max: usize) -> Vec<CanonicalForm> {
    if n_max == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut level: Vec<CanonicalForm> = vec![canonical_form(&Graph::new(1, []).expect("single vertex"))];
    for n in 2..=n_max {
        let mut next = BTreeMap::new();
        for f in &level {
            let g = f.to_graph();
            for mask in 0u64..1 << (n - 1) {
                let edges = g.edges().iter().copied().chain((0..n - 1).filter(|&u| mask >> u & 1 == 1).map(|u| (u, n - 1)));
                let h = Graph::new(n, edges).expect("new vertex adds fresh edges");
                next.entry(canonical_form(&h)).or_insert(());
            }
        }
        out.append(&mut level);
        level = next.into_keys().collect();
    }
    out.append(&mut level);
    out
}

/// Bipartite graphs with `p` vertices of degree `a` and `q` of degree `b`,
/// `p a = q b`, built row by row: each degree-`a` vertex picks an `a`-subset
/// of the other class, rows in non-decreasing order, with column degrees
/// pruned at `b`.
fn biregular_forms(n_max: usize, a: usize, b: usize) -> Vec<CanonicalForm> {
    let mut found = BTreeMap::new();
    for p in 1..n_max {
        if !(p * a).is_multiple_of(b) {
            continue;
        }
        let q = p * a / b;
        if p + q > n_max || q < a || p < b {
            continue;
        }
        let subsets: Vec<u64> = (0u64..1 << q).filter(|s| s.count_ones() as usize == a).collect();
        let mut rows = Vec::with_capacity(p);
        let mut col = vec![0usize; q];
        extend_rows(p, q, b, &subsets, 0, &mut rows, &mut col, &mut |rows| {
            let edges = rows
                .iter()
                .enumerate()
                .flat_map(|(i, &s)| (0..q).filter(move |&j| s >> j & 1 == 1).map(move |j| (i, p + j)));
            let g = Graph::new(p + q, edges).expect("bipartite rows");
            found.entry(canonical_form(&g)).or_insert(());
        });
    }
    let mut forms: Vec<CanonicalForm> = found.into_keys().collect();
    forms.sort_by(|x, y| x.n().cmp(&y.n()).then_with(|| x.cmp(y)));
    forms
}

#[allow(clippy::too_many_arguments)]
fn extend_rows(
    p: usize,
    q: usize,
    b: usize,
    subsets: &[u64],
    from: usize,
    rows: &mut Vec<u64>,
    col: &mut [usize],
    emit: &mut impl FnMut(&[u64]),
) {
    if rows.len() == p {
        if col.iter().all(|&c| c == b) {
            emit(rows);
        }
        return;
    }
    let remaining = p - rows.len();
    // Each column still needs b - col[j] more rows, and only `remaining` are left.
    if col.iter().any(|&c| b - c > remaining) {
        return;
    }
    for (k, &s) in subsets.iter().enumerate().skip(from) {
        if (0..q).any(|j| s >> j & 1 == 1 && col[j] == b) {
            continue;
        }
        for j in 0..q {
            col[j] += (s >> j & 1) as usize;
        }
        rows.push(s);
        extend_rows(p, q, b, subsets, k, rows, col, emit);
        rows.pop();
        for j in 0..q {
            col[j] -= (s >> j & 1) as usize;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::certify;
    use std::collections::BTreeSet;

    /// Isomorphism classes by brute force over all labelled graphs and all
    /// vertex permutations (independent of the canonical form).
    fn brute_classes(n: usize, connected: bool) -> usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let mut perms = vec![vec![]];
        for k in 0..n {
            perms = perms
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..=k).map(move |i| {
                        let mut q = p.clone();
                        q.insert(i, k);
                        q
                    })
                })
                .collect();
        }
        let mut seen = BTreeSet::new();
        let mut classes = 0;
        for mask in 0u32..1 << pairs.len() {
            if seen.contains(&mask) {
                continue;
            }
            let g = Graph::new(n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e)).unwrap();
            for p in &perms {
                let image = g.relabel(p);
                let m = pairs.iter().enumerate().filter(|(_, &(u, v))| image.has_edge(u, v)).fold(0u32, |m, (i, _)| m | 1 << i);
                seen.insert(m);
            }
            if g.edge_count() > 0 && (!connected || g.is_connected()) {
                classes += 1;
            }
        }
        classes
    }

    #[test]
    fn two_regular_connected_are_cycles() {
        let gs = enumerate_graphs(8, GraphFilter::Biregular { a: 2, b: 2 }, true).unwrap();
        let forms: Vec<_> = gs.iter().map(canonical_form).collect();
        let cycles: Vec<_> = [4, 6, 8].iter().map(|&n| canonical_form(&Graph::cycle(n))).collect();
        assert_eq!(forms, cycles);
    }

    #[test]
    fn connected_graph_counts() {
        let gs = enumerate_graphs(4, GraphFilter::All, true).unwrap();
        assert_eq!(gs.iter().filter(|g| g.n() == 4).count(), 6);
        assert_eq!(gs.len(), 1 + 2 + 6);
        for n in 2..=5 {
            let ours = enumerate_graphs(n, GraphFilter::All, false).unwrap().iter().filter(|g| g.n() == n).count();
            assert_eq!(ours, brute_classes(n, false), "n = {n}");
        }
        let six = enumerate_graphs(6, GraphFilter::All, true).unwrap();
        assert_eq!(six.iter().filter(|g| g.n() == 6).count(), 112);
    }

    #[test]
    fn empty_and_ceiling() {
        assert!(enumerate_graphs(0, GraphFilter::All, false).unwrap().is_empty());
        assert!(enumerate_graphs(1, GraphFilter::All, false).unwrap().is_empty());
        assert!(matches!(enumerate_graphs(11, GraphFilter::All, false), Err(EnumerateError::Ceiling { .. })));
        assert!(matches!(
            enumerate_graphs(13, GraphFilter::Biregular { a: 2, b: 2 }, true),
            Err(EnumerateError::Ceiling { .. })
        ));
    }

    #[test]
    fn biregular_outputs_certify() {
        for (a, b) in [(1, 1), (2, 1), (3, 2), (3, 3), (2, 3)] {
            let gs = enumerate_graphs(10, GraphFilter::Biregular { a, b }, true).unwrap();
            assert!(!gs.is_empty());
            for g in &gs {
                let c = certify(g).unwrap();
                assert_eq!((c.a, c.b), (a.max(b), a.min(b)));
            }
        }
        let cubic = enumerate_graphs(10, GraphFilter::Biregular { a: 3, b: 3 }, true).unwrap();
        // K_{3,3}, the cube, and the two connected cubic bipartite graphs on 10 vertices.
        assert_eq!(cubic.len(), 4);
    }

    #[test]
    fn bipartite_filter_matches_all() {
        let all = enumerate_graphs(6, GraphFilter::All, true).unwrap();
        let bip = enumerate_graphs(6, GraphFilter::Bipartite, true).unwrap();
        assert_eq!(bip.len(), all.iter().filter(|g| bipartition(g).is_ok()).count());
        assert_eq!(bip.iter().filter(|g| g.n() == 6).count(), 17);
    }

    #[test]
    fn filter_round_trip() {
        for f in [GraphFilter::All, GraphFilter::Bipartite, GraphFilter::Biregular { a: 3, b: 2 }] {
            assert_eq!(f.to_string().parse::<GraphFilter>().unwrap(), f);
        }
    }
}

//! Canonical labelling of small graphs by colour refinement plus
//! individualization, used to deduplicate enumerated graphs.

use crate::graph::Graph;

/// Adjacency rows of a graph under its canonical labelling. Two graphs are
/// isomorphic iff their canonical forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    n: usize,
    rows: Vec<u64>,
}

impl CanonicalForm {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The graph whose vertex `k` is the `k`-th vertex of the labelling.
    pub fn to_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for (u, row) in self.rows.iter().enumerate() {
            for v in u + 1..self.n {
                if row >> v & 1 == 1 {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(self.n, edges).expect("rows describe a simple graph")
    }
}

struct Canon {
    n: usize,
    adj: Vec<u64>,
    best: Option<(Vec<u64>, Vec<usize>)>,
}

impl Canon {
    /// Splits cells by neighbour counts into every cell until stable. Cell
    /// order depends only on the counts, so the result is label-invariant.
    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        loop {
            let masks: Vec<u64> = cells.iter().map(|c| c.iter().fold(0, |m, &v| m | 1 << v)).collect();
            let mut out = Vec::with_capacity(cells.len());
            for cell in &cells {
                if cell.len() == 1 {
                    out.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(Vec<u32>, usize)> = cell
                    .iter()
                    .map(|&v| (masks.iter().map(|m| (self.adj[v] & m).count_ones()).collect(), v))
                    .collect();
                keyed.sort();
                let mut start = 0;
                for k in 1..=keyed.len() {
                    if k == keyed.len() || keyed[k].0 != keyed[start].0 {
                        out.push(keyed[start..k].iter().map(|(_, v)| *v).collect());
                        start = k;
                    }
                }
            }
            if out.len() == cells.len() {
                return out;
            }
            cells = out;
        }
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        self.adj[u] & !(1 << v) == self.adj[v] & !(1 << u)
    }

    fn search(&mut self, cells: Vec<Vec<usize>>) {
        let cells = self.refine(cells);
        let Some(t) = (0..cells.len()).filter(|&k| cells[k].len() > 1).min_by_key(|&k| (cells[k].len(), k)) else {
            let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
            let rows: Vec<u64> = order
                .iter()
                .map(|&u| order.iter().enumerate().fold(0u64, |r, (j, &v)| r | ((self.adj[u] >> v & 1) << j)))
                .collect();
            if self.best.as_ref().is_none_or(|(b, _)| rows < *b) {
                self.best = Some((rows, order));
            }
            return;
        };
        let cell = &cells[t];
        // Individualizing any one of a set of mutual twins gives the same leaves.
        let all_twins = cell.iter().all(|&u| cell.iter().all(|&v| u == v || self.twins(u, v)));
        let branch: Vec<usize> = if all_twins { vec![cell[0]] } else { cell.clone() };
        for v in branch {
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend_from_slice(&cells[..t]);
            next.push(vec![v]);
            next.push(cells[t].iter().copied().filter(|&u| u != v).collect());
            next.extend_from_slice(&cells[t + 1..]);
            self.search(next);
        }
    }
}

/// Canonical labelling: `order[k]` is the original vertex placed at position `k`.
pub fn canonical_labeling(g: &Graph) -> Vec<usize> {
    canonical(g).1
}

pub fn canonical_form(g: &Graph) -> CanonicalForm {
    CanonicalForm { n: g.n(), rows: canonical(g).0 }
}

fn canonical(g: &Graph) -> (Vec<u64>, Vec<usize>) {
    assert!(g.n() <= 64, "canonical forms support at most 64 vertices");
    let adj = (0..g.n()).map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u)).collect();
    let mut c = Canon { n: g.n(), adj, best: None };
    c.search(vec![(0..c.n).collect()]);
    c.best.expect("at least one leaf")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shuffled(g: &Graph, seed: u64) -> Graph {
        let mut perm: Vec<usize> = (0..g.n()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = crate::derive_seed(s, i as u64);
            perm.swap(i, (s % (i as u64 + 1)) as usize);
        }
        g.relabel(&perm)
    }

    #[test]
    fn invariant_under_relabelling() {
        let graphs = [
            Graph::cycle(6),
            Graph::hypercube(3),
            Graph::complete_bipartite(2, 3),
            Graph::complete(5),
            Graph::new(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 6), (6, 3), (0, 3)]).unwrap(),
        ];
        for g in &graphs {
            let f = canonical_form(g);
            for seed in 0..20 {
                assert_eq!(canonical_form(&shuffled(g, seed)), f);
            }
            assert_eq!(canonical_form(&f.to_graph()), f);
        }
    }

    #[test]
    fn separates_non_isomorphic_regular_graphs() {
        // Both 2-regular on 6 vertices; refinement alone cannot tell them apart.
        let c6 = Graph::cycle(6);
        let two_triangles = Graph::complete(3).disjoint_union(&Graph::complete(3));
        assert_ne!(canonical_form(&c6), canonical_form(&two_triangles));
        // The cube and the 3-regular "twisted" prism on 8 vertices.
        let prism = Graph::new(
            8,
            [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 7), (3, 6)],
        )
        .unwrap();
        assert_ne!(canonical_form(&Graph::hypercube(3)), canonical_form(&prism));
    }

    #[test]
    fn labeling_is_a_permutation_realizing_the_form() {
        let g = Graph::path(5);
        let order = canonical_labeling(&g);
        let mut pos = vec![0; g.n()];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        assert_eq!(canonical_form(&g).to_graph(), g.relabel(&pos));
    }
}

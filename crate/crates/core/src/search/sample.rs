//! Random weight systems and list instances for campaigns.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::lists::ListAssignment;
use crate::value::NonNegValue;
use crate::weights::{make_hardcore, make_hardcore_uniform, WeightSystem};

/// Which family of weight systems to draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Every vertex weight and every edge table entry independent.
    General,
    /// Independent vertex weights, one edge table shared by all edges.
    UniformEdge,
    /// Hard-core model (`m = 2`) with an independent activity per vertex.
    Hardcore,
    /// Hard-core model with one activity shared by all vertices.
    HardcoreUniform,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::General => "general",
            WeightKind::UniformEdge => "uniform_edge",
            WeightKind::Hardcore => "hardcore",
            WeightKind::HardcoreUniform => "hardcore_uniform",
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [WeightKind::General, WeightKind::UniformEdge, WeightKind::Hardcore, WeightKind::HardcoreUniform]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown weight kind `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSampler {
    /// Numerators and denominators are uniform on `1..=cap`.
    pub cap: u64,
    /// Zero each entry independently with probability 1/8.
    pub allow_zero: bool,
    pub kind: WeightKind,
}

impl WeightSampler {
    pub fn new(cap: u64, allow_zero: bool, kind: WeightKind) -> Self {
        assert!(cap >= 1, "cap must be at least 1");
        WeightSampler { cap, allow_zero, kind }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> NonNegValue {
        let (p, q) = draw_ratio(rng, self.cap);
        if self.allow_zero && rng.gen_range(0..8) == 0 {
            NonNegValue::zero()
        } else {
            NonNegValue::ratio(p, q)
        }
    }

    fn symmetric_table(&self, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<NonNegValue>> {
        let mut t = vec![vec![NonNegValue::zero(); m]; m];
        for i in 0..m {
            for j in i..m {
                let x = self.draw(rng);
                t[j][i] = x.clone();
                t[i][j] = x;
            }
        }
        t
    }

    /// A weight system for `g` with `m` spins (the hard-core kinds ignore `m`
    /// and use 2). Vertex weights are drawn first in vertex order, then edge
    /// tables in edge order with entries `i <= j` row by row.
    pub fn sample(&self, g: &Graph, m: usize, seed: u64) -> WeightSystem {
        assert!(m >= 1, "m must be at least 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.kind {
            WeightKind::General | WeightKind::UniformEdge => {
                let mut w = WeightSystem::ones(g, m);
                for v in 0..g.n() {
                    for i in 0..m {
                        w.set_vertex(v, i, self.draw(&mut rng));
                    }
                }
                if self.kind == WeightKind::UniformEdge {
                    w.set_all_edges(&self.symmetric_table(m, &mut rng));
                } else {
                    for e in 0..g.edge_count() {
                        let t = self.symmetric_table(m, &mut rng);
                        for (i, row) in t.into_iter().enumerate() {
                            for (j, x) in row.into_iter().enumerate() {
                                w.set_edge(e, i, j, x);
                            }
                        }
                    }
                }
                w
            }
            WeightKind::Hardcore => {
                let lam: Vec<NonNegValue> = (0..g.n()).map(|_| self.draw(&mut rng)).collect();
                make_hardcore(g, &lam).expect("one activity per vertex")
            }
            WeightKind::HardcoreUniform => make_hardcore_uniform(g, self.draw(&mut rng)),
        }
    }
}

/// One unreduced draw `(p, q)` with `p, q` uniform on `1..=cap`.
pub fn draw_ratio(rng: &mut impl Rng, cap: u64) -> (u64, u64) {
    (rng.gen_range(1..=cap), rng.gen_range(1..=cap))
}

/// Uniform rational weight system, all entries independent.
pub fn sample_weights(g: &Graph, m: usize, seed: u64, cap: u64, allow_zero: bool) -> WeightSystem {
    WeightSampler::new(cap, allow_zero, WeightKind::General).sample(g, m, seed)
}

/// A random target graph on `h_n` vertices (each pair adjacent with
/// probability 1/2) and lists for the `g_n` vertices of `G` (each target kept
/// with probability 3/4).
pub fn sample_list_instance(g_n: usize, h_n: usize, seed: u64) -> (Graph, ListAssignment) {
    assert!(h_n >= 1, "target graph needs a vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for x in 0..h_n {
        for y in x + 1..h_n {
            if rng.gen_bool(0.5) {
                edges.push((x, y));
            }
        }
    }
    let h = Graph::new(h_n, edges).expect("pairs are distinct");
    let lists = (0..g_n).map(|_| (0..h_n).filter(|_| rng.gen_range(0..4) != 0).collect()).collect();
    (h, ListAssignment::new(h_n, lists).expect("targets in range"))
}

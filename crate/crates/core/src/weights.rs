//! Weight systems: per-vertex spin weights and symmetric per-edge spin-pair
//! weights, their text format, the hard-core and Ising constructors, and the
//! restrictions onto complete bipartite graphs.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{BiregularCert, Graph, ParseError, ParseErrorKind, Side};
use crate::value::{format_rational, parse_rational, LogWeight, NonNegValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("vertex {0} is not in class O of the certificate")]
    NotInClassO(usize),
    #[error("{0}-{1} is not an edge")]
    NotAnEdge(usize, usize),
    #[error("unsupported: the edge-product bound needs every edge to carry the same weight table")]
    NonUniformEdgeWeights,
    #[error("weight system does not match the graph ({0})")]
    GraphMismatch(String),
    #[error("weights are not all rational")]
    NotRational,
    #[error("{0} weights given for {1} vertices")]
    WrongLength(usize, usize),
}

/// Spin weights on a fixed graph. Spins are `0..m` internally and `1..=m` in
/// files.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSystem {
    m: usize,
    n: usize,
    edges: Vec<(usize, usize)>,
    vertex: Vec<NonNegValue>,
    edge: Vec<NonNegValue>,
}

fn tri_len(m: usize) -> usize {
    m * (m + 1) / 2
}

fn tri_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * m - i + 1) / 2 + (j - i)
}

impl WeightSystem {
    /// Every weight set to `value`.
    pub fn constant(g: &Graph, m: usize, value: NonNegValue) -> Self {
        assert!(m >= 1, "need at least one spin");
        WeightSystem {
            m,
            n: g.n(),
            edges: g.edges().to_vec(),
            vertex: vec![value.clone(); g.n() * m],
            edge: vec![value; g.edge_count() * tri_len(m)],
        }
    }

    pub fn ones(g: &Graph, m: usize) -> Self {
        Self::constant(g, m, NonNegValue::one())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn matches(&self, g: &Graph) -> bool {
        self.n == g.n() && self.edges == g.edges()
    }

    pub(crate) fn check_graph(&self, g: &Graph) -> Result<(), WeightError> {
        if self.matches(g) {
            Ok(())
        } else {
            Err(WeightError::GraphMismatch(format!(
                "weights for {} vertices/{} edges, graph has {}/{}",
                self.n,
                self.edges.len(),
                g.n(),
                g.edge_count()
            )))
        }
    }

    pub fn vertex(&self, v: usize, i: usize) -> &NonNegValue {
        &self.vertex[v * self.m + i]
    }

    /// Weight of spin pair `(i, j)` across edge number `e`; symmetric in `i, j`.
    pub fn edge(&self, e: usize, i: usize, j: usize) -> &NonNegValue {
        &self.edge[e * tri_len(self.m) + tri_index(self.m, i, j)]
    }

    pub fn set_vertex(&mut self, v: usize, i: usize, value: NonNegValue) {
        self.vertex[v * self.m + i] = value;
    }

    pub fn set_edge(&mut self, e: usize, i: usize, j: usize, value: NonNegValue) {
        let k = e * tri_len(self.m) + tri_index(self.m, i, j);
        self.edge[k] = value;
    }

    /// Sets the same spin-pair table on every edge. `table[i][j]` is read for
    /// `i <= j` only.
    pub fn set_all_edges(&mut self, table: &[Vec<NonNegValue>]) {
        for e in 0..self.edges.len() {
            for i in 0..self.m {
                for j in i..self.m {
                    self.set_edge(e, i, j, table[i][j].clone());
                }
            }
        }
    }

    pub fn edge_table(&self, e: usize) -> &[NonNegValue] {
        let t = tri_len(self.m);
        &self.edge[e * t..(e + 1) * t]
    }

    pub fn is_exact(&self) -> bool {
        self.vertex.iter().chain(&self.edge).all(|x| matches!(x, NonNegValue::Exact(_)))
    }

    /// True when every edge carries the same spin-pair table.
    pub fn has_uniform_edges(&self) -> bool {
        (1..self.edges.len()).all(|e| self.edge_table(e) == self.edge_table(0))
    }

    pub fn all_values(&self) -> impl Iterator<Item = &NonNegValue> {
        self.vertex.iter().chain(&self.edge)
    }

    pub fn vertex_values(&self) -> &[NonNegValue] {
        &self.vertex
    }

    pub fn edge_values(&self) -> &[NonNegValue] {
        &self.edge
    }

    /// Multiplies every spin weight at `v` by `c`.
    pub fn scale_vertex(&mut self, v: usize, c: &NonNegValue) {
        for i in 0..self.m {
            let x = self.vertex(v, i).mul(c);
            self.set_vertex(v, i, x);
        }
    }

    /// Canonical text form; every entry is written explicitly.
    pub fn to_text(&self) -> String {
        let fmt = |x: &NonNegValue| match x {
            NonNegValue::Exact(q) => format_rational(q),
            NonNegValue::Log(w) => format!("log:{:?}", w.ln()),
        };
        let mut s = format!("m {}\n", self.m);
        for v in 0..self.n {
            for i in 0..self.m {
                s.push_str(&format!("vw {v} {} {}\n", i + 1, fmt(self.vertex(v, i))));
            }
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            for i in 0..self.m {
                for j in i..self.m {
                    s.push_str(&format!("ew {u} {v} {} {} {}\n", i + 1, j + 1, fmt(self.edge(e, i, j))));
                }
            }
        }
        s
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Integer-scaled copy for exact summation: each vertex row and each edge
    /// table is multiplied by the lcm of its denominators. Returns the table
    /// and the total scale `D`, with every product-sum over the true weights
    /// equal to the table's value divided by `D`.
    pub fn exact_table(&self) -> Result<(WeightTable<BigUint>, BigUint), WeightError> {
        let mut scale = BigUint::one();
        let mut scale_rows = |row: &[NonNegValue]| -> Result<Vec<BigUint>, WeightError> {
            let qs: Vec<&BigRational> =
                row.iter().map(|x| x.as_exact().ok_or(WeightError::NotRational)).collect::<Result<_, _>>()?;
            let d = qs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let out = qs
                .iter()
                .map(|q| (q.numer() * (&d / q.denom())).to_biguint().expect("non-negative weight"))
                .collect();
            scale *= d.to_biguint().expect("positive denominator");
            Ok(out)
        };
        let mut vertex = Vec::with_capacity(self.vertex.len());
        for v in 0..self.n {
            vertex.extend(scale_rows(&self.vertex[v * self.m..(v + 1) * self.m])?);
        }
        let mut edge = Vec::with_capacity(self.edges.len() * self.m * self.m);
        for e in 0..self.edges.len() {
            let tri = scale_rows(self.edge_table(e))?;
            for i in 0..self.m {
                for j in 0..self.m {
                    edge.push(tri[tri_index(self.m, i, j)].clone());
                }
            }
        }
        Ok((WeightTable { m: self.m, vertex, edge }, scale))
    }

    pub fn log_table(&self) -> WeightTable<LogWeight> {
        let vertex = self.vertex.iter().map(NonNegValue::to_log).collect();
        let mut edge = Vec::with_capacity(self.edges.len() * self.m * self.m);
        for e in 0..self.edges.len() {
            for i in 0..self.m {
                for j in 0..self.m {
                    edge.push(self.edge(e, i, j).to_log());
                }
            }
        }
        WeightTable { m: self.m, vertex, edge }
    }
}

/// Dense weight lookup in a concrete semiring. Edge tables are stored as full
/// `m x m` matrices indexed by edge number.
#[derive(Clone, Debug)]
pub struct WeightTable<S> {
    pub m: usize,
    pub vertex: Vec<S>,
    pub edge: Vec<S>,
}

impl<S> WeightTable<S> {
    #[inline]
    pub fn vertex(&self, v: usize, i: usize) -> &S {
        &self.vertex[v * self.m + i]
    }

    #[inline]
    pub fn edge(&self, e: usize, i: usize, j: usize) -> &S {
        &self.edge[(e * self.m + i) * self.m + j]
    }
}

fn parse_value(tok: &str, line: usize) -> Result<NonNegValue, ParseError> {
    if let Some(rest) = tok.strip_prefix("log:") {
        let ln: f64 = rest.parse().map_err(|_| ParseError::malformed(line, format!("bad log magnitude `{rest}`")))?;
        if ln.is_nan() || ln == f64::INFINITY {
            return Err(ParseError::malformed(line, format!("bad log magnitude `{rest}`")));
        }
        return Ok(NonNegValue::Log(LogWeight::from_ln(ln)));
    }
    parse_rational(tok)
        .map(NonNegValue::Exact)
        .ok_or_else(|| ParseError::malformed(line, format!("expected `p` or `p/q`, got `{tok}`")))
}

fn parse_index(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| ParseError::malformed(line, format!("expected a non-negative integer, got `{tok}`")))
}

/// Parses a weight file against its graph. Omitted entries default to 1.
///
/// Records: `m <spins>`, `vw <v> <i> <value>`, `ew <u> <v> <i> <j> <value>`
/// with `1 <= i <= j <= m`. Values are `p`, `p/q`, or `log:<ln>`.
pub fn parse_weights(text: &str, g: &Graph) -> Result<WeightSystem, ParseError> {
    let mut ws: Option<WeightSystem> = None;
    let mut seen_v = HashSet::new();
    let mut seen_e = HashSet::new();
    let mut last = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last = line;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match toks[0] {
            "m" => {
                if ws.is_some() {
                    return Err(ParseError::malformed(line, "repeated `m` header"));
                }
                if toks.len() != 2 {
                    return Err(ParseError::malformed(line, "header must be `m <spins>`"));
                }
                let m = parse_index(toks[1], line)?;
                if m == 0 {
                    return Err(ParseError::malformed(line, "spin count must be positive"));
                }
                ws = Some(WeightSystem::ones(g, m));
            }
            "vw" | "ew" => {
                let w = ws.as_mut().ok_or(ParseError::new(line, ParseErrorKind::MissingHeader))?;
                let m = w.m;
                let spin = |tok: &str| -> Result<usize, ParseError> {
                    let i = parse_index(tok, line)?;
                    if i == 0 || i > m {
                        return Err(ParseError::malformed(line, format!("spin {i} outside 1..={m}")));
                    }
                    Ok(i - 1)
                };
                let vertex = |tok: &str| -> Result<usize, ParseError> {
                    let v = parse_index(tok, line)?;
                    if v >= g.n() {
                        return Err(ParseError::new(line, ParseErrorKind::OutOfRange { v, n: g.n() }));
                    }
                    Ok(v)
                };
                if toks[0] == "vw" {
                    if toks.len() != 4 {
                        return Err(ParseError::malformed(line, "expected `vw <v> <i> <value>`"));
                    }
                    let (v, i) = (vertex(toks[1])?, spin(toks[2])?);
                    if !seen_v.insert((v, i)) {
                        return Err(ParseError::malformed(line, format!("duplicate weight for vertex {v} spin {}", i + 1)));
                    }
                    w.set_vertex(v, i, parse_value(toks[3], line)?);
                } else {
                    if toks.len() != 6 {
                        return Err(ParseError::malformed(line, "expected `ew <u> <v> <i> <j> <value>`"));
                    }
                    let (u, v) = (vertex(toks[1])?, vertex(toks[2])?);
                    let (i, j) = (spin(toks[3])?, spin(toks[4])?);
                    if i > j {
                        return Err(ParseError::malformed(line, "edge weights must use i <= j"));
                    }
                    let e = g
                        .edge_index(u, v)
                        .ok_or_else(|| ParseError::malformed(line, format!("{u}-{v} is not an edge")))?;
                    if !seen_e.insert((e, i, j)) {
                        return Err(ParseError::malformed(line, format!("duplicate weight for edge {u}-{v}")));
                    }
                    w.set_edge(e, i, j, parse_value(toks[5], line)?);
                }
            }
            other => return Err(ParseError::malformed(line, format!("unknown record `{other}`"))),
        }
    }
    ws.ok_or(ParseError::new(last, ParseErrorKind::MissingHeader))
}

/// Hard-core model: spin 1 is "occupied" with activity `lam[v]`, spin 2 has
/// weight 1, and two occupied neighbours have weight 0.
pub fn make_hardcore(g: &Graph, lam: &[NonNegValue]) -> Result<WeightSystem, WeightError> {
    if lam.len() != g.n() {
        return Err(WeightError::WrongLength(lam.len(), g.n()));
    }
    let mut w = WeightSystem::ones(g, 2);
    for (v, l) in lam.iter().enumerate() {
        w.set_vertex(v, 0, l.clone());
    }
    for e in 0..g.edge_count() {
        w.set_edge(e, 0, 0, NonNegValue::zero());
    }
    Ok(w)
}

pub fn make_hardcore_uniform(g: &Graph, lam: NonNegValue) -> WeightSystem {
    make_hardcore(g, &vec![lam; g.n()]).expect("length matches")
}

/// Ising model with spins `+1` (index 0) and `-1` (index 1):
/// `w(s) = exp(-beta * sum_uv s(u)s(v) + h * sum_v s(v))`. Log backend only.
pub fn make_ising(g: &Graph, beta: f64, h: f64) -> WeightSystem {
    assert!(beta.is_finite() && h.is_finite(), "beta and h must be finite");
    let mut w = WeightSystem::ones(g, 2);
    let lw = |x: f64| NonNegValue::Log(LogWeight::from_ln(x));
    for v in 0..g.n() {
        w.set_vertex(v, 0, lw(h));
        w.set_vertex(v, 1, lw(-h));
    }
    w.set_all_edges(&[vec![lw(-beta), lw(beta)], vec![lw(beta), lw(-beta)]]);
    w
}

/// A weighted `K_{a,b}`: vertices `0..b` are `w_1..w_b` (degree `a`) and
/// `b..b+a` are `z_1..z_a` (degree `b`).
#[derive(Clone, Debug, PartialEq)]
pub struct KabInstance {
    pub a: usize,
    pub b: usize,
    pub graph: Graph,
    pub weights: WeightSystem,
}

impl KabInstance {
    pub fn w(&self, k: usize) -> usize {
        assert!(k < self.b);
        k
    }

    pub fn z(&self, l: usize) -> usize {
        assert!(l < self.a);
        self.b + l
    }

    pub fn w_side(&self) -> Vec<usize> {
        (0..self.b).collect()
    }

    pub fn z_side(&self) -> Vec<usize> {
        (self.b..self.a + self.b).collect()
    }

    /// Uses `ws` as the weights of a bare `K_{a,b}` in the layout above.
    pub fn from_weights(a: usize, b: usize, ws: WeightSystem) -> Self {
        let graph = kab_graph(a, b);
        assert!(ws.matches(&graph), "weights must live on K_{{a,b}}");
        KabInstance { a, b, graph, weights: ws }
    }
}

pub fn kab_graph(a: usize, b: usize) -> Graph {
    Graph::complete_bipartite(b, a)
}

/// Builds `W^v` on `K_{a,b}` around `v` in class O: every `z_l` copies the
/// weights of `v`, `w_k` copies those of `n_k(v)`, and edge `w_k z_l` copies
/// the table of edge `n_k(v) v`.
pub fn restrict_to_kab(
    g: &Graph,
    w: &WeightSystem,
    cert: &BiregularCert,
    v: usize,
) -> Result<KabInstance, WeightError> {
    w.check_graph(g)?;
    if cert.classes().side(v) != Side::O {
        return Err(WeightError::NotInClassO(v));
    }
    let (a, b, m) = (cert.a, cert.b, w.m);
    let graph = kab_graph(a, b);
    let mut out = WeightSystem::ones(&graph, m);
    let nbrs = cert.neighbor_order(v);
    debug_assert_eq!(nbrs.len(), b);
    for (k, &x) in nbrs.iter().enumerate() {
        for i in 0..m {
            out.set_vertex(k, i, w.vertex(x, i).clone());
        }
    }
    for l in 0..a {
        for i in 0..m {
            out.set_vertex(b + l, i, w.vertex(v, i).clone());
        }
    }
    for (k, &x) in nbrs.iter().enumerate() {
        let src = g.edge_index(x, v).expect("neighbour edge");
        for l in 0..a {
            let dst = graph.edge_index(k, b + l).expect("complete bipartite edge");
            for i in 0..m {
                for j in i..m {
                    out.set_edge(dst, i, j, w.edge(src, i, j).clone());
                }
            }
        }
    }
    Ok(KabInstance { a, b, graph, weights: out })
}

/// Builds `W^{uv}` on `K_{d(u),d(v)}`: `w_j` copies `n_j(v)`, `z_j` copies
/// `n_j(u)`, and every edge carries the common edge table. Requires uniform
/// edge weights.
pub fn restrict_to_edge(g: &Graph, w: &WeightSystem, u: usize, v: usize) -> Result<KabInstance, WeightError> {
    w.check_graph(g)?;
    let e = g.edge_index(u, v).ok_or(WeightError::NotAnEdge(u, v))?;
    if !w.has_uniform_edges() {
        return Err(WeightError::NonUniformEdgeWeights);
    }
    let (a, b, m) = (g.degree(u), g.degree(v), w.m);
    let graph = kab_graph(a, b);
    let mut out = WeightSystem::ones(&graph, m);
    for (j, &x) in g.neighbors(v).iter().enumerate() {
        for i in 0..m {
            out.set_vertex(j, i, w.vertex(x, i).clone());
        }
    }
    for (j, &x) in g.neighbors(u).iter().enumerate() {
        for i in 0..m {
            out.set_vertex(b + j, i, w.vertex(x, i).clone());
        }
    }
    let table: Vec<Vec<NonNegValue>> = (0..m).map(|i| (0..m).map(|j| w.edge(e, i, j).clone()).collect()).collect();
    out.set_all_edges(&table);
    Ok(KabInstance { a, b, graph, weights: out })
}

/// Divides every edge weight by the global maximum so all lie in `(0, 1]`.
/// Returns the scaled system and the factor; `Z` of the original equals `Z`
/// of the scaled system times `factor^|E|`.
pub fn normalize_edge_weights(w: &WeightSystem) -> Result<(WeightSystem, BigRational), WeightError> {
    let mut max = BigRational::zero();
    for x in &w.edge {
        let q = x.as_exact().ok_or(WeightError::NotRational)?;
        if *q > max {
            max = q.clone();
        }
    }
    if max.is_zero() || max.is_negative() {
        return Ok((w.clone(), BigRational::one()));
    }
    let mut out = w.clone();
    for x in &mut out.edge {
        let q = x.as_exact().expect("checked").clone();
        *x = NonNegValue::Exact(q / &max);
    }
    Ok((out, max))
}

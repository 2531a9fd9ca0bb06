//! Simple undirected graphs, the line-oriented graph file format, bipartition
//! and biregularity certificates.

use std::collections::VecDeque;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {v} out of range for {n} vertices")]
    OutOfRange { v: usize, n: usize },
    #[error("graph has no vertices")]
    NoVertices,
    #[error("graph has no edges")]
    NoEdges,
    #[error("not bipartite: odd closed walk {walk:?}")]
    NotBipartite { walk: Vec<usize> },
    #[error("not biregular: vertex {u} has degree {du} but vertex {v} has degree {dv}")]
    NotBiregular { u: usize, du: usize, v: usize, dv: usize },
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("not regular: vertex {u} has degree {du} but vertex {v} has degree {dv}")]
    NotRegular { u: usize, du: usize, v: usize, dv: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("missing `p <n> <m>` header")]
    MissingHeader,
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {v} out of range for {n} vertices")]
    OutOfRange { v: usize, n: usize },
    #[error("header declares {declared} edges but {found} were given")]
    EdgeCount { declared: usize, found: usize },
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }

    pub(crate) fn malformed(line: usize, msg: impl Into<String>) -> Self {
        ParseError::new(line, ParseErrorKind::Malformed(msg.into()))
    }
}

/// A simple undirected graph on vertices `0..n`.
///
/// Edges are stored as `(u, v)` with `u < v`, sorted lexicographically, so
/// edge indices are stable and canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::OutOfRange { v: x, n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph { n, edges: list, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// Position of edge `{u, v}` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &y in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Returns `d` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Result<usize, GraphError> {
        let d = self.degree(0);
        match (0..self.n).find(|&v| self.degree(v) != d) {
            None => Ok(d),
            Some(v) => Err(GraphError::NotRegular { u: 0, du: d, v, dv: self.degree(v) }),
        }
    }

    /// Graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v]))).expect("a permutation preserves validity")
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        Graph::new(
            self.n + other.n,
            self.edges.iter().copied().chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift))),
        )
        .expect("union of valid graphs")
    }

    /// `K_{p,q}` with vertices `0..p` on one side and `p..p+q` on the other.
    pub fn complete_bipartite(p: usize, q: usize) -> Graph {
        let edges = (0..p).flat_map(|i| (0..q).map(move |j| (i, p + j)));
        Graph::new(p + q, edges).expect("complete bipartite graph")
    }

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::new(n, edges).expect("complete graph")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle")
    }

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path")
    }

    /// The `d`-dimensional hypercube `Q_d`.
    pub fn hypercube(d: u32) -> Graph {
        let n = 1usize << d;
        let edges = (0..n).flat_map(|x| (0..d).map(move |b| (x, x ^ (1 << b)))).filter(|(x, y)| x < y);
        Graph::new(n, edges).expect("hypercube")
    }

    /// Canonical text form: header then edges sorted lexicographically.
    pub fn to_text(&self) -> String {
        let mut s = format!("p {} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("e {u} {v}\n"));
        }
        s
    }

    /// Hex SHA-256 of [`Graph::to_text`].
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| ParseError::malformed(line, format!("expected a non-negative integer, got `{tok}`")))
}

/// Parses the graph file format: `p <n> <m>` then `m` lines `e <u> <v>`.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match (toks[0], header) {
            ("p", None) => {
                if toks.len() != 3 {
                    return Err(ParseError::malformed(line, "header must be `p <n> <m>`"));
                }
                let n = parse_usize(toks[1], line)?;
                let m = parse_usize(toks[2], line)?;
                if n == 0 {
                    return Err(ParseError::malformed(line, "vertex count must be positive"));
                }
                header = Some((n, m));
            }
            ("p", Some(_)) => return Err(ParseError::malformed(line, "repeated header")),
            ("e", None) => return Err(ParseError::new(line, ParseErrorKind::MissingHeader)),
            ("e", Some((n, _))) => {
                if toks.len() != 3 {
                    return Err(ParseError::malformed(line, "edge must be `e <u> <v>`"));
                }
                let u = parse_usize(toks[1], line)?;
                let v = parse_usize(toks[2], line)?;
                for x in [u, v] {
                    if x >= n {
                        return Err(ParseError::new(line, ParseErrorKind::OutOfRange { v: x, n }));
                    }
                }
                if u == v {
                    return Err(ParseError::new(line, ParseErrorKind::Loop(u)));
                }
                let key = (u.min(v), u.max(v));
                if !seen.insert(key) {
                    return Err(ParseError::new(line, ParseErrorKind::DuplicateEdge(key.0, key.1)));
                }
                edges.push(key);
            }
            (other, _) => return Err(ParseError::malformed(line, format!("unknown record `{other}`"))),
        }
    }
    let (n, m) = header.ok_or(ParseError::new(last_line.max(1), ParseErrorKind::MissingHeader))?;
    if edges.len() != m {
        return Err(ParseError::new(last_line, ParseErrorKind::EdgeCount { declared: m, found: edges.len() }));
    }
    Ok(Graph::new(n, edges).expect("validated while parsing"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    E,
    O,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::E => Side::O,
            Side::O => Side::E,
        }
    }
}

/// A two-colouring of the vertices with every edge crossing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    side: Vec<Side>,
}

impl Bipartition {
    /// Wraps an explicit side assignment after checking every edge crosses.
    pub fn from_sides(g: &Graph, side: Vec<Side>) -> Result<Self, GraphError> {
        assert_eq!(side.len(), g.n());
        if let Some(&(u, v)) = g.edges().iter().find(|&&(u, v)| side[u] == side[v]) {
            return Err(GraphError::NotBipartite { walk: vec![u, v] });
        }
        Ok(Bipartition { side })
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn sides(&self) -> &[Side] {
        &self.side
    }

    pub fn class(&self, s: Side) -> Vec<usize> {
        (0..self.side.len()).filter(|&v| self.side[v] == s).collect()
    }

    pub fn class_e(&self) -> Vec<usize> {
        self.class(Side::E)
    }

    pub fn class_o(&self) -> Vec<usize> {
        self.class(Side::O)
    }

    pub fn swapped(&self) -> Bipartition {
        Bipartition { side: self.side.iter().map(|s| s.flip()).collect() }
    }
}

/// Breadth-first two-colouring. In each component the lowest-id vertex goes to
/// class E.
pub fn bipartition(g: &Graph) -> Result<Bipartition, GraphError> {
    let n = g.n();
    let mut side: Vec<Option<Side>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    for root in 0..n {
        if side[root].is_some() {
            continue;
        }
        side[root] = Some(Side::E);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let sx = side[x].unwrap();
            for &y in g.neighbors(x) {
                match side[y] {
                    None => {
                        side[y] = Some(sx.flip());
                        parent[y] = x;
                        depth[y] = depth[x] + 1;
                        queue.push_back(y);
                    }
                    Some(sy) if sy == sx => {
                        return Err(GraphError::NotBipartite { walk: odd_cycle(x, y, &parent, &depth) });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(Bipartition { side: side.into_iter().map(Option::unwrap).collect() })
}

/// Cycle through the BFS tree closed by the monochromatic edge `x`-`y`.
fn odd_cycle(x: usize, y: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (x, y);
    let mut left = vec![a];
    let mut right = vec![b];
    while depth[a] > depth[b] {
        a = parent[a];
        left.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b];
        right.push(b);
    }
    while a != b {
        a = parent[a];
        b = parent[b];
        left.push(a);
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

/// Certificate that a graph is `(a, b)`-biregular: class E has degree `a`,
/// class O has degree `b`.
///
/// When `a != b` the larger degree is `a`. When `a == b` the roles are
/// ambiguous and [`BiregularCert::orientations`] yields both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiregularCert {
    pub a: usize,
    pub b: usize,
    classes: Bipartition,
    neighbor_order: Vec<Vec<usize>>,
}

impl BiregularCert {
    pub fn classes(&self) -> &Bipartition {
        &self.classes
    }

    pub fn class_e(&self) -> Vec<usize> {
        self.classes.class_e()
    }

    pub fn class_o(&self) -> Vec<usize> {
        self.classes.class_o()
    }

    /// `(n_1(v), ..., n_deg(v)(v))`.
    pub fn neighbor_order(&self, v: usize) -> &[usize] {
        &self.neighbor_order[v]
    }

    pub fn with_neighbor_order(mut self, v: usize, order: Vec<usize>) -> Self {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        let mut current = self.neighbor_order[v].clone();
        current.sort_unstable();
        assert_eq!(sorted, current, "neighbor order must permute the adjacency of {v}");
        self.neighbor_order[v] = order;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.a == self.b
    }

    /// This certificate, plus the role-swapped one when `a == b`.
    pub fn orientations(&self) -> Vec<BiregularCert> {
        let mut out = vec![self.clone()];
        if self.is_symmetric() {
            out.push(BiregularCert {
                a: self.b,
                b: self.a,
                classes: self.classes.swapped(),
                neighbor_order: self.neighbor_order.clone(),
            });
        }
        out
    }
}

pub fn certify_biregular(g: &Graph, bp: &Bipartition) -> Result<BiregularCert, GraphError> {
    if g.edge_count() == 0 {
        return Err(GraphError::NoEdges);
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(GraphError::IsolatedVertex(v));
    }
    let mut sides = bp.sides().to_vec();
    let mut pair: Option<(usize, usize)> = None;
    let mut witness: Option<usize> = None;
    let mut flips = Vec::new();
    for comp in g.components() {
        // Degrees of the two classes within this component.
        let mut degs: [Option<(usize, usize)>; 2] = [None, None];
        for &v in &comp {
            let k = (sides[v] == Side::O) as usize;
            match degs[k] {
                None => degs[k] = Some((v, g.degree(v))),
                Some((u, du)) if du != g.degree(v) => {
                    return Err(GraphError::NotBiregular { u, du, v, dv: g.degree(v) });
                }
                _ => {}
            }
        }
        let (ve, de) = degs[0].expect("every component has an edge");
        let (vo, dobar) = degs[1].expect("every component has an edge");
        let hi = de.max(dobar);
        let lo = de.min(dobar);
        match pair {
            None => {
                pair = Some((hi, lo));
                witness = Some(if de >= dobar { ve } else { vo });
            }
            Some((a, b)) if (a, b) != (hi, lo) => {
                let w = witness.unwrap();
                let v = if de >= dobar { ve } else { vo };
                return Err(GraphError::NotBiregular { u: w, du: a, v, dv: hi });
            }
            _ => {}
        }
        if de < dobar {
            flips.extend(comp.iter().copied());
        }
    }
    for v in flips {
        sides[v] = sides[v].flip();
    }
    let (a, b) = pair.expect("at least one component");
    Ok(BiregularCert {
        a,
        b,
        classes: Bipartition { side: sides },
        neighbor_order: (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect(),
    })
}

/// [`bipartition`] followed by [`certify_biregular`].
pub fn certify(g: &Graph) -> Result<BiregularCert, GraphError> {
    certify_biregular(g, &bipartition(g)?)
}

//! List assignments for list homomorphisms and the covering-family pairs used
//! by the extension-count bound, with their text formats.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Bipartition, BiregularCert, Graph, ParseError, ParseErrorKind, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ListError {
    #[error("{given} lists given for {n} vertices")]
    WrongLength { given: usize, n: usize },
    #[error("list of vertex {v} contains {target}, outside the {h_n} target vertices")]
    TargetOutOfRange { v: usize, target: usize, h_n: usize },
}

/// `L(v)` for every vertex of `G`, each a sorted set of target vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ListAssignment {
    h_n: usize,
    lists: Vec<Vec<usize>>,
}

impl ListAssignment {
    /// `L(v) = V(H)` for all `v`.
    pub fn full(g_n: usize, h_n: usize) -> Self {
        ListAssignment { h_n, lists: vec![(0..h_n).collect(); g_n] }
    }

    pub fn new(h_n: usize, lists: Vec<Vec<usize>>) -> Result<Self, ListError> {
        let mut out = Vec::with_capacity(lists.len());
        for (v, l) in lists.into_iter().enumerate() {
            let set: BTreeSet<usize> = l.into_iter().collect();
            if let Some(&t) = set.iter().find(|&&t| t >= h_n) {
                return Err(ListError::TargetOutOfRange { v, target: t, h_n });
            }
            out.push(set.into_iter().collect());
        }
        Ok(ListAssignment { h_n, lists: out })
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn target_count(&self) -> usize {
        self.h_n
    }

    pub fn get(&self, v: usize) -> &[usize] {
        &self.lists[v]
    }

    pub fn contains(&self, v: usize, t: usize) -> bool {
        self.lists[v].binary_search(&t).is_ok()
    }

    pub fn set(&mut self, v: usize, list: Vec<usize>) -> Result<(), ListError> {
        let set: BTreeSet<usize> = list.into_iter().collect();
        if let Some(&t) = set.iter().find(|&&t| t >= self.h_n) {
            return Err(ListError::TargetOutOfRange { v, target: t, h_n: self.h_n });
        }
        self.lists[v] = set.into_iter().collect();
        Ok(())
    }

    pub(crate) fn check(&self, g: &Graph, h: &Graph) -> Result<(), ListError> {
        if self.lists.len() != g.n() {
            return Err(ListError::WrongLength { given: self.lists.len(), n: g.n() });
        }
        if self.h_n != h.n() {
            // Lists were built for a different target; re-validate entries.
            for (v, l) in self.lists.iter().enumerate() {
                if let Some(&t) = l.iter().find(|&&t| t >= h.n()) {
                    return Err(ListError::TargetOutOfRange { v, target: t, h_n: h.n() });
                }
            }
        }
        Ok(())
    }

    /// Product of list sizes, the size of the unconstrained search space.
    pub fn search_space(&self) -> f64 {
        self.lists.iter().map(|l| l.len() as f64).product()
    }

    /// Canonical text: one `l <v> <targets...>` record per vertex.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (v, l) in self.lists.iter().enumerate() {
            s.push_str(&format!("l {v}"));
            for t in l {
                s.push_str(&format!(" {t}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

fn parse_id(tok: &str, line: usize, bound: usize) -> Result<usize, ParseError> {
    let v: usize =
        tok.parse().map_err(|_| ParseError::malformed(line, format!("expected a non-negative integer, got `{tok}`")))?;
    if v >= bound {
        return Err(ParseError::new(line, ParseErrorKind::OutOfRange { v, n: bound }));
    }
    Ok(v)
}

/// Parses `l <v> <t1> <t2> ...` records. Vertices without a record get the
/// full list `V(H)`; `l <v>` with no targets is an empty list.
pub fn parse_lists(text: &str, g_n: usize, h_n: usize) -> Result<ListAssignment, ParseError> {
    let mut out = ListAssignment::full(g_n, h_n);
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks[0] != "l" || toks.len() < 2 {
            return Err(ParseError::malformed(line, "expected `l <v> <targets...>`"));
        }
        let v = parse_id(toks[1], line, g_n)?;
        if !seen.insert(v) {
            return Err(ParseError::malformed(line, format!("duplicate list for vertex {v}")));
        }
        let targets = toks[2..].iter().map(|x| parse_id(x, line, h_n)).collect::<Result<Vec<_>, _>>()?;
        out.set(v, targets).expect("targets validated");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("cover multiplicities must be at least 1")]
    ZeroMultiplicity,
    #[error("family member {index} puts vertex {v} on the wrong side")]
    WrongSide { index: usize, v: usize },
    #[error("vertex {v} is covered {count} times, needs at least {needed}")]
    Shortfall { v: usize, count: usize, needed: usize },
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
}

/// Families `A_i` (in class E) and `B_i` (in class O) with cover
/// multiplicities `t1`, `t2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverFamilyPair {
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
    pub t1: usize,
    pub t2: usize,
}

impl CoverFamilyPair {
    /// `A = {N(v)}`, `B = {{v}}` over `v` in class O, so `t1 = a`, `t2 = 1`.
    pub fn neighborhoods(g: &Graph, cert: &BiregularCert) -> Self {
        let pairs = cert.class_o().into_iter().map(|v| (g.neighbors(v).to_vec(), vec![v])).collect();
        CoverFamilyPair { pairs, t1: cert.a, t2: 1 }
    }

    /// Checks side membership and that every vertex of E (resp. O) lies in at
    /// least `t1` of the `A_i` (resp. `t2` of the `B_i`).
    pub fn validate(&self, classes: &Bipartition) -> Result<(), CoverError> {
        if self.t1 == 0 || self.t2 == 0 {
            return Err(CoverError::ZeroMultiplicity);
        }
        let n = classes.sides().len();
        let mut count_a = vec![0usize; n];
        let mut count_b = vec![0usize; n];
        for (index, (a, b)) in self.pairs.iter().enumerate() {
            for (set, side, counts) in [(a, Side::E, &mut count_a), (b, Side::O, &mut count_b)] {
                for &v in set {
                    if v >= n {
                        return Err(CoverError::OutOfRange(v));
                    }
                    if classes.side(v) != side {
                        return Err(CoverError::WrongSide { index, v });
                    }
                    counts[v] += 1;
                }
            }
        }
        for v in 0..n {
            let (count, needed) = match classes.side(v) {
                Side::E => (count_a[v], self.t1),
                Side::O => (count_b[v], self.t2),
            };
            if count < needed {
                return Err(CoverError::Shortfall { v, count, needed });
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let join = |xs: &[usize]| xs.iter().map(|x| format!(" {x}")).collect::<String>();
        let mut s = format!("t {} {}\n", self.t1, self.t2);
        for (a, b) in &self.pairs {
            s.push_str(&format!("f{} |{}\n", join(a), join(b)));
        }
        s
    }
}

/// Parses `t <t1> <t2>` followed by `f <A vertices> | <B vertices>` records.
pub fn parse_families(text: &str, g_n: usize) -> Result<CoverFamilyPair, ParseError> {
    let mut t: Option<(usize, usize)> = None;
    let mut pairs = Vec::new();
    let mut last = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last = line;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(rest) = s.strip_prefix("t ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 2 || t.is_some() {
                return Err(ParseError::malformed(line, "expected a single `t <t1> <t2>`"));
            }
            let t1 = toks[0].parse().map_err(|_| ParseError::malformed(line, "bad t1"))?;
            let t2 = toks[1].parse().map_err(|_| ParseError::malformed(line, "bad t2"))?;
            t = Some((t1, t2));
        } else if let Some(rest) = s.strip_prefix('f') {
            let (a, b) = rest
                .split_once('|')
                .ok_or_else(|| ParseError::malformed(line, "expected `f <A...> | <B...>`"))?;
            let ids = |part: &str| -> Result<Vec<usize>, ParseError> {
                part.split_whitespace().map(|x| parse_id(x, line, g_n)).collect()
            };
            pairs.push((ids(a)?, ids(b)?));
        } else {
            return Err(ParseError::malformed(line, "expected `t` or `f` record"));
        }
    }
    let (t1, t2) = t.ok_or(ParseError::new(last, ParseErrorKind::MissingHeader))?;
    Ok(CoverFamilyPair { pairs, t1, t2 })
}

/// Classes implied by a family: E is the union of the `A_i`, O the rest.
pub fn classes_from_families(g: &Graph, fam: &CoverFamilyPair) -> Result<Bipartition, crate::graph::GraphError> {
    let mut side = vec![Side::O; g.n()];
    for (a, _) in &fam.pairs {
        for &v in a {
            side[v] = Side::E;
        }
    }
    Bipartition::from_sides(g, side)
}

/// `L^v` on `K_{a,b}` around `v` in class O, in the vertex layout of
/// [`crate::weights::KabInstance`]: each `z_l` gets `L(v)` and `w_k` gets
/// `L(n_k(v))`.
pub fn restrict_lists_to_kab(lists: &ListAssignment, cert: &BiregularCert, v: usize) -> ListAssignment {
    let mut out: Vec<Vec<usize>> = cert.neighbor_order(v).iter().map(|&x| lists.get(x).to_vec()).collect();
    out.extend((0..cert.a).map(|_| lists.get(v).to_vec()));
    ListAssignment { h_n: lists.h_n, lists: out }
}

/// `L^{uv}` on `K_{d(u),d(v)}`: `w_j` gets `L(n_j(v))` and `z_j` gets `L(n_j(u))`.
pub fn restrict_lists_to_edge(g: &Graph, lists: &ListAssignment, u: usize, v: usize) -> ListAssignment {
    let out = g.neighbors(v).iter().chain(g.neighbors(u)).map(|&x| lists.get(x).to_vec()).collect();
    ListAssignment { h_n: lists.h_n, lists: out }
}

//! Exact evaluation of configuration weights, partition functions, list
//! homomorphism counts and extension counts.

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{bipartition, Graph, GraphError};
use crate::lists::{ListAssignment, ListError};
use crate::value::{rational_from_biguint, Backend, LogWeight, NonNegValue, Semiring};
use crate::weights::{KabInstance, WeightError, WeightSystem, WeightTable};

/// Default cap on the number of configurations a single enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountError {
    #[error("enumeration of {size:.3e} configurations exceeds budget {budget}; use the LOG backend or a smaller instance")]
    Budget { size: f64, budget: u64 },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lists(#[from] ListError),
    #[error("invalid spin configuration: {0}")]
    Spins(String),
    #[error("invalid partial map: {0}")]
    PartialMap(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Exact,
    Log,
    #[default]
    Auto,
}

impl std::fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendChoice::Exact => "exact",
            BackendChoice::Log => "log",
            BackendChoice::Auto => "auto",
        })
    }
}

impl std::str::FromStr for BackendChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(BackendChoice::Exact),
            "log" => Ok(BackendChoice::Log),
            "auto" => Ok(BackendChoice::Auto),
            _ => Err(format!("unknown backend `{s}` (expected exact, log or auto)")),
        }
    }
}

/// Backend selection and enumeration limits.
///
/// `Auto` picks EXACT when every weight is rational and the enumeration fits
/// `exact_budget`, LOG otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub backend: BackendChoice,
    pub budget: u64,
    pub exact_budget: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions::with_budget(DEFAULT_BUDGET)
    }
}

impl EvalOptions {
    pub fn with_budget(budget: u64) -> Self {
        EvalOptions { backend: BackendChoice::Auto, budget, exact_budget: (budget / 100).max(1) }
    }

    pub fn exact() -> Self {
        EvalOptions { backend: BackendChoice::Exact, ..Default::default() }
    }

    pub fn log() -> Self {
        EvalOptions { backend: BackendChoice::Log, ..Default::default() }
    }

    pub fn backend(mut self, b: BackendChoice) -> Self {
        self.backend = b;
        self
    }

    pub(crate) fn check_budget(&self, size: f64) -> Result<(), CountError> {
        if size > self.budget as f64 {
            Err(CountError::Budget { size, budget: self.budget })
        } else {
            Ok(())
        }
    }

    /// Backend for an enumeration of `size` configurations over `w`.
    pub fn resolve(&self, w: &WeightSystem, size: f64) -> Result<Backend, CountError> {
        self.check_budget(size)?;
        match self.backend {
            BackendChoice::Exact => {
                if w.is_exact() {
                    Ok(Backend::Exact)
                } else {
                    Err(WeightError::NotRational.into())
                }
            }
            BackendChoice::Log => Ok(Backend::Log),
            BackendChoice::Auto => {
                if w.is_exact() && size <= self.exact_budget as f64 {
                    Ok(Backend::Exact)
                } else {
                    Ok(Backend::Log)
                }
            }
        }
    }
}

/// A total map `V(G) -> {0..m}` (spins are 0-based here, 1-based in files).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig(pub Vec<usize>);

impl SpinConfig {
    pub fn new(spins: Vec<usize>, n: usize, m: usize) -> Result<Self, CountError> {
        if spins.len() != n {
            return Err(CountError::Spins(format!("{} spins for {n} vertices", spins.len())));
        }
        if let Some(v) = spins.iter().position(|&s| s >= m) {
            return Err(CountError::Spins(format!("vertex {v} has spin {} outside 1..={m}", spins[v] + 1)));
        }
        Ok(SpinConfig(spins))
    }

    /// Parses a comma- or space-separated list of 1-based spins.
    pub fn parse_one_based(s: &str, n: usize, m: usize) -> Result<Self, CountError> {
        let spins = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<usize>() {
                Ok(x) if x >= 1 => Ok(x - 1),
                _ => Err(CountError::Spins(format!("bad spin `{t}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        SpinConfig::new(spins, n, m)
    }

    pub fn spins(&self) -> &[usize] {
        &self.0
    }
}

/// `w^W(f)`: product of vertex weights and edge weights of `f`.
pub fn weight_of(g: &Graph, w: &WeightSystem, f: &SpinConfig, backend: Backend) -> Result<NonNegValue, CountError> {
    w.check_graph(g)?;
    let f = SpinConfig::new(f.0.clone(), g.n(), w.m())?;
    let factors = (0..g.n())
        .map(|v| w.vertex(v, f.0[v]))
        .chain(g.edges().iter().enumerate().map(|(e, &(u, v))| w.edge(e, f.0[u], f.0[v])));
    match backend {
        Backend::Exact => {
            let mut p = BigRational::from_integer(1.into());
            for x in factors {
                p *= x.as_exact().ok_or(WeightError::NotRational)?;
            }
            Ok(NonNegValue::Exact(p))
        }
        Backend::Log => Ok(NonNegValue::Log(factors.fold(LogWeight::ONE, |acc, x| acc.mul(x.to_log())))),
    }
}

/// Number of leading positions fixed per parallel task. The split depends
/// only on `(len, m)`, never on the thread count, so results are reproducible.
fn split_len(len: usize, m: usize) -> usize {
    let mut k = 0;
    let mut tasks = 1usize;
    while k < len && tasks < 64 {
        tasks = tasks.saturating_mul(m);
        k += 1;
        if m == 1 {
            return len;
        }
    }
    k
}

/// Sums `f` over every assignment `{0..m}^len` in lexicographic order
/// (position 0 most significant). Partial sums combine in task order.
pub(crate) fn lex_sum<S, F>(len: usize, m: usize, f: F) -> S
where
    S: Semiring,
    F: Fn(&[usize]) -> S + Sync,
{
    let split = split_len(len, m);
    let tasks = m.pow(split as u32);
    let partials: Vec<S::Acc> = (0..tasks)
        .into_par_iter()
        .map(|t| {
            let mut spins = vec![0usize; len];
            let mut x = t;
            for i in (0..split).rev() {
                spins[i] = x % m;
                x /= m;
            }
            let mut acc = S::acc_new();
            loop {
                S::acc_push(&mut acc, &f(&spins));
                let mut i = len;
                loop {
                    if i == split {
                        return acc;
                    }
                    i -= 1;
                    spins[i] += 1;
                    if spins[i] < m {
                        break;
                    }
                    spins[i] = 0;
                }
            }
        })
        .collect();
    let mut total = S::acc_new();
    for p in partials {
        S::acc_merge(&mut total, p);
    }
    S::acc_finish(total)
}

/// A summation strategy that can run over any semiring.
trait Kernel {
    fn run<S: Semiring>(&self, table: &WeightTable<S>) -> S;
}

struct Brute<'a> {
    g: &'a Graph,
}

impl Kernel for Brute<'_> {
    fn run<S: Semiring>(&self, t: &WeightTable<S>) -> S {
        let g = self.g;
        lex_sum(g.n(), t.m, |s| {
            let mut p = S::s_one();
            for (v, &sv) in s.iter().enumerate() {
                p.s_mul_assign(t.vertex(v, sv));
                if p.s_is_zero() {
                    return p;
                }
            }
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                p.s_mul_assign(t.edge(e, s[u], s[v]));
                if p.s_is_zero() {
                    return p;
                }
            }
            p
        })
    }
}

/// Enumerates spins on `outer` and sums each vertex of the independent set
/// `inner` out in closed form.
struct OneSided<'a> {
    g: &'a Graph,
    outer: Vec<usize>,
    inner: Vec<usize>,
}

impl<'a> OneSided<'a> {
    fn new(g: &'a Graph, outer: Vec<usize>, inner: Vec<usize>) -> Self {
        debug_assert!(inner.iter().all(|&x| g.neighbors(x).iter().all(|y| !inner.contains(y))));
        OneSided { g, outer, inner }
    }
}

impl Kernel for OneSided<'_> {
    fn run<S: Semiring>(&self, t: &WeightTable<S>) -> S {
        let g = self.g;
        let mut pos = vec![usize::MAX; g.n()];
        for (k, &v) in self.outer.iter().enumerate() {
            pos[v] = k;
        }
        let inner_nbrs: Vec<Vec<(usize, usize)>> = self
            .inner
            .iter()
            .map(|&x| g.neighbors(x).iter().map(|&y| (pos[y], g.edge_index(x, y).unwrap())).collect())
            .collect();
        let outer_edges: Vec<(usize, usize, usize)> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, (u, v))| pos[*u] != usize::MAX && pos[*v] != usize::MAX)
            .map(|(e, &(u, v))| (e, pos[u], pos[v]))
            .collect();
        lex_sum(self.outer.len(), t.m, |s| {
            let mut p = S::s_one();
            for (k, &v) in self.outer.iter().enumerate() {
                p.s_mul_assign(t.vertex(v, s[k]));
                if p.s_is_zero() {
                    return p;
                }
            }
            for &(e, a, b) in &outer_edges {
                p.s_mul_assign(t.edge(e, s[a], s[b]));
                if p.s_is_zero() {
                    return p;
                }
            }
            for (x, nbrs) in self.inner.iter().zip(&inner_nbrs) {
                let mut acc = S::acc_new();
                for j in 0..t.m {
                    let mut term = t.vertex(*x, j).clone();
                    for &(k, e) in nbrs {
                        if term.s_is_zero() {
                            break;
                        }
                        term.s_mul_assign(t.edge(e, s[k], j));
                    }
                    S::acc_push(&mut acc, &term);
                }
                p.s_mul_assign(&S::acc_finish(acc));
                if p.s_is_zero() {
                    return p;
                }
            }
            p
        })
    }
}

fn evaluate(w: &WeightSystem, backend: Backend, kernel: &impl Kernel) -> Result<NonNegValue, CountError> {
    match backend {
        Backend::Exact => {
            let (table, scale) = w.exact_table()?;
            let z: BigUint = kernel.run(&table);
            Ok(NonNegValue::Exact(rational_from_biguint(z) / rational_from_biguint(scale)))
        }
        Backend::Log => Ok(NonNegValue::Log(kernel.run(&w.log_table()))),
    }
}

fn enumeration_size(m: usize, len: usize) -> f64 {
    (m as f64).powi(len as i32)
}

/// Number of configurations [`partition_function`] visits on `g` with `m` spins.
pub fn partition_cost(g: &Graph, m: usize) -> f64 {
    match bipartition(g) {
        Ok(bp) => enumeration_size(m, bp.class_e().len().min(bp.class_o().len())),
        Err(_) => enumeration_size(m, g.n()),
    }
}

/// Number of configurations [`partition_kab`] visits.
pub fn kab_cost(a: usize, b: usize, m: usize) -> f64 {
    enumeration_size(m, a.min(b))
}

/// `Z^W(G)` by summing `w^W(f)` over all `m^n` configurations.
pub fn partition_brute(g: &Graph, w: &WeightSystem, opts: &EvalOptions) -> Result<NonNegValue, CountError> {
    w.check_graph(g)?;
    let backend = opts.resolve(w, enumeration_size(w.m(), g.n()))?;
    evaluate(w, backend, &Brute { g })
}

/// `Z^W(G)` choosing the cheapest exact strategy: for bipartite graphs only
/// the smaller class is enumerated, otherwise brute force.
pub fn partition_function(g: &Graph, w: &WeightSystem, opts: &EvalOptions) -> Result<NonNegValue, CountError> {
    w.check_graph(g)?;
    match bipartition(g) {
        Ok(bp) => {
            let (e, o) = (bp.class_e(), bp.class_o());
            let (outer, inner) = if e.len() <= o.len() { (e, o) } else { (o, e) };
            let backend = opts.resolve(w, enumeration_size(w.m(), outer.len()))?;
            evaluate(w, backend, &OneSided::new(g, outer, inner))
        }
        Err(_) => partition_brute(g, w, opts),
    }
}

/// `Z^W(K_{a,b})` enumerating only the smaller side.
pub fn partition_kab(inst: &KabInstance, opts: &EvalOptions) -> Result<NonNegValue, CountError> {
    let (w_side, z_side) = (inst.w_side(), inst.z_side());
    let (outer, inner) = if w_side.len() <= z_side.len() { (w_side, z_side) } else { (z_side, w_side) };
    let backend = opts.resolve(&inst.weights, enumeration_size(inst.weights.m(), outer.len()))?;
    evaluate(&inst.weights, backend, &OneSided::new(&inst.graph, outer, inner))
}

/// Same as [`partition_kab`] with a caller-fixed backend (no budget check
/// beyond `opts.budget`).
pub fn partition_kab_in(inst: &KabInstance, backend: Backend, opts: &EvalOptions) -> Result<NonNegValue, CountError> {
    let forced = EvalOptions {
        backend: match backend {
            Backend::Exact => BackendChoice::Exact,
            Backend::Log => BackendChoice::Log,
        },
        ..opts.clone()
    };
    partition_kab(inst, &forced)
}

pub fn partition_function_in(
    g: &Graph,
    w: &WeightSystem,
    backend: Backend,
    opts: &EvalOptions,
) -> Result<NonNegValue, CountError> {
    let forced = EvalOptions {
        backend: match backend {
            Backend::Exact => BackendChoice::Exact,
            Backend::Log => BackendChoice::Log,
        },
        ..opts.clone()
    };
    partition_function(g, w, &forced)
}

/// Adjacency matrix of a target graph.
struct Target {
    n: usize,
    adj: Vec<bool>,
}

impl Target {
    fn new(h: &Graph) -> Self {
        let n = h.n();
        let mut adj = vec![false; n * n];
        for &(u, v) in h.edges() {
            adj[u * n + v] = true;
            adj[v * n + u] = true;
        }
        Target { n, adj }
    }

    #[inline]
    fn adjacent(&self, x: usize, y: usize) -> bool {
        self.adj[x * self.n + y]
    }
}

struct ListSearch<'a> {
    g: &'a Graph,
    h: Target,
    lists: &'a ListAssignment,
    image: Vec<Option<usize>>,
}

impl ListSearch<'_> {
    fn candidates(&self, v: usize) -> Vec<usize> {
        self.lists
            .get(v)
            .iter()
            .copied()
            .filter(|&c| self.g.neighbors(v).iter().all(|&u| self.image[u].is_none_or(|x| self.h.adjacent(x, c))))
            .collect()
    }

    fn count(&mut self) -> u128 {
        let mut best: Option<(usize, Vec<usize>)> = None;
        let mut independent = true;
        let mut product: u128 = 1;
        for v in 0..self.g.n() {
            if self.image[v].is_some() {
                continue;
            }
            let c = self.candidates(v);
            if c.is_empty() {
                return 0;
            }
            if self.g.neighbors(v).iter().any(|&u| self.image[u].is_none()) {
                independent = false;
            }
            product = product.saturating_mul(c.len() as u128);
            if best.as_ref().is_none_or(|(_, b)| c.len() < b.len()) {
                best = Some((v, c));
            }
        }
        let Some((v, cands)) = best else {
            return 1;
        };
        if independent {
            return product;
        }
        let mut total = 0u128;
        for c in cands {
            self.image[v] = Some(c);
            total += self.count();
        }
        self.image[v] = None;
        total
    }
}

/// `|Hom^L(G, H)|` by backtracking on the vertex with the fewest remaining
/// candidates.
pub fn count_list_homs(g: &Graph, h: &Graph, lists: &ListAssignment, budget: u64) -> Result<u128, CountError> {
    lists.check(g, h)?;
    let space = lists.search_space();
    if space > budget as f64 {
        return Err(CountError::Budget { size: space, budget });
    }
    let mut search = ListSearch { g, h: Target::new(h), lists, image: vec![None; g.n()] };
    Ok(search.count())
}

/// `|Hom(G, H)|`.
pub fn count_homs(g: &Graph, h: &Graph, budget: u64) -> Result<u128, CountError> {
    count_list_homs(g, h, &ListAssignment::full(g.n(), h.n()), budget)
}

/// `|C^x(A, B)|`: extensions of the partial list homomorphism `x` on `A` (with
/// `x[k]` the image of `A[k]`) to the independent set `B`. Each vertex of `B`
/// independently picks a list entry adjacent to the images of its
/// neighbours in `A`.
pub fn count_extensions(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    a: &[usize],
    b: &[usize],
    x: &[usize],
) -> Result<u128, CountError> {
    lists.check(g, h)?;
    if x.len() != a.len() {
        return Err(CountError::PartialMap(format!("{} images for {} vertices of A", x.len(), a.len())));
    }
    let mut image = vec![None; g.n()];
    for (&u, &xu) in a.iter().zip(x) {
        if u >= g.n() {
            return Err(CountError::PartialMap(format!("vertex {u} out of range")));
        }
        if !lists.contains(u, xu) {
            return Err(CountError::PartialMap(format!("x({u}) = {xu} is not in L({u})")));
        }
        image[u] = Some(xu);
    }
    let mut in_b = vec![false; g.n()];
    for &v in b {
        if v >= g.n() || image[v].is_some() {
            return Err(CountError::PartialMap(format!("B vertex {v} is out of range or in A")));
        }
        in_b[v] = true;
    }
    if let Some(&(u, v)) = g.edges().iter().find(|&&(u, v)| in_b[u] && in_b[v]) {
        return Err(CountError::PartialMap(format!("B is not independent: edge {u}-{v}")));
    }
    Ok(extension_count(g, &Target::new(h), lists, b, &image))
}

fn extension_count(g: &Graph, h: &Target, lists: &ListAssignment, b: &[usize], image: &[Option<usize>]) -> u128 {
    let mut total: u128 = 1;
    for &v in b {
        let c = lists
            .get(v)
            .iter()
            .filter(|&&c| g.neighbors(v).iter().all(|&u| image[u].is_none_or(|xu| h.adjacent(xu, c))))
            .count() as u128;
        if c == 0 {
            return 0;
        }
        total *= c;
    }
    total
}

/// Sums `|C^x(A, B)|^p` over all `x` in `prod_{v in A} L(v)` in lexicographic
/// order, handing each count to `visit`.
pub(crate) fn for_each_extension(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    a: &[usize],
    b: &[usize],
    mut visit: impl FnMut(u128),
) {
    let target = Target::new(h);
    let mut image = vec![None; g.n()];
    let mut idx = vec![0usize; a.len()];
    if a.iter().any(|&u| lists.get(u).is_empty()) {
        return;
    }
    loop {
        for (k, &u) in a.iter().enumerate() {
            image[u] = Some(lists.get(u)[idx[k]]);
        }
        visit(extension_count(g, &target, lists, b, &image));
        let mut k = a.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists.get(a[k]).len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `|I(G)|`, the number of independent sets, by branching on the lowest
/// remaining vertex. Requires `n <= 64`.
pub fn count_independent_sets(g: &Graph) -> u128 {
    assert!(g.n() <= 64, "independent-set enumeration supports at most 64 vertices");
    let closed: Vec<u64> = (0..g.n()).map(|v| g.neighbors(v).iter().fold(1u64 << v, |m, &u| m | (1u64 << u))).collect();
    fn go(mask: u64, closed: &[u64]) -> u128 {
        if mask == 0 {
            return 1;
        }
        let v = mask.trailing_zeros() as usize;
        go(mask & !(1u64 << v), closed) + go(mask & !closed[v], closed)
    }
    let all = if g.n() == 64 { u64::MAX } else { (1u64 << g.n()) - 1 };
    go(all, &closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{kab_graph, make_hardcore, make_hardcore_uniform, make_ising};
    use num_traits::ToPrimitive;

    fn exact_int(v: &NonNegValue) -> i64 {
        v.as_exact().unwrap().to_integer().to_i64().unwrap()
    }

    /// Independent sets by subset enumeration, written without shared code.
    fn independent_sets_by_subsets(g: &Graph) -> u64 {
        (0u32..1 << g.n()).filter(|s| g.edges().iter().all(|&(u, v)| s & (1 << u) == 0 || s & (1 << v) == 0)).count()
            as u64
    }

    #[test]
    fn unit_weights_count_configurations() {
        let g = Graph::cycle(5);
        let z = partition_brute(&g, &WeightSystem::ones(&g, 3), &EvalOptions::exact()).unwrap();
        assert_eq!(exact_int(&z), 243);
    }

    #[test]
    fn hardcore_examples() {
        let k11 = Graph::path(2);
        let z = partition_brute(&k11, &make_hardcore_uniform(&k11, NonNegValue::one()), &EvalOptions::exact()).unwrap();
        assert_eq!(exact_int(&z), 3);
        let w = make_hardcore(&k11, &[NonNegValue::from_integer(2), NonNegValue::from_integer(3)]).unwrap();
        assert_eq!(exact_int(&partition_brute(&k11, &w, &EvalOptions::exact()).unwrap()), 6);
        let c4 = Graph::cycle(4);
        let z = partition_brute(&c4, &make_hardcore_uniform(&c4, NonNegValue::one()), &EvalOptions::exact()).unwrap();
        assert_eq!(exact_int(&z), independent_sets_by_subsets(&c4) as i64);
        assert_eq!(exact_int(&z), 7);
    }

    #[test]
    fn ising_single_edge_and_c4() {
        let e = Graph::path(2);
        let z = partition_brute(&e, &make_ising(&e, 1.0, 0.0), &EvalOptions::default()).unwrap();
        let expect = 2.0 * (-1f64).exp() + 2.0 * 1f64.exp();
        assert_eq!(z.backend(), Backend::Log);
        assert!((z.to_log().to_f64() - expect).abs() < 1e-12 * expect);
        // Transfer matrix trace: tr(T^4) with T = [[e^-1, e], [e, e^-1]].
        let (p, q) = ((-1f64).exp(), 1f64.exp());
        let (l1, l2) = (p + q, p - q);
        let tr = l1.powi(4) + l2.powi(4);
        let c4 = Graph::cycle(4);
        let z = partition_brute(&c4, &make_ising(&c4, 1.0, 0.0), &EvalOptions::default()).unwrap();
        assert!((z.to_log().to_f64() - tr).abs() < 1e-12 * tr);
        assert!((tr - 121.23).abs() < 0.01);
        let flat = partition_brute(&c4, &make_ising(&c4, 0.0, 0.0), &EvalOptions::default()).unwrap();
        assert!((flat.to_log().to_f64() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn weight_of_examples() {
        let e = Graph::path(2);
        let w = make_ising(&e, 0.8, 0.3);
        let f = SpinConfig(vec![0, 0]);
        let x = weight_of(&e, &w, &f, Backend::Log).unwrap();
        assert!((x.ln() - (-0.8 + 0.6)).abs() < 1e-14);
        let c4 = Graph::cycle(4);
        let hc = make_hardcore_uniform(&c4, NonNegValue::one());
        assert!(weight_of(&c4, &hc, &SpinConfig(vec![0, 0, 1, 1]), Backend::Exact).unwrap().is_zero());
        let ones = WeightSystem::ones(&c4, 3);
        assert_eq!(weight_of(&c4, &ones, &SpinConfig(vec![2, 0, 1, 2]), Backend::Exact).unwrap(), NonNegValue::one());
        assert!(weight_of(&c4, &ones, &SpinConfig(vec![3, 0, 1, 2]), Backend::Exact).is_err());
        assert!(weight_of(&e, &w, &f, Backend::Exact).is_err());
    }

    #[test]
    fn brute_equals_sum_of_weights() {
        let g = Graph::path(4);
        let mut w = WeightSystem::ones(&g, 2);
        w.set_vertex(1, 0, NonNegValue::ratio(3, 5));
        w.set_edge(2, 0, 1, NonNegValue::ratio(7, 2));
        w.set_edge(0, 1, 1, NonNegValue::ratio(1, 9));
        let mut total = NonNegValue::zero();
        for code in 0..16usize {
            let f = SpinConfig((0..4).map(|v| (code >> (3 - v)) & 1).collect());
            total = total.add(&weight_of(&g, &w, &f, Backend::Exact).unwrap());
        }
        assert_eq!(partition_brute(&g, &w, &EvalOptions::exact()).unwrap(), total);
        assert_eq!(partition_function(&g, &w, &EvalOptions::exact()).unwrap(), total);
    }

    #[test]
    fn kab_fast_path_examples() {
        let inst = KabInstance::from_weights(2, 2, WeightSystem::ones(&kab_graph(2, 2), 2));
        assert_eq!(exact_int(&partition_kab(&inst, &EvalOptions::exact()).unwrap()), 16);
        for d in 1..=4 {
            let g = kab_graph(d, d);
            let inst = KabInstance::from_weights(d, d, make_hardcore_uniform(&g, NonNegValue::one()));
            let z = exact_int(&partition_kab(&inst, &EvalOptions::exact()).unwrap());
            assert_eq!(z, (1 << (d + 1)) - 1);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = Graph::cycle(10);
        let opts = EvalOptions::with_budget(1000);
        assert!(matches!(
            partition_brute(&g, &WeightSystem::ones(&g, 2), &opts),
            Err(CountError::Budget { .. })
        ));
        assert!(partition_function(&g, &WeightSystem::ones(&g, 2), &opts).is_ok());
    }

    #[test]
    fn auto_backend_respects_exact_budget() {
        let g = Graph::cycle(8);
        let w = WeightSystem::ones(&g, 2);
        let opts = EvalOptions { backend: BackendChoice::Auto, budget: 1000, exact_budget: 100 };
        assert_eq!(partition_brute(&g, &w, &opts).unwrap().backend(), Backend::Log);
        let opts = EvalOptions { exact_budget: 1000, ..opts };
        assert_eq!(partition_brute(&g, &w, &opts).unwrap().backend(), Backend::Exact);
    }

    #[test]
    fn list_hom_examples() {
        let k2 = Graph::path(2);
        let k3 = Graph::complete(3);
        assert_eq!(count_homs(&k2, &k3, DEFAULT_BUDGET).unwrap(), 6);
        assert_eq!(count_homs(&Graph::cycle(6), &k3, DEFAULT_BUDGET).unwrap(), 66);
        let mut lists = ListAssignment::full(6, 3);
        lists.set(4, vec![]).unwrap();
        assert_eq!(count_list_homs(&Graph::cycle(6), &k3, &lists, DEFAULT_BUDGET).unwrap(), 0);
        let single = ListAssignment::new(3, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(count_list_homs(&k2, &k3, &single, DEFAULT_BUDGET).unwrap(), 1);
        let clash = ListAssignment::new(3, vec![vec![2], vec![2]]).unwrap();
        assert_eq!(count_list_homs(&k2, &k3, &clash, DEFAULT_BUDGET).unwrap(), 0);
    }

    #[test]
    fn extension_examples() {
        let g = Graph::cycle(4);
        let k3 = Graph::complete(3);
        let lists = ListAssignment::full(4, 3);
        assert_eq!(count_extensions(&g, &k3, &lists, &[0], &[], &[1]).unwrap(), 1);
        // N(1) = {0, 2}, both coloured 0; vertex 1 can take 1 or 2.
        assert_eq!(count_extensions(&g, &k3, &lists, &[0, 2], &[1], &[0, 0]).unwrap(), 2);
        let mut narrow = lists.clone();
        narrow.set(0, vec![1, 2]).unwrap();
        assert!(count_extensions(&g, &k3, &narrow, &[0, 2], &[1], &[0, 0]).is_err());
        assert!(count_extensions(&g, &k3, &lists, &[0], &[1, 2], &[0]).is_err());
    }

    #[test]
    fn independent_set_counts() {
        assert_eq!(count_independent_sets(&Graph::cycle(6)), 18);
        assert_eq!(count_independent_sets(&Graph::complete(3)), 4);
        assert_eq!(count_independent_sets(&Graph::complete_bipartite(2, 3)), 4 + 8 - 1);
        let q3 = Graph::hypercube(3);
        assert_eq!(count_independent_sets(&q3) as u64, independent_sets_by_subsets(&q3));
    }

    #[test]
    fn lex_sum_is_thread_count_independent() {
        let g = Graph::cycle(9);
        let w = make_ising(&g, 0.37, 0.11);
        let a = partition_brute(&g, &w, &EvalOptions::default()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| partition_brute(&g, &w, &EvalOptions::default()).unwrap());
        assert_eq!(a.ln().to_bits(), b.ln().to_bits());
    }
}

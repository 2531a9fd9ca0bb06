//! The blow-up construction: a host graph whose blocks `S_{i,v}` have size
//! `C * lambda_{i,v}`, random subgraphs keeping each host edge with its edge
//! weight as probability, and moment statistics of block-respecting
//! homomorphism counts.

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::json_f64;
use crate::count::{CountError, SpinConfig};
use crate::derive_seed;
use crate::graph::{certify, Graph};
use crate::value::{format_rational, ln_rational, pow_rational};
use crate::weights::{normalize_edge_weights, WeightError, WeightSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlowupError {
    #[error("block size C * lambda_{{{i},{v}}} = {size} is not a positive integer")]
    NonIntegralBlock { v: usize, i: usize, size: String },
    #[error("weight {what} is zero; the blow-up needs strictly positive weights")]
    ZeroWeight { what: String },
    #[error("edge probability {0} does not fit 64-bit numerator and denominator")]
    ProbabilityTooLarge(String),
    #[error("scale C must be positive")]
    ZeroScale,
    #[error("at least 2 trials are needed, got {0}")]
    Trials(usize),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Count(#[from] CountError),
}

/// The host graph `H` on the disjoint union of the blocks `S_{i,v}`.
///
/// Host vertices are laid out block by block, vertex-major: `S_{0,0}`,
/// `S_{1,0}`, ..., `S_{m-1,N-1}`. Edge probabilities are the (possibly
/// rescaled) edge weights, stored as `p/q` with `0 < p <= q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupHost {
    c: u64,
    g: Graph,
    m: usize,
    block_start: Vec<usize>,
    block_size: Vec<usize>,
    prob: Vec<(u64, u64)>,
    weights: WeightSystem,
    edge_scale: BigRational,
}

impl BlowupHost {
    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn graph(&self) -> &Graph {
        &self.g
    }

    /// Weights the host realizes: vertex weights as given, edge weights
    /// divided by [`BlowupHost::edge_scale`].
    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    /// The factor all edge weights were divided by (1 when none exceeded 1).
    pub fn edge_scale(&self) -> &BigRational {
        &self.edge_scale
    }

    pub fn block(&self, v: usize, i: usize) -> Range<usize> {
        let k = v * self.m + i;
        self.block_start[k]..self.block_start[k] + self.block_size[k]
    }

    pub fn block_size(&self, v: usize, i: usize) -> usize {
        self.block_size[v * self.m + i]
    }

    pub fn vertex_count(&self) -> usize {
        self.block_size.iter().sum()
    }

    /// `L(v)`, the union of the blocks of `v`.
    pub fn list(&self, v: usize) -> Range<usize> {
        self.block(v, 0).start..self.block(v, self.m - 1).end
    }

    /// Retention probability `(p, q)` of host edges between `S_{i,u}` and
    /// `S_{j,v}` for the `e`-th edge `uv` of `G` (`u < v`).
    pub fn probability(&self, e: usize, i: usize, j: usize) -> (u64, u64) {
        self.prob[(e * self.m + i) * self.m + j]
    }

    pub fn edge_count(&self) -> usize {
        self.g
            .edges()
            .iter()
            .map(|&(u, v)| self.list(u).len() * self.list(v).len())
            .sum()
    }

    /// `H` as an explicit graph; only sensible for small hosts.
    pub fn host_graph(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.edge_count());
        for &(u, v) in self.g.edges() {
            for x in self.list(u) {
                for y in self.list(v) {
                    edges.push((x, y));
                }
            }
        }
        Graph::new(self.vertex_count(), edges).expect("blocks are disjoint")
    }
}

fn positive_integer(q: &BigRational) -> Option<usize> {
    if q.is_integer() && *q.numer() > BigInt::zero() {
        q.to_integer().to_usize()
    } else {
        None
    }
}

/// Builds the host for strictly positive rational weights. Edge weights are
/// divided by their maximum when any exceeds 1.
pub fn build_blowup_host(g: &Graph, w: &WeightSystem, c: u64) -> Result<BlowupHost, BlowupError> {
    w.check_graph(g)?;
    if c == 0 {
        return Err(BlowupError::ZeroScale);
    }
    let m = w.m();
    for v in 0..g.n() {
        for i in 0..m {
            let q = w.vertex(v, i).as_exact().ok_or(WeightError::NotRational)?;
            if q.is_zero() {
                return Err(BlowupError::ZeroWeight { what: format!("lambda_{{{},{v}}}", i + 1) });
            }
        }
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        for i in 0..m {
            for j in i..m {
                let q = w.edge(e, i, j).as_exact().ok_or(WeightError::NotRational)?;
                if q.is_zero() {
                    return Err(BlowupError::ZeroWeight { what: format!("lambda_{{{}{},{u}{v}}}", i + 1, j + 1) });
                }
            }
        }
    }
    let exceeds_one = w.edge_values().iter().any(|x| x.as_exact().is_some_and(|q| *q > BigRational::one()));
    let (weights, edge_scale) = if exceeds_one {
        normalize_edge_weights(w)?
    } else {
        (w.clone(), BigRational::one())
    };
    let scale = BigRational::from_integer(c.into());
    let mut block_start = Vec::with_capacity(g.n() * m);
    let mut block_size = Vec::with_capacity(g.n() * m);
    let mut next = 0usize;
    for v in 0..g.n() {
        for i in 0..m {
            let size = weights.vertex(v, i).as_exact().expect("checked") * &scale;
            let s = positive_integer(&size).ok_or_else(|| BlowupError::NonIntegralBlock {
                v,
                i: i + 1,
                size: format_rational(&size),
            })?;
            block_start.push(next);
            block_size.push(s);
            next += s;
        }
    }
    let mut prob = Vec::with_capacity(g.edge_count() * m * m);
    for e in 0..g.edge_count() {
        for i in 0..m {
            for j in 0..m {
                let q = weights.edge(e, i, j).as_exact().expect("checked");
                let p = (q.numer().to_u64(), q.denom().to_u64());
                match p {
                    (Some(p), Some(d)) => prob.push((p, d)),
                    _ => return Err(BlowupError::ProbabilityTooLarge(format_rational(q))),
                }
            }
        }
    }
    Ok(BlowupHost { c, g: g.clone(), m, block_start, block_size, prob, weights, edge_scale })
}

/// A dense 0/1 matrix, one bit per host edge between two blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMatrix { rows, cols, words, bits: vec![0; rows * words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.words + c / 64] |= 1 << (c % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Host edges between `S_{i,u}` and `S_{j,v}` kept in the sample, for the
/// `e`-th edge `uv` of `G`. Every block pair has its own random stream, so
/// any subset of pairs can be drawn without drawing the rest.
pub fn sample_block_pair(host: &BlowupHost, seed: u64, e: usize, i: usize, j: usize) -> BitMatrix {
    let (u, v) = host.g.edges()[e];
    let mut out = BitMatrix::new(host.block_size(u, i), host.block_size(v, j));
    let (p, q) = host.probability(e, i, j);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((e * host.m + i) * host.m + j) as u64);
    for r in 0..out.rows {
        for c in 0..out.cols {
            if p == q || rng.gen_range(0..q) < p {
                out.set(r, c);
            }
        }
    }
    out
}

/// A sampled subgraph `H~` of the host, stored per edge of `G` and block pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TildeH {
    m: usize,
    pairs: Vec<BitMatrix>,
}

impl TildeH {
    /// Kept host edges between `S_{i,u}` and `S_{j,v}` for the `e`-th edge `uv`.
    pub fn block_pair(&self, e: usize, i: usize, j: usize) -> &BitMatrix {
        &self.pairs[(e * self.m + i) * self.m + j]
    }

    pub fn edge_count(&self) -> usize {
        self.pairs.iter().map(BitMatrix::count_ones).sum()
    }

    pub fn has_edge(&self, host: &BlowupHost, x: usize, y: usize) -> bool {
        let locate = |z: usize| {
            let k = host.block_start.partition_point(|&s| s <= z) - 1;
            (k / host.m, k % host.m, z - host.block_start[k])
        };
        let ((u, i, a), (v, j, b)) = (locate(x), locate(y));
        let ((u, i, a), (v, j, b)) = if u <= v { ((u, i, a), (v, j, b)) } else { ((v, j, b), (u, i, a)) };
        match host.g.edge_index(u, v) {
            Some(e) => self.block_pair(e, i, j).get(a, b),
            None => false,
        }
    }
}

/// Keeps each host edge independently with its probability; deterministic
/// given `seed`.
pub fn sample_tilde_h(host: &BlowupHost, seed: u64) -> TildeH {
    let m = host.m;
    let pairs = (0..host.g.edge_count() * m * m)
        .map(|k| sample_block_pair(host, seed, k / (m * m), k / m % m, k % m))
        .collect();
    TildeH { m, pairs }
}

/// A table over a set of variables, row-major in `vars` order.
struct Factor {
    vars: Vec<usize>,
    data: Vec<u128>,
}

/// Sum over all assignments of the product of `factors`, where variable `v`
/// ranges over `0..dom[v]`, by greedy min-degree variable elimination.
fn eliminate_all(dom: &[usize], mut factors: Vec<Factor>, budget: u64) -> Result<u128, CountError> {
    let n = dom.len();
    let total: f64 = dom.iter().map(|&d| d as f64).product();
    if total >= 2f64.powi(127) {
        return Err(CountError::Budget { size: total, budget });
    }
    let mut nbrs: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for f in &factors {
        for &a in &f.vars {
            for &b in &f.vars {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
    }
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut cost = 0f64;
    for _ in 0..n {
        let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (nbrs[v].len(), v)).expect("variable left");
        cost += nbrs[v].iter().map(|&u| dom[u] as f64).product::<f64>() * dom[v] as f64;
        let ns: Vec<usize> = nbrs[v].iter().copied().collect();
        for &a in &ns {
            nbrs[a].remove(&v);
            for &b in &ns {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
        alive[v] = false;
        order.push(v);
    }
    if cost > budget as f64 {
        return Err(CountError::Budget { size: cost, budget });
    }
    for v in order {
        let (with, without): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = without;
        let mut scope: Vec<usize> = with.iter().flat_map(|f| f.vars.iter().copied()).filter(|&u| u != v).collect();
        scope.sort_unstable();
        scope.dedup();
        // Strides of each factor along the new scope and along v.
        let strides = |f: &Factor, x: usize| -> usize {
            match f.vars.iter().position(|&u| u == x) {
                Some(p) => f.vars[p + 1..].iter().map(|&u| dom[u]).product(),
                None => 0,
            }
        };
        let scope_strides: Vec<Vec<usize>> = with.iter().map(|f| scope.iter().map(|&u| strides(f, u)).collect()).collect();
        let v_strides: Vec<usize> = with.iter().map(|f| strides(f, v)).collect();
        let size: usize = scope.iter().map(|&u| dom[u]).product();
        let mut data = vec![0u128; size];
        let mut digits = vec![0usize; scope.len()];
        let mut base = vec![0usize; with.len()];
        for cell in data.iter_mut() {
            let mut sum = 0u128;
            for x in 0..dom[v] {
                let mut p = 1u128;
                for (k, f) in with.iter().enumerate() {
                    p *= f.data[base[k] + x * v_strides[k]];
                    if p == 0 {
                        break;
                    }
                }
                sum += p;
            }
            *cell = sum;
            let mut d = scope.len();
            while d > 0 {
                d -= 1;
                digits[d] += 1;
                for (k, b) in base.iter_mut().enumerate() {
                    *b += scope_strides[k][d];
                }
                if digits[d] < dom[scope[d]] {
                    break;
                }
                for (k, b) in base.iter_mut().enumerate() {
                    *b -= scope_strides[k][d] * dom[scope[d]];
                }
                digits[d] = 0;
            }
        }
        factors.push(Factor { vars: scope, data });
    }
    Ok(factors.iter().map(|f| f.data[0]).product())
}

/// `|H_g(G, H~)|`: maps with `f(v)` in `S_{g(v),v}` sending every edge of `G`
/// to an edge of `H~`, counted by variable elimination over `G`.
pub fn count_block_homs(host: &BlowupHost, htilde: &TildeH, cfg: &SpinConfig, budget: u64) -> Result<u128, CountError> {
    count_with(host, cfg, budget, |e, i, j| htilde.block_pair(e, i, j).clone())
}

fn count_with(
    host: &BlowupHost,
    cfg: &SpinConfig,
    budget: u64,
    pair: impl Fn(usize, usize, usize) -> BitMatrix,
) -> Result<u128, CountError> {
    let g = &host.g;
    let cfg = SpinConfig::new(cfg.0.clone(), g.n(), host.m)?;
    let dom: Vec<usize> = (0..g.n()).map(|v| host.block_size(v, cfg.0[v])).collect();
    let factors = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let bits = pair(e, cfg.0[u], cfg.0[v]);
            let data = (0..bits.rows()).flat_map(|r| (0..bits.cols()).map(move |c| (r, c))).map(|(r, c)| bits.get(r, c) as u128).collect();
            Factor { vars: vec![u, v], data }
        })
        .collect();
    eliminate_all(&dom, factors, budget)
}

/// Outcome of repeated sampling of `|H_g(G, H~)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupStats {
    pub c: u64,
    pub trials: usize,
    pub seed: u64,
    pub cfg: SpinConfig,
    /// `C^N w^W(g)` for the weights the host realizes (edge weights rescaled).
    pub mu: BigRational,
    pub edge_scale: BigRational,
    pub samples: Vec<u128>,
    pub emp_mean: f64,
    pub emp_var: f64,
    pub w_min: BigRational,
    pub alpha: BigRational,
    /// Existence threshold `m^N + a N m^(a+b) / (a+b)`, for biregular `G`.
    pub threshold: Option<f64>,
    pub samples_path: Option<String>,
}

impl BlowupStats {
    pub fn mu_f64(&self) -> f64 {
        self.mu.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64().unwrap_or(f64::INFINITY)
    }

    /// `alpha / C^2`, the bound on `Var / mu^2`.
    pub fn cheb_budget(&self) -> f64 {
        self.alpha_f64() / (self.c as f64 * self.c as f64)
    }

    pub fn var_ratio(&self) -> f64 {
        self.emp_var / (self.mu_f64() * self.mu_f64())
    }

    pub fn std_err(&self) -> f64 {
        (self.emp_var / self.trials as f64).sqrt()
    }

    /// `|mean - mu|` in units of the standard error (0 when both vanish).
    pub fn mean_deviation_se(&self) -> f64 {
        let dev = (self.emp_mean - self.mu_f64()).abs();
        if dev == 0.0 {
            0.0
        } else {
            dev / self.std_err()
        }
    }

    /// Relative deviation `sqrt(alpha / C)` exceeded with probability at most `1/C`.
    pub fn deviation_bound(&self) -> f64 {
        (self.alpha_f64() / self.c as f64).sqrt()
    }

    /// `sqrt(alpha) / (sqrt(C) - sqrt(alpha))`, defined once `C > alpha`.
    pub fn delta(&self) -> Option<f64> {
        let (a, c) = (self.alpha_f64().sqrt(), (self.c as f64).sqrt());
        (c > a).then(|| a / (c - a))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "C": self.c,
            "trials": self.trials,
            "seed": self.seed,
            "cfg": self.cfg.0.iter().map(|s| s + 1).collect::<Vec<_>>(),
            "mu_log": json_f64(ln_rational(&self.mu)),
            "mu_exact": format_rational(&self.mu),
            "edge_scale": format_rational(&self.edge_scale),
            "emp_mean": json_f64(self.emp_mean),
            "emp_var": json_f64(self.emp_var),
            "std_err": json_f64(self.std_err()),
            "mean_deviation_se": json_f64(self.mean_deviation_se()),
            "var_ratio": json_f64(self.var_ratio()),
            "w_min": format_rational(&self.w_min),
            "alpha": json_f64(self.alpha_f64()),
            "alpha_exact": format_rational(&self.alpha),
            "cheb_budget": json_f64(self.cheb_budget()),
            "deviation_bound": json_f64(self.deviation_bound()),
            "delta": self.delta().map(json_f64),
            "threshold": self.threshold.map(json_f64),
            "samples_path": self.samples_path,
        })
    }
}

/// `alpha = 1/w_min + lambda_vmax^N N^2 / (lambda_vmin^2 w_min)` with
/// `w_min = lambda_vmin^N lambda_emin^|E|`; returns `(w_min, alpha)`.
pub fn alpha_constant(g: &Graph, w: &WeightSystem) -> Result<(BigRational, BigRational), BlowupError> {
    let exact = |xs: &[crate::value::NonNegValue]| -> Result<Vec<BigRational>, BlowupError> {
        xs.iter().map(|x| x.as_exact().cloned().ok_or(BlowupError::Weight(WeightError::NotRational))).collect()
    };
    let vs = exact(w.vertex_values())?;
    let es = exact(w.edge_values())?;
    let vmin = vs.iter().min().cloned().unwrap_or_else(BigRational::one);
    let vmax = vs.iter().max().cloned().unwrap_or_else(BigRational::one);
    let emin = es.iter().min().cloned().unwrap_or_else(BigRational::one);
    if vmin.is_zero() || emin.is_zero() {
        return Err(BlowupError::ZeroWeight { what: "minimum".into() });
    }
    let n = g.n() as u64;
    let w_min = pow_rational(&vmin, n) * pow_rational(&emin, g.edge_count() as u64);
    let n2 = BigRational::from_integer((n * n).into());
    let alpha = w_min.recip() + pow_rational(&vmax, n) * n2 / (&vmin * &vmin * &w_min);
    Ok((w_min, alpha))
}

/// Samples `|H_g(G, H~_t)|` for `t = 0..trials` with per-trial seeds derived
/// from `seed`, and compares the moments with `mu = C^N w^W(g)`.
pub fn concentration_experiment(
    g: &Graph,
    w: &WeightSystem,
    cfg: &SpinConfig,
    c: u64,
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<BlowupStats, BlowupError> {
    if trials < 2 {
        return Err(BlowupError::Trials(trials));
    }
    let host = build_blowup_host(g, w, c)?;
    let cfg = SpinConfig::new(cfg.0.clone(), g.n(), w.m())?;
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, t as u64);
            count_with(&host, &cfg, budget, |e, i, j| sample_block_pair(&host, s, e, i, j))
        })
        .collect::<Result<Vec<u128>, CountError>>()?;

    let hw = host.weights();
    let mut weight = BigRational::one();
    for v in 0..g.n() {
        weight *= hw.vertex(v, cfg.0[v]).as_exact().expect("rational");
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        weight *= hw.edge(e, cfg.0[u], cfg.0[v]).as_exact().expect("rational");
    }
    let mu = pow_rational(&BigRational::from_integer(c.into()), g.n() as u64) * weight;

    let t = BigInt::from(trials);
    let sum: BigInt = samples.iter().map(|&x| BigInt::from(x)).sum();
    let sum_sq: BigInt = samples.iter().map(|&x| BigInt::from(x) * BigInt::from(x)).sum();
    let mean = BigRational::new(sum.clone(), t.clone());
    let var = BigRational::new(&t * sum_sq - &sum * &sum, &t * (&t - 1));
    let (w_min, alpha) = alpha_constant(g, hw)?;
    let threshold = certify(g).ok().map(|cert| {
        let (a, b, m, n) = (cert.a as f64, cert.b as f64, w.m() as f64, g.n() as f64);
        m.powf(n) + a * n * m.powf(a + b) / (a + b)
    });
    Ok(BlowupStats {
        c,
        trials,
        seed,
        cfg,
        mu,
        edge_scale: host.edge_scale().clone(),
        samples,
        emp_mean: mean.to_f64().unwrap_or(f64::INFINITY),
        emp_var: var.to_f64().unwrap_or(f64::INFINITY),
        w_min,
        alpha,
        threshold,
        samples_path: None,
    })
}

/// Raw samples, one decimal integer per line.
pub fn samples_text(stats: &BlowupStats) -> String {
    stats.samples.iter().map(|x| format!("{x}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::NonNegValue;
    use crate::weights::make_hardcore_uniform;

    const BUDGET: u64 = 1 << 40;

    fn half_edges(g: &Graph, m: usize) -> WeightSystem {
        let mut w = WeightSystem::ones(g, m);
        w.set_all_edges(&vec![vec![NonNegValue::ratio(1, 2); m]; m]);
        w
    }

    /// `|H_g|` by trying every map into the chosen blocks.
    fn brute_block_homs(host: &BlowupHost, th: &TildeH, cfg: &[usize]) -> u128 {
        let g = host.graph();
        let blocks: Vec<Range<usize>> = (0..g.n()).map(|v| host.block(v, cfg[v])).collect();
        let mut f: Vec<usize> = blocks.iter().map(|b| b.start).collect();
        let mut count = 0;
        loop {
            if g.edges().iter().all(|&(u, v)| th.has_edge(host, f[u], f[v])) {
                count += 1;
            }
            let mut k = g.n();
            loop {
                if k == 0 {
                    return count;
                }
                k -= 1;
                f[k] += 1;
                if f[k] < blocks[k].end {
                    break;
                }
                f[k] = blocks[k].start;
            }
        }
    }

    #[test]
    fn unit_host_is_full_blowup() {
        let g = Graph::cycle(4);
        let host = build_blowup_host(&g, &WeightSystem::ones(&g, 2), 1).unwrap();
        assert_eq!(host.vertex_count(), 8);
        let h = host.host_graph();
        assert_eq!(h.edge_count(), 4 * 4);
        assert!(h.has_edge(host.block(0, 1).start, host.block(1, 0).start));
        assert!(!h.has_edge(host.block(0, 1).start, host.block(2, 0).start));
        let th = sample_tilde_h(&host, 99);
        assert_eq!(th.edge_count(), h.edge_count());
    }

    #[test]
    fn host_preconditions() {
        let g = Graph::path(2);
        let mut w = WeightSystem::ones(&g, 2);
        w.set_vertex(0, 0, NonNegValue::ratio(1, 2));
        assert!(matches!(build_blowup_host(&g, &w, 1), Err(BlowupError::NonIntegralBlock { .. })));
        assert_eq!(build_blowup_host(&g, &w, 2).unwrap().block_size(0, 0), 1);
        let hc = make_hardcore_uniform(&g, NonNegValue::one());
        assert!(matches!(build_blowup_host(&g, &hc, 1), Err(BlowupError::ZeroWeight { .. })));
    }

    #[test]
    fn large_edge_weights_are_rescaled() {
        let g = Graph::path(2);
        let mut w = WeightSystem::ones(&g, 2);
        w.set_edge(0, 0, 1, NonNegValue::from_integer(4));
        let host = build_blowup_host(&g, &w, 1).unwrap();
        assert_eq!(host.edge_scale(), &BigRational::from_integer(4.into()));
        assert_eq!(host.probability(0, 1, 0), (1, 1));
        assert_eq!(host.probability(0, 0, 0), (1, 4));
    }

    #[test]
    fn sampling_is_deterministic_and_pairwise_consistent() {
        let g = Graph::cycle(4);
        let host = build_blowup_host(&g, &half_edges(&g, 2), 5).unwrap();
        let a = sample_tilde_h(&host, 7);
        assert_eq!(a, sample_tilde_h(&host, 7));
        assert_ne!(a, sample_tilde_h(&host, 8));
        assert_eq!(a.block_pair(2, 1, 0), &sample_block_pair(&host, 7, 2, 1, 0));
    }

    #[test]
    fn edge_retention_matches_binomial_mean() {
        let g = Graph::cycle(4);
        let host = build_blowup_host(&g, &half_edges(&g, 2), 3).unwrap();
        let total = host.edge_count() as f64;
        let counts: Vec<f64> = (0..1000).map(|s| sample_tilde_h(&host, s).edge_count() as f64).collect();
        let mean = counts.iter().sum::<f64>() / 1000.0;
        let se = (total * 0.25).sqrt() / 1000f64.sqrt();
        assert!((mean - 0.5 * total).abs() <= 4.0 * se, "mean {mean}, expected {}", 0.5 * total);
    }

    #[test]
    fn full_host_count_is_product_of_blocks() {
        let g = Graph::cycle(4);
        let mut w = WeightSystem::ones(&g, 2);
        w.set_vertex(1, 1, NonNegValue::from_integer(3));
        let host = build_blowup_host(&g, &w, 2).unwrap();
        let th = sample_tilde_h(&host, 0);
        let cfg = SpinConfig(vec![0, 1, 1, 0]);
        assert_eq!(count_block_homs(&host, &th, &cfg, BUDGET).unwrap(), 2 * 6 * 2 * 2);
    }

    #[test]
    fn single_edge_counts_surviving_edges() {
        let g = Graph::path(2);
        let host = build_blowup_host(&g, &half_edges(&g, 2), 6).unwrap();
        let th = sample_tilde_h(&host, 3);
        let cfg = SpinConfig(vec![1, 0]);
        let k = th.block_pair(0, 1, 0).count_ones() as u128;
        assert_eq!(count_block_homs(&host, &th, &cfg, BUDGET).unwrap(), k);
    }

    #[test]
    fn elimination_matches_brute_force() {
        for (g, c) in [(Graph::cycle(4), 3), (Graph::complete(3), 3), (Graph::path(4), 2)] {
            let host = build_blowup_host(&g, &half_edges(&g, 2), c).unwrap();
            for seed in 0..5 {
                let th = sample_tilde_h(&host, seed);
                for code in 0..1usize << g.n() {
                    let cfg: Vec<usize> = (0..g.n()).map(|v| code >> v & 1).collect();
                    let fast = count_block_homs(&host, &th, &SpinConfig(cfg.clone()), BUDGET).unwrap();
                    assert_eq!(fast, brute_block_homs(&host, &th, &cfg));
                }
            }
        }
    }

    #[test]
    fn unit_weights_have_no_variance() {
        let g = Graph::cycle(4);
        let w = WeightSystem::ones(&g, 2);
        let s = concentration_experiment(&g, &w, &SpinConfig(vec![0, 1, 0, 1]), 1, 10, 5, BUDGET).unwrap();
        assert!(s.samples.iter().all(|&x| x == 1));
        assert_eq!((s.emp_mean, s.emp_var), (1.0, 0.0));
        assert_eq!(s.alpha, BigRational::from_integer(17.into()));
        assert_eq!(s.mean_deviation_se(), 0.0);
    }

    #[test]
    fn alpha_for_half_edges() {
        let g = Graph::cycle(4);
        let (w_min, alpha) = alpha_constant(&g, &half_edges(&g, 2)).unwrap();
        assert_eq!(w_min, BigRational::new(1.into(), 16.into()));
        assert_eq!(alpha, BigRational::from_integer(272.into()));
    }

    #[test]
    fn experiment_is_deterministic_across_pools() {
        let g = Graph::cycle(4);
        let w = half_edges(&g, 2);
        let cfg = SpinConfig(vec![0, 0, 1, 0]);
        let a = concentration_experiment(&g, &w, &cfg, 4, 20, 11, BUDGET).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let b = pool.install(|| concentration_experiment(&g, &w, &cfg, 4, 20, 11, BUDGET).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.threshold, Some(16.0 + 2.0 * 4.0 * 16.0 / 4.0));
    }
}

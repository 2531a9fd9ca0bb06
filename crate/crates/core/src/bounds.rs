//! Left- and right-hand sides of the biregular partition-function bounds,
//! their list-homomorphism forms, the edge-product conjectures, the
//! independent-set bounds, and the Ising free-energy sandwich.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::count::{
    count_independent_sets, count_list_homs, for_each_extension, kab_cost, partition_brute, partition_cost,
    partition_function_in, partition_kab_in, BackendChoice, CountError, EvalOptions,
};
use crate::graph::{bipartition, certify, BiregularCert, Graph, GraphError, Side};
use crate::lists::{
    classes_from_families, restrict_lists_to_edge, restrict_lists_to_kab, CoverError, CoverFamilyPair, ListAssignment,
};
use crate::value::{
    format_rational, rational_from_biguint, Backend, LogSumExp, LogWeight, NonNegValue, RadicalProduct, LOG_REL_TOL,
};
use crate::weights::{kab_graph, make_ising, restrict_to_edge, restrict_to_kab, WeightError, WeightSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("inverse temperature must be positive, got {0}")]
    Beta(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl From<crate::lists::ListError> for BoundError {
    fn from(e: crate::lists::ListError) -> Self {
        BoundError::Count(e.into())
    }
}

impl BoundError {
    pub fn is_budget(&self) -> bool {
        matches!(self, BoundError::Count(CountError::Budget { .. }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Thm3,
    Thm4,
    Thm5,
    Conj1,
    Conj2,
    Ind,
    IndConj,
}

impl BoundKind {
    pub const ALL: [BoundKind; 7] = [
        BoundKind::Thm3,
        BoundKind::Thm4,
        BoundKind::Thm5,
        BoundKind::Conj1,
        BoundKind::Conj2,
        BoundKind::Ind,
        BoundKind::IndConj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Thm3 => "thm3",
            BoundKind::Thm4 => "thm4",
            BoundKind::Thm5 => "thm5",
            BoundKind::Conj1 => "conj1",
            BoundKind::Conj2 => "conj2",
            BoundKind::Ind => "ind",
            BoundKind::IndConj => "indconj",
        }
    }

    /// Whether the inequality is a proved theorem (as opposed to conjectured).
    pub fn is_proved(self) -> bool {
        matches!(self, BoundKind::Thm3 | BoundKind::Thm4 | BoundKind::Thm5 | BoundKind::Ind)
    }

    pub fn uses_lists(self) -> bool {
        matches!(self, BoundKind::Thm4 | BoundKind::Thm5 | BoundKind::Conj2)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown bound `{s}` (expected thm3, thm4, thm5, conj1, conj2, ind or indconj)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "HOLDS",
            Verdict::Violated => "VIOLATED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// A right-hand side: an exact product of rational radicals, or a log value.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Exact(RadicalProduct),
    Log(LogWeight),
}

impl BoundValue {
    pub fn ln(&self) -> f64 {
        match self {
            BoundValue::Exact(r) => r.ln(),
            BoundValue::Log(w) => w.ln(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            BoundValue::Exact(_) => Backend::Exact,
            BoundValue::Log(_) => Backend::Log,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BoundValue::Exact(r) => r.is_zero(),
            BoundValue::Log(w) => w.is_zero(),
        }
    }

    /// Exact when both sides are exact, by log value otherwise.
    pub fn compare(&self, other: &BoundValue) -> Ordering {
        match (self, other) {
            (BoundValue::Exact(x), BoundValue::Exact(y)) => x.cmp_exact(y),
            _ => LogWeight::from_ln(self.ln()).total_cmp(&LogWeight::from_ln(other.ln())),
        }
    }

    /// `prod_k x_k^(1/root_k)` in the given backend.
    fn product(factors: Vec<(NonNegValue, u64)>, backend: Backend) -> BoundValue {
        match backend {
            Backend::Exact => {
                let mut r = RadicalProduct::new();
                for (x, root) in factors {
                    r.push(x.as_exact().expect("exact backend yields exact factors").clone(), root);
                }
                BoundValue::Exact(r)
            }
            Backend::Log => {
                let ln: f64 = factors.iter().map(|(x, root)| x.ln() / *root as f64).sum();
                BoundValue::Log(LogWeight::from_ln(ln))
            }
        }
    }
}

/// `lhs <= rhs` under one backend, with the instance it was evaluated on.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub bound: BoundKind,
    pub lhs: NonNegValue,
    pub rhs: BoundValue,
    /// `ln rhs - ln lhs`; `+inf` when `lhs = 0 < rhs`, `0` when both vanish,
    /// exactly `0` on exact equality.
    pub log_slack: f64,
    pub backend: Backend,
    pub verdict: Verdict,
    pub graph_sha: String,
    pub weights_sha: Option<String>,
}

impl BoundReport {
    /// Compares the two sides. Exact on both sides gives an exact verdict;
    /// otherwise the log comparison with relative tolerance [`LOG_REL_TOL`],
    /// which never reports a violation.
    pub fn judge(
        bound: BoundKind,
        lhs: NonNegValue,
        rhs: BoundValue,
        graph_sha: String,
        weights_sha: Option<String>,
    ) -> Self {
        let (lhs_ln, rhs_ln) = (lhs.ln(), rhs.ln());
        let raw_slack = match (lhs.is_zero(), rhs.is_zero()) {
            (true, true) => 0.0,
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            (false, false) => rhs_ln - lhs_ln,
        };
        let (backend, verdict, log_slack) = match (&lhs, &rhs) {
            (NonNegValue::Exact(l), BoundValue::Exact(r)) => {
                let ord = r.cmp_rational(l);
                let slack = match ord {
                    Ordering::Equal => 0.0,
                    Ordering::Greater if raw_slack <= 0.0 => f64::MIN_POSITIVE,
                    Ordering::Less if raw_slack >= 0.0 => -f64::MIN_POSITIVE,
                    _ => raw_slack,
                };
                let verdict = if ord == Ordering::Less { Verdict::Violated } else { Verdict::Holds };
                (Backend::Exact, verdict, slack)
            }
            _ => {
                let holds = lhs.is_zero() || lhs_ln <= rhs_ln + LOG_REL_TOL.ln_1p();
                (Backend::Log, if holds { Verdict::Holds } else { Verdict::Inconclusive }, raw_slack)
            }
        };
        BoundReport { bound, lhs, rhs, log_slack, backend, verdict, graph_sha, weights_sha }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "bound": self.bound.name(),
            "lhs_log": json_f64(self.lhs.ln()),
            "rhs_log": json_f64(self.rhs.ln()),
            "log_slack": json_f64(self.log_slack),
            "backend": self.backend.to_string(),
            "verdict": self.verdict.to_string(),
            "graph_sha": self.graph_sha,
            "weights_sha": self.weights_sha,
        });
        if let Some(q) = self.lhs.as_exact() {
            v["lhs_exact"] = json!(format_rational(q));
        }
        if let BoundValue::Exact(r) = &self.rhs {
            v["rhs_factors"] = r
                .factors()
                .iter()
                .map(|(b, root)| json!({"base": format_rational(b), "root": root}))
                .collect::<Vec<_>>()
                .into();
        }
        v
    }
}

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn forced(opts: &EvalOptions, backend: Backend) -> EvalOptions {
    let choice = match backend {
        Backend::Exact => BackendChoice::Exact,
        Backend::Log => BackendChoice::Log,
    };
    opts.clone().backend(choice)
}

/// Runs `eval`; an INCONCLUSIVE log result on rational weights is redone
/// exactly when the budget permits.
fn with_recheck(
    rational: bool,
    opts: &EvalOptions,
    eval: impl Fn(&EvalOptions) -> Result<BoundReport, BoundError>,
) -> Result<BoundReport, BoundError> {
    let report = eval(opts)?;
    if report.verdict == Verdict::Inconclusive && rational && opts.backend != BackendChoice::Exact {
        match eval(&forced(opts, Backend::Exact)) {
            Ok(exact) => return Ok(exact),
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

type Factor = (NonNegValue, u64);

/// `prod_{v in O} factor(v)` for a single certificate. Given both
/// orientations of a symmetric certificate, each connected component takes
/// whichever orientation gives the smaller product there, which is the
/// minimum over all proper bipartitions of `G`.
fn oriented_product(
    g: &Graph,
    certs: &[BiregularCert],
    backend: Backend,
    factor: impl Fn(&BiregularCert, usize) -> Result<Factor, BoundError> + Sync,
) -> Result<BoundValue, BoundError> {
    let factors_of = |cert: &BiregularCert, vs: &[usize]| -> Result<Vec<Factor>, BoundError> {
        vs.par_iter().filter(|&&v| cert.classes().side(v) == Side::O).map(|&v| factor(cert, v)).collect()
    };
    if certs.len() == 1 {
        return Ok(BoundValue::product(factors_of(&certs[0], &certs[0].class_o())?, backend));
    }
    let mut chosen = Vec::new();
    for comp in g.components() {
        let mut best: Option<(BoundValue, Vec<Factor>)> = None;
        for cert in certs {
            let fs = factors_of(cert, &comp)?;
            let value = BoundValue::product(fs.clone(), backend);
            if best.as_ref().is_none_or(|(b, _)| value.compare(b) == Ordering::Less) {
                best = Some((value, fs));
            }
        }
        chosen.extend(best.expect("at least one certificate").1);
    }
    Ok(BoundValue::product(chosen, backend))
}

fn theorem3_rhs(
    g: &Graph,
    w: &WeightSystem,
    certs: &[BiregularCert],
    backend: Backend,
    opts: &EvalOptions,
) -> Result<BoundValue, BoundError> {
    oriented_product(g, certs, backend, |cert, v| {
        let inst = restrict_to_kab(g, w, cert, v)?;
        Ok((partition_kab_in(&inst, backend, opts)?, cert.a as u64))
    })
}

fn theorem3_eval(
    g: &Graph,
    w: &WeightSystem,
    certs: &[BiregularCert],
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    w.check_graph(g)?;
    let (a, b) = (certs[0].a, certs[0].b);
    let backend = opts.resolve(w, partition_cost(g, w.m()).max(kab_cost(a, b, w.m())))?;
    let lhs = partition_function_in(g, w, backend, opts)?;
    let rhs = theorem3_rhs(g, w, certs, backend, opts)?;
    Ok(BoundReport::judge(BoundKind::Thm3, lhs, rhs, g.sha256(), Some(w.sha256())))
}

/// `Z^W(G) <= prod_{v in O} Z^{W^v}(K_{a,b})^(1/a)`. With `a = b` every
/// component is evaluated in both orientations and the smaller side is kept.
pub fn theorem3_bound(g: &Graph, w: &WeightSystem, opts: &EvalOptions) -> Result<BoundReport, BoundError> {
    let certs = certify(g)?.orientations();
    with_recheck(w.is_exact(), opts, |o| theorem3_eval(g, w, &certs, o))
}

/// [`theorem3_bound`] for one fixed certificate (orientation and neighbour order).
pub fn theorem3_with_cert(
    g: &Graph,
    w: &WeightSystem,
    cert: &BiregularCert,
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    with_recheck(w.is_exact(), opts, |o| theorem3_eval(g, w, std::slice::from_ref(cert), o))
}

/// Digest identifying a list instance `(H, L)`.
pub fn list_instance_sha(h: &Graph, lists: &ListAssignment) -> String {
    let mut hasher = Sha256::new();
    hasher.update(h.to_text().as_bytes());
    hasher.update(lists.to_text().as_bytes());
    hex::encode(hasher.finalize())
}

fn count_value(n: u128) -> NonNegValue {
    NonNegValue::exact(rational_from_biguint(BigUint::from(n)))
}

/// `prod_{v in O} |Hom^{L^v}(K_{a,b}, H)|^(1/a)` for one certificate.
pub fn theorem4_rhs(
    h: &Graph,
    lists: &ListAssignment,
    cert: &BiregularCert,
    opts: &EvalOptions,
) -> Result<BoundValue, BoundError> {
    let factors = cert
        .class_o()
        .par_iter()
        .map(|&v| theorem4_factor(h, lists, cert, v, opts))
        .collect::<Result<Vec<_>, BoundError>>()?;
    Ok(BoundValue::product(factors, Backend::Exact))
}

fn theorem4_factor(
    h: &Graph,
    lists: &ListAssignment,
    cert: &BiregularCert,
    v: usize,
    opts: &EvalOptions,
) -> Result<Factor, BoundError> {
    let l = restrict_lists_to_kab(lists, cert, v);
    Ok((count_value(count_list_homs(&kab_graph(cert.a, cert.b), h, &l, opts.budget)?), cert.a as u64))
}

fn theorem4_eval(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    certs: &[BiregularCert],
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    let lhs = count_value(count_list_homs(g, h, lists, opts.budget)?);
    let rhs = oriented_product(g, certs, Backend::Exact, |cert, v| theorem4_factor(h, lists, cert, v, opts))?;
    Ok(BoundReport::judge(BoundKind::Thm4, lhs, rhs, g.sha256(), Some(list_instance_sha(h, lists))))
}

/// `|Hom^L(G,H)| <= prod_{v in O} |Hom^{L^v}(K_{a,b},H)|^(1/a)`, in exact
/// integer arithmetic. With `a = b` orientations are chosen per component.
pub fn theorem4_bound(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    let certs = certify(g)?.orientations();
    theorem4_eval(g, h, lists, &certs, opts)
}

pub fn theorem4_with_cert(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    cert: &BiregularCert,
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    theorem4_eval(g, h, lists, std::slice::from_ref(cert), opts)
}

/// `prod_i (sum_x |C^x(A_i,B_i)|^(t1/t2))^(1/t1)` without checking the
/// covering conditions. Exact when `t2` divides `t1` (unless LOG is forced).
pub fn theorem5_value(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    fam: &CoverFamilyPair,
    opts: &EvalOptions,
) -> Result<BoundValue, BoundError> {
    if fam.t1 == 0 || fam.t2 == 0 {
        return Err(CoverError::ZeroMultiplicity.into());
    }
    if lists.len() != g.n() {
        return Err(crate::lists::ListError::WrongLength { given: lists.len(), n: g.n() }.into());
    }
    for (a, b) in &fam.pairs {
        if let Some(&v) = a.iter().chain(b).find(|&&v| v >= g.n()) {
            return Err(CoverError::OutOfRange(v).into());
        }
        if let Some(&v) = a.iter().find(|v| b.contains(v)) {
            return Err(BoundError::Unsupported(format!("vertex {v} lies in both A_i and B_i")));
        }
    }
    let space: f64 =
        fam.pairs.iter().map(|(a, _)| a.iter().map(|&v| lists.get(v).len() as f64).product::<f64>()).sum();
    if space > opts.budget as f64 {
        return Err(CountError::Budget { size: space, budget: opts.budget }.into());
    }
    let integral = fam.t1.is_multiple_of(fam.t2);
    let backend = match opts.backend {
        BackendChoice::Log => Backend::Log,
        _ if integral => Backend::Exact,
        BackendChoice::Exact => {
            return Err(BoundError::Unsupported(format!(
                "exponent {}/{} is not an integer; use the LOG backend",
                fam.t1, fam.t2
            )))
        }
        BackendChoice::Auto => Backend::Log,
    };
    let factors: Vec<(NonNegValue, u64)> = fam
        .pairs
        .par_iter()
        .map(|(a, b)| {
            let sum = match backend {
                Backend::Exact => {
                    let k = (fam.t1 / fam.t2) as u32;
                    let mut s = BigUint::from(0u32);
                    for_each_extension(g, h, lists, a, b, |c| s += Pow::pow(BigUint::from(c), k));
                    NonNegValue::exact(rational_from_biguint(s))
                }
                Backend::Log => {
                    let p = fam.t1 as f64 / fam.t2 as f64;
                    let mut acc = LogSumExp::default();
                    for_each_extension(g, h, lists, a, b, |c| {
                        acc.push(LogWeight::from_ln(p * (c as f64).ln()));
                    });
                    NonNegValue::Log(acc.finish())
                }
            };
            (sum, fam.t1 as u64)
        })
        .collect();
    Ok(BoundValue::product(factors, backend))
}

/// `|Hom^L(G,H)| <= theorem5_value(...)`, after checking that the families
/// cover each class vertex the required number of times.
pub fn theorem5_bound(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    fam: &CoverFamilyPair,
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    let classes = classes_from_families(g, fam)?;
    fam.validate(&classes)?;
    let rhs = theorem5_value(g, h, lists, fam, opts)?;
    let lhs = count_value(count_list_homs(g, h, lists, opts.budget)?);
    let mut hasher = Sha256::new();
    hasher.update(list_instance_sha(h, lists).as_bytes());
    hasher.update(fam.to_text().as_bytes());
    Ok(BoundReport::judge(BoundKind::Thm5, lhs, rhs, g.sha256(), Some(hex::encode(hasher.finalize()))))
}

fn require_no_isolated(g: &Graph) -> Result<(), BoundError> {
    match (0..g.n()).find(|&v| g.degree(v) == 0) {
        Some(v) => Err(GraphError::IsolatedVertex(v).into()),
        None => Ok(()),
    }
}

fn conjecture1_eval(g: &Graph, w: &WeightSystem, opts: &EvalOptions) -> Result<BoundReport, BoundError> {
    let m = w.m();
    let edge_cost = g.edges().iter().map(|&(u, v)| kab_cost(g.degree(u), g.degree(v), m)).fold(0.0, f64::max);
    let backend = opts.resolve(w, partition_cost(g, m).max(edge_cost))?;
    let lhs = partition_function_in(g, w, backend, opts)?;
    let factors = g
        .edges()
        .par_iter()
        .map(|&(u, v)| {
            let inst = restrict_to_edge(g, w, u, v)?;
            Ok((partition_kab_in(&inst, backend, opts)?, (g.degree(u) * g.degree(v)) as u64))
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    let rhs = BoundValue::product(factors, backend);
    Ok(BoundReport::judge(BoundKind::Conj1, lhs, rhs, g.sha256(), Some(w.sha256())))
}

/// `Z^W(G) <= prod_{uv in E} Z^{W^{uv}}(K_{d(u),d(v)})^(1/(d(u)d(v)))` for
/// weight systems whose edge tables all coincide.
pub fn conjecture1_bound(g: &Graph, w: &WeightSystem, opts: &EvalOptions) -> Result<BoundReport, BoundError> {
    w.check_graph(g)?;
    require_no_isolated(g)?;
    if !w.has_uniform_edges() {
        return Err(WeightError::NonUniformEdgeWeights.into());
    }
    with_recheck(w.is_exact(), opts, |o| conjecture1_eval(g, w, o))
}

/// `|Hom^L(G,H)| <= prod_{uv in E} |Hom^{L^{uv}}(K_{d(u),d(v)},H)|^(1/(d(u)d(v)))`.
pub fn conjecture2_bound(
    g: &Graph,
    h: &Graph,
    lists: &ListAssignment,
    opts: &EvalOptions,
) -> Result<BoundReport, BoundError> {
    require_no_isolated(g)?;
    let lhs = count_value(count_list_homs(g, h, lists, opts.budget)?);
    let factors = g
        .edges()
        .par_iter()
        .map(|&(u, v)| {
            let (du, dv) = (g.degree(u), g.degree(v));
            let l = restrict_lists_to_edge(g, lists, u, v);
            Ok((count_value(count_list_homs(&kab_graph(du, dv), h, &l, opts.budget)?), (du * dv) as u64))
        })
        .collect::<Result<Vec<_>, BoundError>>()?;
    let rhs = BoundValue::product(factors, Backend::Exact);
    Ok(BoundReport::judge(BoundKind::Conj2, lhs, rhs, g.sha256(), Some(list_instance_sha(h, lists))))
}

/// `|I(K_{p,q})| = 2^p + 2^q - 1`.
pub fn kab_independent_sets(p: usize, q: usize) -> BigUint {
    (BigUint::one() << p) + (BigUint::one() << q) - 1u32
}

fn independent_sets(g: &Graph) -> Result<NonNegValue, BoundError> {
    if g.n() > 64 {
        return Err(BoundError::Unsupported(format!("independent-set count on {} > 64 vertices", g.n())));
    }
    Ok(count_value(count_independent_sets(g)))
}

/// `|I(G)| <= (2^(d+1) - 1)^(N/2d)` for `d`-regular bipartite `G`.
pub fn kahn_ind(g: &Graph) -> Result<BoundReport, BoundError> {
    bipartition(g)?;
    let d = g.regular_degree()?;
    require_no_isolated(g)?;
    let base = Pow::pow(kab_independent_sets(d, d), g.n() as u32);
    let rhs = BoundValue::Exact(RadicalProduct::single(rational_from_biguint(base), 2 * d as u64));
    Ok(BoundReport::judge(BoundKind::Ind, independent_sets(g)?, rhs, g.sha256(), None))
}

/// `|I(G)| <= prod_{uv in E} (2^d(u) + 2^d(v) - 1)^(1/(d(u)d(v)))`.
pub fn kahn_ind_conj(g: &Graph) -> Result<BoundReport, BoundError> {
    require_no_isolated(g)?;
    let mut rhs = RadicalProduct::new();
    for &(u, v) in g.edges() {
        let (du, dv) = (g.degree(u), g.degree(v));
        rhs.push(rational_from_biguint(kab_independent_sets(du, dv)), (du * dv) as u64);
    }
    Ok(BoundReport::judge(BoundKind::IndConj, independent_sets(g)?, BoundValue::Exact(rhs), g.sha256(), None))
}

/// Both independent-set bounds; the first fails on graphs that are not
/// regular bipartite.
pub fn kahn_bounds(g: &Graph) -> (Result<BoundReport, BoundError>, Result<BoundReport, BoundError>) {
    (kahn_ind(g), kahn_ind_conj(g))
}

/// `F = ln Z / N` for the zero-field antiferromagnetic Ising model against
/// `beta d / 2 <= F <= beta d / 2 + ln 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeEnergyReport {
    pub n: usize,
    pub d: usize,
    pub beta: f64,
    pub log_z: f64,
    pub f: f64,
    pub lower: f64,
    pub upper: f64,
    pub in_bounds: bool,
}

impl FreeEnergyReport {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n,
            "d": self.d,
            "beta": self.beta,
            "log_z": json_f64(self.log_z),
            "F": json_f64(self.f),
            "lower": self.lower,
            "upper": self.upper,
            "in_bounds": self.in_bounds,
            "backend": Backend::Log.to_string(),
        })
    }
}

pub fn ising_free_energy_check(g: &Graph, beta: f64, opts: &EvalOptions) -> Result<FreeEnergyReport, BoundError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(BoundError::Beta(beta));
    }
    bipartition(g)?;
    let d = g.regular_degree()?;
    let w = make_ising(g, beta, 0.0);
    let log_z = partition_brute(g, &w, &forced(opts, Backend::Log))?.ln();
    let n = g.n();
    let f = log_z / n as f64;
    let lower = beta * d as f64 / 2.0;
    let upper = lower + std::f64::consts::LN_2;
    let in_bounds = f >= lower * (1.0 - LOG_REL_TOL) && f <= upper * (1.0 + LOG_REL_TOL);
    Ok(FreeEnergyReport { n, d, beta, log_z, f, lower, upper, in_bounds })
}

/// The exact value of a radical product as a float, for display.
pub fn approx(v: &BoundValue) -> f64 {
    v.ln().exp()
}

/// `base^(1/root)` as an exact right-hand side.
pub fn radical(base: BigRational, root: u64) -> BoundValue {
    BoundValue::Exact(RadicalProduct::single(base, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_hardcore_uniform, KabInstance};

    fn int(n: u64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn c6_hardcore_theorem3() {
        let g = Graph::cycle(6);
        let r = theorem3_bound(&g, &make_hardcore_uniform(&g, NonNegValue::one()), &EvalOptions::exact()).unwrap();
        assert_eq!(r.lhs, NonNegValue::from_integer(18));
        assert_eq!(r.rhs.compare(&radical(int(343), 2)), Ordering::Equal);
        assert!((approx(&r.rhs) - 18.5203).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.log_slack > 0.0);
    }

    #[test]
    fn kab_is_tight_for_theorem3() {
        let g = kab_graph(3, 2);
        let mut w = WeightSystem::ones(&g, 2);
        w.set_vertex(0, 1, NonNegValue::ratio(3, 7));
        w.set_edge(1, 0, 1, NonNegValue::ratio(5, 2));
        let r = theorem3_bound(&g, &w, &EvalOptions::exact()).unwrap();
        assert_eq!(r.log_slack, 0.0);
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn theorem3_rejects_non_bipartite() {
        let g = Graph::complete(3);
        let err = theorem3_bound(&g, &WeightSystem::ones(&g, 2), &EvalOptions::exact()).unwrap_err();
        assert!(matches!(err, BoundError::Graph(GraphError::NotBipartite { .. })));
    }

    #[test]
    fn theorem4_c6_into_triangle() {
        let g = Graph::cycle(6);
        let h = Graph::complete(3);
        let r = theorem4_bound(&g, &h, &ListAssignment::full(6, 3), &EvalOptions::default()).unwrap();
        assert_eq!(r.lhs, NonNegValue::from_integer(66));
        assert_eq!(r.rhs.compare(&radical(int(18 * 18 * 18), 2)), Ordering::Equal);
        assert!((approx(&r.rhs) - 76.37).abs() < 0.01);
        let mut lists = ListAssignment::full(6, 3);
        lists.set(2, vec![]).unwrap();
        let r = theorem4_bound(&g, &h, &lists, &EvalOptions::default()).unwrap();
        assert!(r.lhs.is_zero());
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn theorem5_neighbourhoods_equal_theorem4_rhs() {
        let g = Graph::cycle(6);
        let h = Graph::complete(3);
        let lists = ListAssignment::full(6, 3);
        let cert = certify(&g).unwrap();
        let fam = CoverFamilyPair::neighborhoods(&g, &cert);
        let t5 = theorem5_value(&g, &h, &lists, &fam, &EvalOptions::default()).unwrap();
        let t4 = theorem4_with_cert(&g, &h, &lists, &cert, &EvalOptions::default()).unwrap();
        assert_eq!(t5.compare(&t4.rhs), Ordering::Equal);
    }

    #[test]
    fn theorem5_trivial_families() {
        let g = Graph::cycle(4);
        let h = Graph::complete(3);
        let mut lists = ListAssignment::full(4, 3);
        lists.set(0, vec![0, 1]).unwrap();
        let bp = bipartition(&g).unwrap();
        let (e, o) = (bp.class_e(), bp.class_o());
        // B_i empty: each factor is the number of list tuples on A_i.
        let fam = CoverFamilyPair { pairs: vec![(vec![e[0]], vec![]), (vec![e[1]], vec![])], t1: 1, t2: 1 };
        let v = theorem5_value(&g, &h, &lists, &fam, &EvalOptions::default()).unwrap();
        assert_eq!(v.compare(&radical(int(6), 1)), Ordering::Equal);
        // A single pair (E, O) sums the homomorphisms by their restriction to E.
        let fam = CoverFamilyPair { pairs: vec![(e, o)], t1: 1, t2: 1 };
        let r = theorem5_bound(&g, &h, &lists, &fam, &EvalOptions::default()).unwrap();
        assert_eq!(r.log_slack, 0.0);
        assert_eq!(r.lhs, NonNegValue::from_integer(count_list_homs(&g, &h, &lists, 1 << 20).unwrap() as u64));
    }

    #[test]
    fn theorem5_fractional_exponent_uses_log() {
        let g = Graph::cycle(4);
        let h = Graph::complete(3);
        let lists = ListAssignment::full(4, 3);
        let bp = bipartition(&g).unwrap();
        let (e, o) = (bp.class_e(), bp.class_o());
        let fam = CoverFamilyPair { pairs: vec![(e.clone(), o.clone()), (e, o)], t1: 2, t2: 2 };
        let r = theorem5_bound(&g, &h, &lists, &fam, &EvalOptions::default()).unwrap();
        assert_eq!(r.backend, Backend::Exact);
        let fam = CoverFamilyPair { t2: 3, ..fam };
        let shortfall = theorem5_bound(&g, &h, &lists, &fam, &EvalOptions::default()).unwrap_err();
        assert!(matches!(shortfall, BoundError::Cover(CoverError::Shortfall { needed: 3, .. })));
        let fam = CoverFamilyPair { t1: 3, t2: 2, pairs: vec![fam.pairs[0].clone(); 3] };
        let r = theorem5_bound(&g, &h, &lists, &fam, &EvalOptions::default()).unwrap();
        assert_eq!(r.backend, Backend::Log);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(theorem5_value(&g, &h, &lists, &fam, &EvalOptions::exact()).is_err());
    }

    #[test]
    fn conjecture1_examples() {
        let g = Graph::cycle(6);
        let w = make_hardcore_uniform(&g, NonNegValue::one());
        let c1 = conjecture1_bound(&g, &w, &EvalOptions::exact()).unwrap();
        let t3 = theorem3_bound(&g, &w, &EvalOptions::exact()).unwrap();
        assert_eq!(c1.rhs.compare(&t3.rhs), Ordering::Equal);
        let k3 = Graph::complete(3);
        let r = conjecture1_bound(&k3, &make_hardcore_uniform(&k3, NonNegValue::one()), &EvalOptions::exact()).unwrap();
        assert_eq!(r.lhs, NonNegValue::from_integer(4));
        assert!((approx(&r.rhs) - 4.3035).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Holds);
        let union = kab_graph(2, 3).disjoint_union(&kab_graph(1, 2));
        let r = conjecture1_bound(&union, &make_hardcore_uniform(&union, NonNegValue::one()), &EvalOptions::exact())
            .unwrap();
        assert_eq!(r.log_slack, 0.0);
    }

    #[test]
    fn conjecture1_fails_for_ferromagnetic_triangle() {
        // Only monochromatic maps survive: Z(K_3) = 2 while each edge factor is 2^(1/4).
        let k3 = Graph::complete(3);
        let mut w = WeightSystem::ones(&k3, 2);
        w.set_all_edges(&[
            vec![NonNegValue::one(), NonNegValue::zero()],
            vec![NonNegValue::zero(), NonNegValue::one()],
        ]);
        let r = conjecture1_bound(&k3, &w, &EvalOptions::exact()).unwrap();
        assert_eq!(r.lhs, NonNegValue::from_integer(2));
        assert_eq!(r.rhs.compare(&radical(int(8), 4)), Ordering::Equal);
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.log_slack < 0.0);
    }

    #[test]
    fn conjecture1_rejects_non_uniform_and_isolated() {
        let g = Graph::path(3);
        let mut w = WeightSystem::ones(&g, 2);
        w.set_edge(0, 0, 0, NonNegValue::ratio(1, 2));
        assert!(matches!(
            conjecture1_bound(&g, &w, &EvalOptions::exact()),
            Err(BoundError::Weight(WeightError::NonUniformEdgeWeights))
        ));
        let iso = Graph::new(3, [(0, 1)]).unwrap();
        assert!(matches!(
            conjecture1_bound(&iso, &WeightSystem::ones(&iso, 2), &EvalOptions::exact()),
            Err(BoundError::Graph(GraphError::IsolatedVertex(2)))
        ));
    }

    #[test]
    fn conjecture2_examples() {
        let g = Graph::cycle(6);
        let h = Graph::complete(3);
        let lists = ListAssignment::full(6, 3);
        let c2 = conjecture2_bound(&g, &h, &lists, &EvalOptions::default()).unwrap();
        let t4 = theorem4_bound(&g, &h, &lists, &EvalOptions::default()).unwrap();
        assert_eq!(c2.rhs.compare(&t4.rhs), Ordering::Equal);
        let k2 = Graph::path(2);
        let h = Graph::path(4);
        let lists = ListAssignment::new(4, vec![vec![0, 1, 2], vec![1, 3]]).unwrap();
        let r = conjecture2_bound(&k2, &h, &lists, &EvalOptions::default()).unwrap();
        assert_eq!(r.log_slack, 0.0);
    }

    #[test]
    fn kahn_examples() {
        let (ind, conj) = kahn_bounds(&Graph::cycle(6));
        let (ind, conj) = (ind.unwrap(), conj.unwrap());
        assert_eq!(ind.lhs, NonNegValue::from_integer(18));
        assert!((approx(&ind.rhs) - 7f64.powf(1.5)).abs() < 1e-9 * 18.52);
        assert_eq!(ind.rhs.compare(&conj.rhs), Ordering::Equal);
        let r = kahn_ind(&kab_graph(3, 3)).unwrap();
        assert_eq!(r.log_slack, 0.0);
        let (ind, conj) = kahn_bounds(&Graph::complete(3));
        assert!(ind.is_err());
        let conj = conj.unwrap();
        assert_eq!(conj.lhs, NonNegValue::from_integer(4));
        assert!((approx(&conj.rhs) - 7f64.powf(0.75)).abs() < 1e-9 * 4.3);
    }

    #[test]
    fn ising_sandwich_examples() {
        let r = ising_free_energy_check(&Graph::cycle(4), 1.0, &EvalOptions::default()).unwrap();
        let (p, q) = ((-1f64).exp(), 1f64.exp());
        let trace = (p + q).powi(4) + (p - q).powi(4);
        assert!((r.f - trace.ln() / 4.0).abs() < 1e-12);
        assert!((r.f - 1.19942).abs() < 1e-5);
        assert_eq!((r.lower, r.in_bounds), (1.0, true));
        let r = ising_free_energy_check(&Graph::hypercube(3), 1.0, &EvalOptions::default()).unwrap();
        assert!(r.in_bounds && r.lower == 1.5);
        for d in 1..=3 {
            let r = ising_free_energy_check(&kab_graph(d, d), 0.7, &EvalOptions::default()).unwrap();
            let dd = d as f64;
            assert!(r.f * 2.0 * dd <= 2.0 * dd * std::f64::consts::LN_2 + 0.7 * dd * dd + 1e-9);
        }
        assert!(matches!(
            ising_free_energy_check(&Graph::cycle(4), -1.0, &EvalOptions::default()),
            Err(BoundError::Beta(_))
        ));
        assert!(ising_free_energy_check(&Graph::path(3), 1.0, &EvalOptions::default()).is_err());
    }

    #[test]
    fn log_backend_never_violates() {
        let k3 = Graph::complete(3);
        let mut w = WeightSystem::ones(&k3, 2);
        w.set_all_edges(&[
            vec![NonNegValue::one(), NonNegValue::zero()],
            vec![NonNegValue::zero(), NonNegValue::one()],
        ]);
        let log = conjecture1_eval(&k3, &w, &EvalOptions::log()).unwrap();
        assert_eq!(log.verdict, Verdict::Inconclusive);
        // The public entry point re-checks rational instances exactly.
        let rechecked = conjecture1_bound(&k3, &w, &EvalOptions::log()).unwrap();
        assert_eq!((rechecked.backend, rechecked.verdict), (Backend::Exact, Verdict::Violated));
    }

    #[test]
    fn report_json_fields() {
        let r = kahn_ind(&Graph::cycle(6)).unwrap();
        let j = r.to_json();
        for key in ["bound", "lhs_log", "rhs_log", "log_slack", "backend", "verdict", "graph_sha", "weights_sha"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert_eq!(j["lhs_exact"], "18");
        assert_eq!(j["rhs_factors"][0]["root"], 4);
        let zero = BoundReport::judge(
            BoundKind::Thm4,
            NonNegValue::zero(),
            radical(int(3), 1),
            String::new(),
            None,
        );
        assert_eq!(zero.to_json()["log_slack"], "inf");
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), j);
    }

    #[test]
    fn restricted_kab_factor_matches_direct_partition() {
        let g = Graph::cycle(6);
        let w = make_hardcore_uniform(&g, NonNegValue::ratio(2, 3));
        let cert = certify(&g).unwrap();
        let v = cert.class_o()[0];
        let inst: KabInstance = restrict_to_kab(&g, &w, &cert, v).unwrap();
        let fast = partition_kab_in(&inst, Backend::Exact, &EvalOptions::default()).unwrap();
        let slow = partition_brute(&inst.graph, &inst.weights, &EvalOptions::exact()).unwrap();
        assert_eq!(fast, slow);
    }
}

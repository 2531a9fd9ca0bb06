//! Bulk evaluation of bounds over enumerated graphs and sampled instances.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::enumerate::{enumerate_graphs, EnumerateError, GraphFilter};
use super::sample::{sample_list_instance, WeightKind, WeightSampler};
use crate::bounds::{
    conjecture1_bound, conjecture2_bound, json_f64, kahn_ind, kahn_ind_conj, theorem3_bound, theorem4_bound,
    theorem5_bound, BoundError, BoundKind, BoundReport, Verdict,
};
use crate::count::{BackendChoice, EvalOptions, DEFAULT_BUDGET};
use crate::derive_seed;
use crate::graph::{certify, parse_graph, Graph, ParseError};
use crate::lists::{parse_families, parse_lists, CoverFamilyPair};
use crate::value::Backend;
use crate::weights::{parse_weights, WeightError};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: line {}: {}", .error.line, .error.kind)]
    Parse { path: String, error: ParseError },
    #[error("invalid campaign config: {0}")]
    Config(String),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error("witness does not re-evaluate: {0}")]
    Recheck(String),
}

fn io_err(path: &Path, e: std::io::Error) -> CampaignError {
    CampaignError::Io { path: path.display().to_string(), message: e.to_string() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSource {
    Biregular,
    Bipartite,
    All,
    Files,
}

/// Campaign configuration, read from TOML. Keys:
///
/// | key | meaning | default |
/// |---|---|---|
/// | `source` | `biregular`, `bipartite`, `all` or `files` | `all` |
/// | `n_max` | largest vertex count to enumerate | 6 |
/// | `a`, `b` | degrees for `source = "biregular"` | required there |
/// | `connected` | keep connected graphs only | `true` |
/// | `files` | graph files for `source = "files"` | `[]` |
/// | `m` | number of spins | 2 |
/// | `cap` | numerator/denominator cap | 8 |
/// | `allow_zero` | zero entries with probability 1/8 | `false` |
/// | `weights` | `general`, `uniform_edge`, `hardcore`, `hardcore_uniform` | `general` |
/// | `bounds` | bound names to evaluate | `["thm3"]` |
/// | `trials` | sampled instances per graph | 10 |
/// | `seed` | master seed | 0 |
/// | `h_n` | target graph order for list bounds | 3 |
/// | `backend` | `exact`, `log` or `auto` | `auto` |
/// | `budget` | enumeration budget per evaluation | 10^8 |
/// | `output` | report path; summary and witnesses are written beside it | none |
/// | `witness_dir` | directory for violation witnesses | `<output stem>_witnesses` |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub source: GraphSource,
    pub n_max: usize,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub connected: bool,
    pub files: Vec<String>,
    pub m: usize,
    pub cap: u64,
    pub allow_zero: bool,
    pub weights: WeightKind,
    pub bounds: Vec<BoundKind>,
    pub trials: usize,
    pub seed: u64,
    pub h_n: usize,
    pub backend: BackendChoice,
    pub budget: u64,
    pub output: Option<String>,
    pub witness_dir: Option<String>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            source: GraphSource::All,
            n_max: 6,
            a: None,
            b: None,
            connected: true,
            files: Vec::new(),
            m: 2,
            cap: 8,
            allow_zero: false,
            weights: WeightKind::General,
            bounds: vec![BoundKind::Thm3],
            trials: 10,
            seed: 0,
            h_n: 3,
            backend: BackendChoice::Auto,
            budget: DEFAULT_BUDGET,
            output: None,
            witness_dir: None,
        }
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self, CampaignError> {
        let cfg: CampaignConfig = toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative `files`, `output` and `witness_dir`
    /// entries are resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            CampaignError::Config(m) => CampaignError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &String| base.join(p).display().to_string();
        cfg.files = cfg.files.iter().map(resolve).collect();
        cfg.output = cfg.output.as_ref().map(resolve);
        cfg.witness_dir = cfg.witness_dir.as_ref().map(resolve);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |m: &str| Err(CampaignError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.m == 0 || self.cap == 0 || self.h_n == 0 {
            return bad("m, cap and h_n must be at least 1");
        }
        if self.bounds.is_empty() {
            return bad("no bounds to evaluate");
        }
        if self.source == GraphSource::Biregular && (self.a.is_none() || self.b.is_none()) {
            return bad("source = \"biregular\" needs both `a` and `b`");
        }
        let ceiling = match self.source {
            GraphSource::Biregular => super::enumerate::MAX_BIREGULAR_N,
            GraphSource::Files => usize::MAX,
            _ => super::enumerate::MAX_GENERAL_N,
        };
        if self.n_max > ceiling {
            return Err(EnumerateError::Ceiling { n_max: self.n_max, ceiling, filter: self.filter_name() }.into());
        }
        Ok(())
    }

    fn filter_name(&self) -> String {
        match self.source {
            GraphSource::Files => "files".into(),
            _ => self.filter().to_string(),
        }
    }

    fn filter(&self) -> GraphFilter {
        match self.source {
            GraphSource::Biregular => GraphFilter::Biregular { a: self.a.unwrap_or(0), b: self.b.unwrap_or(0) },
            GraphSource::Bipartite => GraphFilter::Bipartite,
            GraphSource::All | GraphSource::Files => GraphFilter::All,
        }
    }

    pub fn options(&self) -> EvalOptions {
        EvalOptions::with_budget(self.budget).backend(self.backend)
    }

    /// The graphs the campaign runs over, in campaign order.
    pub fn graphs(&self) -> Result<Vec<Graph>, CampaignError> {
        if self.source == GraphSource::Files {
            return self
                .files
                .iter()
                .map(|f| {
                    let path = Path::new(f);
                    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                    parse_graph(&text).map_err(|error| CampaignError::Parse { path: f.clone(), error })
                })
                .collect();
        }
        Ok(enumerate_graphs(self.n_max, self.filter(), self.connected)?)
    }
}

/// Everything needed to re-evaluate one instance standalone, in the file
/// formats of the graph, weight, list and family parsers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub bound: BoundKind,
    pub graph_index: usize,
    pub trial: usize,
    pub graph: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lists: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub families: Option<String>,
    pub report: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub graph_index: usize,
    pub trial: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundAggregate {
    pub bound: BoundKind,
    pub evaluated: usize,
    pub holds: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub skipped: usize,
    pub exact: usize,
    pub min_log_slack: Option<f64>,
    /// `(graph index, trial)` attaining [`Self::min_log_slack`].
    pub min_witness: Option<(usize, usize)>,
    /// Graphs with an EXACT instance where both sides are equal and positive.
    pub equality_graphs: BTreeSet<usize>,
    pub violations: Vec<ViolationRecord>,
    pub errors: Vec<ErrorRecord>,
    pub runtime: Duration,
}

impl BoundAggregate {
    fn new(bound: BoundKind) -> Self {
        BoundAggregate {
            bound,
            evaluated: 0,
            holds: 0,
            violated: 0,
            inconclusive: 0,
            skipped: 0,
            exact: 0,
            min_log_slack: None,
            min_witness: None,
            equality_graphs: BTreeSet::new(),
            violations: Vec::new(),
            errors: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "evaluated": self.evaluated,
            "holds": self.holds,
            "violated": self.violated,
            "inconclusive": self.inconclusive,
            "skipped": self.skipped,
            "exact": self.exact,
            "errors": self.errors.len(),
            "min_log_slack": self.min_log_slack.map(json_f64),
            "min_witness": self.min_witness.map(|(g, t)| json!({"graph_index": g, "trial": t})),
            "equality_graphs": self.equality_graphs,
            "violations": self.violations,
            "error_records": self.errors.iter().map(|e| json!({
                "graph_index": e.graph_index, "trial": e.trial, "message": e.message,
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub graphs: Vec<Graph>,
    pub bounds: Vec<BoundAggregate>,
    pub runtime: Duration,
}

impl CampaignReport {
    pub fn instances(&self) -> usize {
        self.bounds.iter().map(|b| b.evaluated).sum()
    }

    pub fn violations(&self) -> usize {
        self.bounds.iter().map(|b| b.violated).sum()
    }

    pub fn bound(&self, kind: BoundKind) -> Option<&BoundAggregate> {
        self.bounds.iter().find(|b| b.bound == kind)
    }

    /// The report; everything except the `timing` object is a deterministic
    /// function of the config.
    pub fn to_json(&self) -> Value {
        let bounds: serde_json::Map<String, Value> =
            self.bounds.iter().map(|b| (b.bound.name().to_string(), b.to_json())).collect();
        let timing: serde_json::Map<String, Value> =
            self.bounds.iter().map(|b| (b.bound.name().to_string(), json!(b.runtime.as_secs_f64()))).collect();
        json!({
            "config": self.config,
            "graph_count": self.graphs.len(),
            "instances": self.instances(),
            "violations": self.violations(),
            "graphs": self.graphs.iter().enumerate().map(|(i, g)| json!({
                "index": i, "n": g.n(), "edges": g.edge_count(), "sha": g.sha256(),
            })).collect::<Vec<_>>(),
            "bounds": bounds,
            "timing": {"total_seconds": self.runtime.as_secs_f64(), "bound_seconds": timing},
        })
    }

    /// Fixed-width table, one row per bound.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<8} {:>9} {:>9} {:>8} {:>12} {:>8} {:>6} {:>14}",
            "bound", "evaluated", "holds", "violated", "inconclusive", "skipped", "errors", "min_log_slack"
        );
        for b in &self.bounds {
            let slack = b.min_log_slack.map_or("-".to_string(), |x| format!("{x:.6e}"));
            let _ = writeln!(
                s,
                "{:<8} {:>9} {:>9} {:>8} {:>12} {:>8} {:>6} {:>14}",
                b.bound.name(),
                b.evaluated,
                b.holds,
                b.violated,
                b.inconclusive,
                b.skipped,
                b.errors.len(),
                slack
            );
        }
        let _ = writeln!(s, "graphs: {}  instances: {}  violations: {}", self.graphs.len(), self.instances(), self.violations());
        s
    }
}

enum Outcome {
    Report(BoundReport, Box<ViolationRecord>),
    Skipped,
    Error(String),
}

fn is_precondition(e: &BoundError) -> bool {
    matches!(e, BoundError::Graph(_) | BoundError::Weight(WeightError::NonUniformEdgeWeights))
}

fn evaluate(
    kind: BoundKind,
    cfg: &CampaignConfig,
    g: &Graph,
    gi: usize,
    trial: usize,
    trial_seed: u64,
    opts: &EvalOptions,
) -> Outcome {
    let mut rec = ViolationRecord {
        bound: kind,
        graph_index: gi,
        trial,
        graph: g.to_text(),
        weights: None,
        target: None,
        lists: None,
        families: None,
        report: Value::Null,
    };
    let result = match kind {
        BoundKind::Thm3 | BoundKind::Conj1 => {
            let sampler = WeightSampler::new(cfg.cap, cfg.allow_zero, cfg.weights);
            let w = sampler.sample(g, cfg.m, derive_seed(trial_seed, 0));
            rec.weights = Some(w.to_text());
            if kind == BoundKind::Thm3 {
                theorem3_bound(g, &w, opts)
            } else {
                conjecture1_bound(g, &w, opts)
            }
        }
        BoundKind::Thm4 | BoundKind::Thm5 | BoundKind::Conj2 => {
            let (h, lists) = sample_list_instance(g.n(), cfg.h_n, derive_seed(trial_seed, 1));
            rec.target = Some(h.to_text());
            rec.lists = Some(lists.to_text());
            match kind {
                BoundKind::Thm4 => theorem4_bound(g, &h, &lists, opts),
                BoundKind::Conj2 => conjecture2_bound(g, &h, &lists, opts),
                _ => certify(g).map_err(BoundError::from).and_then(|cert| {
                    let fam = CoverFamilyPair::neighborhoods(g, &cert);
                    rec.families = Some(fam.to_text());
                    theorem5_bound(g, &h, &lists, &fam, opts)
                }),
            }
        }
        BoundKind::Ind => kahn_ind(g),
        BoundKind::IndConj => kahn_ind_conj(g),
    };
    match result {
        Ok(r) => {
            rec.report = r.to_json();
            Outcome::Report(r, Box::new(rec))
        }
        Err(e) if is_precondition(&e) => Outcome::Skipped,
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Runs every configured bound on every graph and sampled instance.
///
/// Instance `t` of graph `i` is drawn from `derive_seed(derive_seed(seed, i), t)`.
/// The independent-set bounds have no random input and run once per graph.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, CampaignError> {
    cfg.validate()?;
    let start = Instant::now();
    let graphs = cfg.graphs()?;
    let opts = cfg.options();
    let mut kinds: Vec<BoundKind> = Vec::new();
    for &k in &cfg.bounds {
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    let tasks: Vec<(usize, usize)> = (0..graphs.len()).flat_map(|gi| (0..cfg.trials).map(move |t| (gi, t))).collect();
    let results: Vec<Vec<(Outcome, Duration)>> = tasks
        .par_iter()
        .map(|&(gi, t)| {
            let trial_seed = derive_seed(derive_seed(cfg.seed, gi as u64), t as u64);
            kinds
                .iter()
                .map(|&k| {
                    if matches!(k, BoundKind::Ind | BoundKind::IndConj) && t > 0 {
                        return (Outcome::Skipped, Duration::ZERO);
                    }
                    let t0 = Instant::now();
                    let out = evaluate(k, cfg, &graphs[gi], gi, t, trial_seed, &opts);
                    (out, t0.elapsed())
                })
                .collect()
        })
        .collect();

    let mut aggs: Vec<BoundAggregate> = kinds.iter().map(|&k| BoundAggregate::new(k)).collect();
    for (&(gi, t), row) in tasks.iter().zip(results) {
        for ((out, dt), agg) in row.into_iter().zip(aggs.iter_mut()) {
            agg.runtime += dt;
            let once = matches!(agg.bound, BoundKind::Ind | BoundKind::IndConj);
            match out {
                Outcome::Skipped if once && t > 0 => {}
                Outcome::Skipped => agg.skipped += 1,
                Outcome::Error(message) => agg.errors.push(ErrorRecord { graph_index: gi, trial: t, message }),
                Outcome::Report(r, rec) => {
                    agg.evaluated += 1;
                    if r.backend == Backend::Exact {
                        agg.exact += 1;
                    }
                    match r.verdict {
                        Verdict::Holds => agg.holds += 1,
                        Verdict::Violated => agg.violated += 1,
                        Verdict::Inconclusive => agg.inconclusive += 1,
                    }
                    if agg.min_log_slack.is_none_or(|m| r.log_slack < m) {
                        agg.min_log_slack = Some(r.log_slack);
                        agg.min_witness = Some((gi, t));
                    }
                    if r.backend == Backend::Exact && r.log_slack == 0.0 && !r.lhs.is_zero() {
                        agg.equality_graphs.insert(gi);
                    }
                    if r.verdict == Verdict::Violated {
                        agg.violations.push(*rec);
                    }
                }
            }
        }
    }
    Ok(CampaignReport { config: cfg.clone(), graphs, bounds: aggs, runtime: start.elapsed() })
}

/// Paths written by [`write_campaign`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignOutputs {
    pub report: PathBuf,
    pub summary: PathBuf,
    pub witnesses: Vec<PathBuf>,
}

/// Writes the report JSON to `report_path`, the summary table next to it
/// (`.txt`), and each violation as files `<bound>_<k>.graph` plus
/// `.weights` or `.target`/`.lists`/`.families` in the witness directory.
pub fn write_campaign(report: &CampaignReport, report_path: &Path) -> Result<CampaignOutputs, CampaignError> {
    let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes") + "\n";
    fs::write(report_path, text).map_err(|e| io_err(report_path, e))?;
    let summary = report_path.with_extension("txt");
    fs::write(&summary, report.summary_table()).map_err(|e| io_err(&summary, e))?;
    let mut witnesses = Vec::new();
    if report.violations() > 0 {
        let dir = match &report.config.witness_dir {
            Some(d) => PathBuf::from(d),
            None => {
                let stem = report_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                report_path.with_file_name(format!("{stem}_witnesses"))
            }
        };
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        for agg in &report.bounds {
            for (k, v) in agg.violations.iter().enumerate() {
                let stem = format!("{}_{k}", agg.bound.name());
                let files = [
                    ("graph", Some(&v.graph)),
                    ("weights", v.weights.as_ref()),
                    ("target", v.target.as_ref()),
                    ("lists", v.lists.as_ref()),
                    ("families", v.families.as_ref()),
                ];
                for (ext, body) in files {
                    if let Some(body) = body {
                        let p = dir.join(format!("{stem}.{ext}"));
                        fs::write(&p, body).map_err(|e| io_err(&p, e))?;
                        witnesses.push(p);
                    }
                }
            }
        }
    }
    Ok(CampaignOutputs { report: report_path.to_path_buf(), summary, witnesses })
}

fn parse_at<T>(what: &str, r: Result<T, ParseError>) -> Result<T, CampaignError> {
    r.map_err(|error| CampaignError::Parse { path: what.to_string(), error })
}

/// Re-evaluates a violation record from its texts alone, in the EXACT backend.
pub fn recheck_violation(rec: &ViolationRecord, budget: u64) -> Result<BoundReport, CampaignError> {
    let opts = EvalOptions::with_budget(budget).backend(BackendChoice::Exact);
    let g = parse_at("graph", parse_graph(&rec.graph))?;
    let missing = |what: &str| CampaignError::Recheck(format!("record has no {what}"));
    let list_instance = || -> Result<_, CampaignError> {
        let h = parse_at("target", parse_graph(rec.target.as_deref().ok_or_else(|| missing("target"))?))?;
        let l = parse_at("lists", parse_lists(rec.lists.as_deref().ok_or_else(|| missing("lists"))?, g.n(), h.n()))?;
        Ok((h, l))
    };
    let result = match rec.bound {
        BoundKind::Thm3 | BoundKind::Conj1 => {
            let w = parse_at("weights", parse_weights(rec.weights.as_deref().ok_or_else(|| missing("weights"))?, &g))?;
            if rec.bound == BoundKind::Thm3 {
                theorem3_bound(&g, &w, &opts)
            } else {
                conjecture1_bound(&g, &w, &opts)
            }
        }
        BoundKind::Thm4 => {
            let (h, l) = list_instance()?;
            theorem4_bound(&g, &h, &l, &opts)
        }
        BoundKind::Conj2 => {
            let (h, l) = list_instance()?;
            conjecture2_bound(&g, &h, &l, &opts)
        }
        BoundKind::Thm5 => {
            let (h, l) = list_instance()?;
            let fam =
                parse_at("families", parse_families(rec.families.as_deref().ok_or_else(|| missing("families"))?, g.n()))?;
            theorem5_bound(&g, &h, &l, &fam, &opts)
        }
        BoundKind::Ind => kahn_ind(&g),
        BoundKind::IndConj => kahn_ind_conj(&g),
    };
    result.map_err(|e| CampaignError::Recheck(e.to_string()))
}

/// Violation records from a report written by [`write_campaign`].
pub fn load_violations(report_path: &Path) -> Result<Vec<ViolationRecord>, CampaignError> {
    let text = fs::read_to_string(report_path).map_err(|e| io_err(report_path, e))?;
    let bad = |m: String| CampaignError::Recheck(format!("{}: {m}", report_path.display()));
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let mut out = Vec::new();
    if let Some(bounds) = v["bounds"].as_object() {
        for agg in bounds.values() {
            for rec in agg["violations"].as_array().into_iter().flatten() {
                out.push(serde_json::from_value(rec.clone()).map_err(|e| bad(e.to_string()))?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(toml_text: &str) -> CampaignConfig {
        CampaignConfig::from_toml(toml_text).unwrap()
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = cfg("");
        assert_eq!(c, CampaignConfig::default());
        let c = cfg("source = \"biregular\"\na = 3\nb = 2\nn_max = 10\nbounds = [\"thm3\", \"conj1\"]\nweights = \"uniform_edge\"");
        assert_eq!(c.bounds, vec![BoundKind::Thm3, BoundKind::Conj1]);
        assert!(CampaignConfig::from_toml("trials = 0").is_err());
        assert!(CampaignConfig::from_toml("source = \"biregular\"").is_err());
        assert!(CampaignConfig::from_toml("n_max = 11").is_err());
        assert!(CampaignConfig::from_toml("colour = 3").is_err());
    }

    #[test]
    fn theorem3_campaign_on_cycles_has_no_violations() {
        let c = cfg("source = \"biregular\"\na = 2\nb = 2\nn_max = 8\ntrials = 100\nm = 2\nseed = 1");
        let r = run_campaign(&c).unwrap();
        assert_eq!(r.graphs.len(), 3);
        let agg = r.bound(BoundKind::Thm3).unwrap();
        assert_eq!(agg.evaluated, 300);
        assert_eq!(agg.exact, 300);
        assert_eq!(agg.violated, 0);
        assert_eq!(agg.holds, 300);
        assert!(agg.min_log_slack.unwrap() >= 0.0);
    }

    #[test]
    fn empty_source_gives_empty_report() {
        let r = run_campaign(&cfg("n_max = 0\nbounds = [\"thm3\", \"indconj\"]")).unwrap();
        assert!(r.graphs.is_empty());
        assert_eq!(r.instances(), 0);
        assert_eq!(r.violations(), 0);
    }

    #[test]
    fn report_is_deterministic_apart_from_timing() {
        let c = cfg("n_max = 4\ntrials = 3\nbounds = [\"thm3\", \"conj1\", \"conj2\", \"ind\", \"indconj\"]\nweights = \"uniform_edge\"\nseed = 9");
        let strip = |mut v: Value| {
            v.as_object_mut().unwrap().remove("timing");
            serde_json::to_string(&v).unwrap()
        };
        let a = strip(run_campaign(&c).unwrap().to_json());
        let b = strip(run_campaign(&c).unwrap().to_json());
        assert_eq!(a, b);
    }

    #[test]
    fn independent_set_bounds_run_once_per_graph() {
        let r = run_campaign(&cfg("n_max = 4\ntrials = 5\nbounds = [\"indconj\", \"ind\"]")).unwrap();
        let conj = r.bound(BoundKind::IndConj).unwrap();
        assert_eq!(conj.evaluated, r.graphs.len());
        let ind = r.bound(BoundKind::Ind).unwrap();
        // Only K_2 and C_4 are regular bipartite among connected graphs on <= 4 vertices.
        assert_eq!(ind.evaluated, 2);
        assert_eq!(ind.skipped, r.graphs.len() - 2);
        assert_eq!(conj.violated + ind.violated, 0);
    }

    #[test]
    fn violations_are_written_and_recheck() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("n_max = 3\ntrials = 40\nbounds = [\"conj1\"]\nweights = \"uniform_edge\"\ncap = 4\nallow_zero = true\nseed = 3");
        let r = run_campaign(&c).unwrap();
        let agg = r.bound(BoundKind::Conj1).unwrap();
        assert!(agg.violated > 0, "the triangle admits ferromagnetic counterexamples");
        let out = write_campaign(&r, &dir.path().join("report.json")).unwrap();
        assert!(out.summary.exists());
        assert!(out.witnesses.iter().any(|p| p.extension().unwrap() == "weights"));
        let recs = load_violations(&out.report).unwrap();
        assert_eq!(recs.len(), agg.violated);
        for rec in &recs {
            let again = recheck_violation(rec, DEFAULT_BUDGET).unwrap();
            assert_eq!(again.verdict, Verdict::Violated);
            assert_eq!(again.backend, Backend::Exact);
        }
        let g = parse_graph(&fs::read_to_string(dir.path().join("report_witnesses/conj1_0.graph")).unwrap()).unwrap();
        let w = parse_weights(&fs::read_to_string(dir.path().join("report_witnesses/conj1_0.weights")).unwrap(), &g).unwrap();
        assert_eq!(conjecture1_bound(&g, &w, &EvalOptions::exact()).unwrap().verdict, Verdict::Violated);
    }

    #[test]
    fn files_source_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("c6.graph"), Graph::cycle(6).to_text()).unwrap();
        fs::write(dir.path().join("camp.toml"), "source = \"files\"\nfiles = [\"c6.graph\"]\ntrials = 2\nbounds = [\"thm3\", \"thm4\", \"thm5\"]").unwrap();
        let c = CampaignConfig::load(&dir.path().join("camp.toml")).unwrap();
        let r = run_campaign(&c).unwrap();
        assert_eq!(r.graphs, vec![Graph::cycle(6)]);
        for k in [BoundKind::Thm3, BoundKind::Thm4, BoundKind::Thm5] {
            let agg = r.bound(k).unwrap();
            assert_eq!((agg.evaluated, agg.violated), (2, 0), "{k}");
        }
        fs::write(dir.path().join("bad.toml"), "source = \"files\"\nfiles = [\"nope.graph\"]").unwrap();
        let err = run_campaign(&CampaignConfig::load(&dir.path().join("bad.toml")).unwrap()).unwrap_err();
        assert!(err.to_string().contains("nope.graph"));
    }
}

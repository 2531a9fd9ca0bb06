use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spinbound_core::blowup::{concentration_experiment, samples_text};
use spinbound_core::bounds::{
    conjecture1_bound, conjecture2_bound, ising_free_energy_check, json_f64, kahn_ind, kahn_ind_conj,
    theorem3_bound, theorem4_bound, theorem5_bound,
};
use spinbound_core::count::{count_list_homs, partition_function, DEFAULT_BUDGET};
use spinbound_core::graph::parse_graph;
use spinbound_core::lists::{parse_families, parse_lists};
use spinbound_core::search::{run_campaign, write_campaign, CampaignConfig};
use spinbound_core::value::format_rational;
use spinbound_core::weights::parse_weights;
use spinbound_core::{
    BackendChoice, BoundKind, BoundReport, EvalOptions, Graph, ListAssignment, SpinConfig, Verdict, WeightSystem,
};

const EXIT_ERROR: u8 = 2;
const EXIT_VIOLATED: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "spinbound", version, about = "Partition functions and biregular bounds for spin systems on small graphs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Arithmetic backend: exact, log or auto.
    #[arg(long, global = true, default_value = "auto")]
    backend: BackendChoice,
    /// Largest enumeration (number of configurations) allowed per evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Partition function Z^W(G).
    Compute { graph: PathBuf, weights: PathBuf },
    /// Evaluate one bound: thm3, thm4, thm5, conj1, conj2, ind or indconj.
    Bound {
        bound: BoundKind,
        graph: PathBuf,
        /// Weight file (thm3, conj1).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Target graph H (thm4, thm5, conj2).
        #[arg(long)]
        target: Option<PathBuf>,
        /// List file; every list is V(H) when omitted.
        #[arg(long)]
        lists: Option<PathBuf>,
        /// Covering families (thm5).
        #[arg(long)]
        families: Option<PathBuf>,
    },
    /// Number of list homomorphisms G -> H.
    Listhom {
        graph: PathBuf,
        target: PathBuf,
        #[arg(long)]
        lists: Option<PathBuf>,
    },
    /// Zero-field Ising free energy against its regular-bipartite sandwich.
    Ising {
        graph: PathBuf,
        #[arg(long)]
        beta: f64,
    },
    /// Blow-up concentration experiment for one spin configuration.
    Blowup {
        graph: PathBuf,
        weights: PathBuf,
        /// Blow-up scale C.
        #[arg(long = "scale", short = 'C')]
        c: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Spin configuration as 1-based spins, comma separated; all 1 by default.
        #[arg(long)]
        config: Option<String>,
        /// Also write the raw samples, one per line.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Run a campaign described by a TOML config file.
    Search { config: PathBuf },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    parse_graph(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_weights(path: &Path, g: &Graph) -> Result<WeightSystem, Failure> {
    parse_weights(&read(path)?, g).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_lists(path: Option<&Path>, g: &Graph, h: &Graph) -> Result<ListAssignment, Failure> {
    match path {
        None => Ok(ListAssignment::full(g.n(), h.n())),
        Some(p) => parse_lists(&read(p)?, g.n(), h.n()).map_err(|e| Failure(format!("{}: {e}", p.display()))),
    }
}

fn required<'a>(flag: &str, bound: BoundKind, p: &'a Option<PathBuf>) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure(format!("{bound} needs --{flag}")))
}

fn emit(common: &Common, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match &common.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn bound_report(opts: &EvalOptions, cmd: &Command) -> Result<BoundReport, Failure> {
    let Command::Bound { bound, graph, weights, target, lists, families } = cmd else { unreachable!() };
    let bound = *bound;
    let g = load_graph(graph)?;
    let report = match bound {
        BoundKind::Thm3 | BoundKind::Conj1 => {
            let w = load_weights(required("weights", bound, weights)?, &g)?;
            if bound == BoundKind::Thm3 {
                theorem3_bound(&g, &w, opts)?
            } else {
                conjecture1_bound(&g, &w, opts)?
            }
        }
        BoundKind::Thm4 | BoundKind::Thm5 | BoundKind::Conj2 => {
            let h = load_graph(required("target", bound, target)?)?;
            let l = load_lists(lists.as_deref(), &g, &h)?;
            match bound {
                BoundKind::Thm4 => theorem4_bound(&g, &h, &l, opts)?,
                BoundKind::Conj2 => conjecture2_bound(&g, &h, &l, opts)?,
                _ => {
                    let path = required("families", bound, families)?;
                    let fam = parse_families(&read(path)?, g.n())
                        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                    theorem5_bound(&g, &h, &l, &fam, opts)?
                }
            }
        }
        BoundKind::Ind => kahn_ind(&g)?,
        BoundKind::IndConj => kahn_ind_conj(&g)?,
    };
    Ok(report)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let common = &cli.common;
    let opts = EvalOptions::with_budget(common.budget).backend(common.backend);
    match &cli.command {
        Command::Compute { graph, weights } => {
            let g = load_graph(graph)?;
            let w = load_weights(weights, &g)?;
            let z = partition_function(&g, &w, &opts)?;
            let mut v = json!({
                "graph_sha": g.sha256(),
                "weights_sha": w.sha256(),
                "backend": z.backend().to_string(),
                "log_z": json_f64(z.ln()),
            });
            if let Some(q) = z.as_exact() {
                v["z_exact"] = json!(format_rational(q));
            }
            emit(common, &v)?;
            Ok(0)
        }
        cmd @ Command::Bound { .. } => {
            let r = bound_report(&opts, cmd)?;
            emit(common, &r.to_json())?;
            Ok(verdict_code(r.verdict))
        }
        Command::Listhom { graph, target, lists } => {
            let g = load_graph(graph)?;
            let h = load_graph(target)?;
            let l = load_lists(lists.as_deref(), &g, &h)?;
            let count = count_list_homs(&g, &h, &l, common.budget)?;
            emit(
                common,
                &json!({
                    "count": count.to_string(),
                    "log_count": json_f64((count as f64).ln()),
                    "graph_sha": g.sha256(),
                    "target_sha": h.sha256(),
                    "lists_sha": l.sha256(),
                    "backend": "EXACT",
                }),
            )?;
            Ok(0)
        }
        Command::Ising { graph, beta } => {
            let g = load_graph(graph)?;
            let r = ising_free_energy_check(&g, *beta, &opts)?;
            let mut v = r.to_json();
            v["graph_sha"] = json!(g.sha256());
            emit(common, &v)?;
            Ok(if r.in_bounds { 0 } else { EXIT_VIOLATED })
        }
        Command::Blowup { graph, weights, c, trials, config, samples } => {
            let g = load_graph(graph)?;
            let w = load_weights(weights, &g)?;
            let cfg = match config {
                Some(s) => SpinConfig::parse_one_based(s, g.n(), w.m())?,
                None => SpinConfig::new(vec![0; g.n()], g.n(), w.m())?,
            };
            let mut stats = concentration_experiment(&g, &w, &cfg, *c, *trials, common.seed, common.budget)?;
            if let Some(p) = samples {
                fs::write(p, samples_text(&stats)).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
                stats.samples_path = Some(p.display().to_string());
            }
            let mut v = stats.to_json();
            v["graph_sha"] = json!(g.sha256());
            v["weights_sha"] = json!(w.sha256());
            v["backend"] = json!("EXACT");
            emit(common, &v)?;
            Ok(0)
        }
        Command::Search { config } => {
            let mut cfg = CampaignConfig::load(config)?;
            if let Some(p) = &common.out {
                cfg.output = Some(p.display().to_string());
            }
            let report = run_campaign(&cfg)?;
            match &cfg.output {
                Some(p) => {
                    write_campaign(&report, Path::new(p))?;
                }
                None => print!("{}", serde_json::to_string_pretty(&report.to_json())? + "\n"),
            }
            eprint!("{}", report.summary_table());
            Ok(if report.violations() > 0 { EXIT_VIOLATED } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

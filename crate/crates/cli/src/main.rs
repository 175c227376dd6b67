//! `maxinf`: influence maximization from the command line.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use maxinf::algo::{maximize_budget, SketchStats};
use maxinf::bench::{self, AlgoSpec, BenchConfig, BenchInstance, LowerBoundInstance, ProbDist};
use maxinf::rng::tag;
use maxinf::{
    chernoff_trials, estimate_influence_mc, exact_influence, exact_opt, maximize, maximize_anytime,
    maximize_sublinear, Error, MaximizeParams, NodeId, RngStream, SublinearParams, WeightedDigraph,
};

/// Seed used when neither `--seed` nor `MAXINF_SEED` is given.
const DEFAULT_SEED: u64 = 20_240_607;

const CONVENTIONS: &str = "\
Conventions:
  log is the natural logarithm in every budget formula.
  A step is one edge examined during a cascade traversal, i.e. one
  coin flip slot (charged even when p is 0 or 1 and no coin is needed),
  plus one per RR-set root pick. Budgets and reported step counts use this unit.
  Randomness derives from one master seed (--seed, else MAXINF_SEED,
  else 20240607) split into per-purpose streams.";

#[derive(Parser, Debug)]
#[command(name = "maxinf", version, about = "Influence maximization under the independent cascade model")]
#[command(after_help = CONVENTIONS)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for all randomness.
    #[arg(long, global = true, env = "MAXINF_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Single-threaded, timing-free output.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Threads for sketch construction.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy seeds from a budgeted RR sketch.
    #[command(after_help = CONVENTIONS)]
    Maximize(MaximizeArgs),
    /// Seeds from a sketch of budget beta * (m+n) log n.
    #[command(after_help = CONVENTIONS)]
    MaximizeSublinear(SublinearArgs),
    /// Sublinear run at beta = 1 that answers with its latest checkpoint
    /// solution when stopped by SIGTERM, SIGINT or --max-steps.
    #[command(after_help = CONVENTIONS)]
    Anytime(AnytimeArgs),
    /// Monte-Carlo estimate of the expected influence of a seed set.
    #[command(after_help = CONVENTIONS)]
    Estimate(EstimateArgs),
    /// Exact expected influence (or optimum) by enumerating realizations.
    #[command(after_help = CONVENTIONS)]
    Oracle(OracleArgs),
    /// Write a generated graph as an edge list.
    #[command(subcommand, after_help = CONVENTIONS)]
    Gen(GenCommand),
    /// Score algorithms against exact optima over a corpus.
    #[command(after_help = CONVENTIONS)]
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Edge list: `source<TAB>target<TAB>p` per line.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args, Debug)]
struct MaximizeArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    k: usize,
    /// Accuracy in (0, 1).
    #[arg(long)]
    epsilon: f64,
    /// Independent sketches; the one with most hyperedges is kept.
    #[arg(long, default_value_t = 1)]
    repetitions: u32,
    /// Budget multiplier.
    #[arg(long, default_value_t = 1)]
    ell: u32,
}

#[derive(Args, Debug)]
struct SublinearArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    k: usize,
    /// Budget fraction in (0, 1].
    #[arg(long)]
    beta: f64,
}

#[derive(Args, Debug)]
struct AnytimeArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    k: usize,
    /// Stop once this many steps have been used.
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Comma-separated vertex ids.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u32>,
    /// Cascades to simulate; overrides --lambda/--confidence.
    #[arg(long)]
    trials: Option<u64>,
    /// Relative accuracy for the Chernoff sample size.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Comma-separated vertex ids.
    #[arg(long, value_delimiter = ',', required_unless_present = "opt")]
    seeds: Vec<u32>,
    /// Report the best seed set of this size instead.
    #[arg(long, conflicts_with = "seeds")]
    opt: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// k directed p=1 cycles of length 2T plus isolated vertices.
    LowerBound {
        #[arg(long)]
        n: usize,
        #[arg(long = "T", visible_alias = "t")]
        t: usize,
        #[arg(long)]
        k: usize,
        /// Add a circulant overlay of this out-degree with tiny weights.
        #[arg(long)]
        overlay_degree: Option<usize>,
    },
    /// Uniformly random directed edges.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Fixed edge probability.
        #[arg(long, conflicts_with = "p_range")]
        p: Option<f64>,
        /// Uniform edge probabilities in `lo,hi`.
        #[arg(long, value_parser = parse_range)]
        p_range: Option<(f64, f64)>,
        /// Allow repeated (source, target) pairs.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Oracle-scored instance from an edge-list file (repeatable).
    #[arg(long)]
    graph: Vec<PathBuf>,
    /// Lower-bound instance `n,T,k` (repeatable).
    #[arg(long)]
    lower_bound: Vec<String>,
    /// Random oracle-scored instance `n,m` with p uniform in [0.05, 0.95].
    #[arg(long)]
    random: Vec<String>,
    /// Run the full algorithm at this epsilon (repeatable).
    #[arg(long)]
    epsilon: Vec<f64>,
    /// Run the sublinear algorithm at this beta (repeatable).
    #[arg(long)]
    beta: Vec<f64>,
    /// Run Monte-Carlo greedy with this many cascades per estimate.
    #[arg(long)]
    mc_greedy: Vec<u64>,
    /// Seed-set sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,
    /// Runs per (instance, algorithm, k), trial i seeded with seed + i.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Failure with its exit code: 3 for bad data, 4 for capacity.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => 4,
            _ => 3,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e).into()
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn load_graph(path: &Path) -> CliResult<WeightedDigraph> {
    let file = File::open(path).map_err(|e| Failure {
        code: 3,
        msg: format!("{}: {e}", path.display()),
    })?;
    WeightedDigraph::load_edge_list(BufReader::new(file)).map_err(|e| Failure {
        code: 3,
        msg: format!("{}: {e}", path.display()),
    })
}

fn node_ids(ids: &[u32]) -> Vec<NodeId> {
    ids.iter().copied().map(NodeId).collect()
}

#[derive(Serialize)]
struct RunResult<'a> {
    seeds: &'a [NodeId],
    estimate: f64,
    #[serde(rename = "m_H")]
    m_h: usize,
    steps: u64,
    budget: u64,
    branch: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    k: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sketches: Option<&'a [SketchStats]>,
}

#[derive(Serialize)]
struct AnytimeResult<'a> {
    seeds: &'a [NodeId],
    estimate: f64,
    #[serde(rename = "m_H")]
    m_h: usize,
    steps: u64,
    budget: u64,
    branch: &'static str,
    beta: f64,
    k: usize,
    seed: u64,
    completed: bool,
    snapshot_index: u32,
    snapshot_steps: u64,
    snapshots: usize,
}

fn json_line<W: Write, T: Serialize>(mut w: W, value: &T) -> CliResult {
    serde_json::to_writer(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

fn parse_list(s: &str, what: &str, len: usize) -> CliResult<Vec<usize>> {
    let parts: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse()).collect();
    match parts {
        Ok(v) if v.len() == len => Ok(v),
        _ => Err(Failure {
            code: 2,
            msg: format!("--{what} expects {len} comma-separated integers, got {s:?}"),
        }),
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    let seed = cli.seed;
    let workers = if cli.deterministic { 1 } else { cli.workers.max(1) };
    match cli.command {
        Command::Maximize(a) => {
            let g = load_graph(&a.graph.graph)?;
            let params = MaximizeParams {
                repetitions: a.repetitions,
                ell: a.ell,
                workers,
                ..MaximizeParams::new(a.epsilon, a.k, seed)
            };
            let sol = maximize(&g, &params)?;
            let budget = if sol.sketches.is_empty() {
                0
            } else {
                maximize_budget(&g, a.epsilon, a.ell)?.get()
            };
            json_line(
                out,
                &RunResult {
                    seeds: sol.seeds(),
                    estimate: sol.seed_set.estimate,
                    m_h: sol.hyperedges(),
                    steps: sol.steps(),
                    budget,
                    branch: sol.branch.as_str(),
                    epsilon: Some(a.epsilon),
                    beta: None,
                    k: a.k,
                    seed,
                    sketches: (sol.sketches.len() > 1).then_some(&sol.sketches[..]),
                },
            )
        }
        Command::MaximizeSublinear(a) => {
            let g = load_graph(&a.graph.graph)?;
            let sol = maximize_sublinear(&g, &SublinearParams::new(a.beta, a.k, seed))?;
            json_line(
                out,
                &RunResult {
                    seeds: sol.seeds(),
                    estimate: sol.seed_set.estimate,
                    m_h: sol.hyperedges(),
                    steps: sol.steps(),
                    budget: sol.sketches.first().map_or(0, |s| s.budget),
                    branch: sol.branch.as_str(),
                    epsilon: None,
                    beta: Some(a.beta),
                    k: a.k,
                    seed,
                    sketches: None,
                },
            )
        }
        Command::Anytime(a) => {
            let g = load_graph(&a.graph.graph)?;
            let flag = Arc::new(AtomicBool::new(false));
            for sig in [signal_hook::consts::SIGTERM, signal_hook::consts::SIGINT] {
                signal_hook::flag::register(sig, Arc::clone(&flag))?;
            }
            let limit = a.max_steps;
            let stop = |steps: u64| {
                flag.load(Ordering::Relaxed) || limit.is_some_and(|m| steps >= m)
            };
            let run = maximize_anytime(&g, a.k, seed, &stop)?;
            let s = &run.solution;
            json_line(
                out,
                &AnytimeResult {
                    seeds: &s.seed_set.seeds,
                    estimate: s.seed_set.estimate,
                    m_h: s.hyperedges,
                    steps: run.steps,
                    budget: run.budget,
                    branch: s.branch.as_str(),
                    beta: 1.0,
                    k: a.k,
                    seed,
                    completed: run.completed,
                    snapshot_index: s.snapshot_index,
                    snapshot_steps: s.steps_at_snapshot,
                    snapshots: run.snapshots.len(),
                },
            )
        }
        Command::Estimate(a) => {
            let g = load_graph(&a.graph.graph)?;
            let trials = match a.trials {
                Some(t) => t,
                None => chernoff_trials(a.lambda, a.confidence)?.trials,
            };
            let seeds = node_ids(&a.seeds);
            let mut rng = RngStream::tagged(seed, tag::ESTIMATE, 0);
            let est = estimate_influence_mc(&g, &seeds, trials, &mut rng)?;
            #[derive(Serialize)]
            struct Out<'a> {
                estimate: f64,
                trials: u64,
                steps: u64,
                seeds: &'a [NodeId],
                seed: u64,
            }
            json_line(
                out,
                &Out {
                    estimate: est.mean,
                    trials: est.trials,
                    steps: est.steps_total,
                    seeds: &seeds,
                    seed,
                },
            )
        }
        Command::Oracle(a) => {
            let g = load_graph(&a.graph.graph)?;
            if let Some(k) = a.opt {
                let o = exact_opt(&g, k)?;
                #[derive(Serialize)]
                struct Out<'a> {
                    opt: f64,
                    argmax: &'a [NodeId],
                    realizations: u64,
                }
                json_line(
                    out,
                    &Out {
                        opt: o.value,
                        argmax: &o.argmax,
                        realizations: o.realizations,
                    },
                )
            } else {
                let ex = exact_influence(&g, &node_ids(&a.seeds))?;
                #[derive(Serialize)]
                struct Out {
                    exact: f64,
                    realizations: u64,
                }
                json_line(
                    out,
                    &Out {
                        exact: ex.value,
                        realizations: ex.realizations,
                    },
                )
            }
        }
        Command::Gen(gen) => {
            let g = match gen {
                GenCommand::LowerBound {
                    n,
                    t,
                    k,
                    overlay_degree,
                } => bench::gen_lower_bound(n, t, k, overlay_degree)?,
                GenCommand::Random {
                    n,
                    m,
                    p,
                    p_range,
                    parallel,
                } => {
                    let dist = match (p, p_range) {
                        (_, Some((lo, hi))) => ProbDist::Uniform { lo, hi },
                        (Some(p), None) => ProbDist::Fixed(p),
                        (None, None) => {
                            return Err(Failure {
                                code: 2,
                                msg: "gen random needs --p or --p-range".into(),
                            })
                        }
                    };
                    bench::gen_random(n, m, dist, parallel, seed)?
                }
            };
            g.write_edge_list(out)?;
            Ok(())
        }
        Command::Bench(a) => {
            let mut corpus = Vec::new();
            for path in &a.graph {
                let id = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                corpus.push(BenchInstance::oracle(id, load_graph(path)?));
            }
            for spec in &a.lower_bound {
                let v = parse_list(spec, "lower-bound", 3)?;
                let inst = LowerBoundInstance::new(v[0], v[1], v[2])?;
                corpus.push(BenchInstance::lower_bound(format!("lb-{}-{}-{}", v[0], v[1], v[2]), inst));
            }
            for (i, spec) in a.random.iter().enumerate() {
                let v = parse_list(spec, "random", 2)?;
                let dist = ProbDist::Uniform { lo: 0.05, hi: 0.95 };
                let g = bench::gen_random(v[0], v[1], dist, false, seed.wrapping_add(i as u64))?;
                corpus.push(BenchInstance::oracle(format!("random-{}-{}-{i}", v[0], v[1]), g));
            }
            let mut algos: Vec<AlgoSpec> = a
                .epsilon
                .iter()
                .map(|&epsilon| AlgoSpec::Maximize {
                    epsilon,
                    repetitions: 1,
                })
                .chain(a.beta.iter().map(|&beta| AlgoSpec::Sublinear { beta }))
                .chain(a.mc_greedy.iter().map(|&trials| AlgoSpec::McGreedy { trials }))
                .collect();
            if algos.is_empty() {
                algos.push(AlgoSpec::Maximize {
                    epsilon: 0.2,
                    repetitions: 1,
                });
            }
            let cfg = BenchConfig {
                ks: a.k,
                trials: a.trials,
                seed,
                deterministic: cli.deterministic,
            };
            let report = bench::run_bench(&corpus, &algos, &cfg);
            match a.format {
                Format::Csv => report.write_csv(out)?,
                Format::Json => report.write_json(out)?,
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.out.clone() {
        Some(path) => match File::create(&path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                run(cli, &mut w).and_then(|()| w.flush().map_err(Failure::from))
            }
            Err(e) => Err(Failure {
                code: 3,
                msg: format!("{}: {e}", path.display()),
            }),
        },
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            run(cli, &mut w).and_then(|()| w.flush().map_err(Failure::from))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hypermatch::constructions::{
    build_hkl, build_hknm, complete, parity_construction, planted_extremal, random_kgraph,
    random_kgraph_conditioned, space_barrier, vertex_degree_threshold, VertexPartition,
};
use hypermatch::containment::{eps_contains, ModeRequest};
use hypermatch::harness::{
    case_split_demo, conjecture_search, parse_records, render_report, tightness_grid,
    verify_tightness, ExperimentReport, ReportFormat, SearchModel, SearchParams,
};
use hypermatch::lp::duality_certificate;
use hypermatch::matching::{
    exact_nu_with, nibble_matching, ExactOptions, NibbleConfig, NODE_BUDGET_ENV,
};
use hypermatch::numeric::{format_rational, int_rational, parse_rational};
use hypermatch::pipeline::{build_augmented, fractional_pm_pipeline, PipelineConfig, Route};
use hypermatch::{Error, KGraph, Rational};

const AFTER_HELP: &str = "\
Exit status:
  0  every check passed
  1  an assertion failed (or the input was rejected)
  2  a branch-and-bound search ran out of its node budget

Environment:
  HYPERMATCH_NODE_BUDGET  branch-node budget for exact matching searches
                          (default 100000000); --budget overrides it.

Graph files: a header line `k n`, then one edge per line as k vertex ids in
1..=n. Lines starting with # are comments. `-` reads standard input.";

#[derive(Parser)]
#[command(name = "hypermatch", version, about = "Matchings in k-uniform hypergraphs: exact, fractional and randomized", after_help = AFTER_HELP)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output shape: `records` (JSON lines) or `rows` (CSV).
    #[arg(long, global = true, value_enum, default_value_t = Format::Records)]
    format: Format,
    /// Branch-node budget for exact searches.
    #[arg(long, global = true, env = NODE_BUDGET_ENV)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Rows,
    Records,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Rows => ReportFormat::Rows,
            Format::Records => ReportFormat::Records,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Conditioned,
    Planted,
    Extremal,
    Template,
    Complete,
    SpaceBarrier,
    Parity,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph in the text format.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short, long)]
        n: Option<usize>,
        #[arg(short, long, default_value_t = 3)]
        k: usize,
        #[arg(short, long)]
        m: Option<usize>,
        /// Edge probability (random, conditioned, planted).
        #[arg(short, long, default_value_t = 0.5)]
        p: f64,
        /// Redraws allowed by the conditioned sampler.
        #[arg(long, default_value_t = 1000)]
        tries: usize,
        /// Minimum degree required by the conditioned sampler (default: the threshold for m, plus one).
        #[arg(long)]
        floor: Option<u64>,
        /// Template: largest allowed |e ∩ W|.
        #[arg(long)]
        l: Option<usize>,
        /// Parity: size of the even side.
        #[arg(long)]
        a: Option<usize>,
        /// Parity: size of the other side.
        #[arg(long)]
        b: Option<usize>,
    },
    /// Maximum matching size by branch and bound.
    Nu { graph: PathBuf },
    /// Fractional matching and cover numbers with a duality certificate.
    Frac { graph: PathBuf },
    /// Distance to the extremal template H_k(n, m).
    Contain {
        graph: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Also run the branch the containment result selects.
        #[arg(long)]
        split: bool,
        #[arg(long, default_value = "1/30")]
        eta: String,
        #[arg(long, default_value = "1/100")]
        rho: String,
    },
    /// Semi-random nibble followed by a greedy finish.
    Nibble {
        graph: PathBuf,
        #[arg(long, default_value = "1/4")]
        bite: String,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long, default_value = "1/10")]
        sigma: String,
        #[arg(long, default_value = "1/10")]
        tau: String,
    },
    /// Perfect fractional matching of the clique-augmented graph, step by step.
    Pipeline {
        graph: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "1/30")]
        eta: String,
        #[arg(long, default_value = "1/100")]
        rho: String,
        #[arg(long, default_value = "1/100")]
        eps: String,
        /// Range parameter; defaults to 3 * eta.
        #[arg(long)]
        beta: Option<String>,
        /// Number of added clique vertices; defaults to the padding rule.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
        /// Skip the exact independence-number check.
        #[arg(long)]
        skip_alpha: bool,
        /// Include per-step wall-clock times.
        #[arg(long)]
        timings: bool,
    },
    /// Tightness of the degree threshold over a grid.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = vec![3usize, 4])]
        k: Vec<usize>,
        #[arg(long, default_value_t = 14)]
        n_max: usize,
        #[arg(long)]
        timings: bool,
    },
    /// Random search for graphs above the threshold without a size-m matching.
    Search {
        #[arg(short, long)]
        n: usize,
        #[arg(short, long, default_value_t = 3)]
        k: usize,
        #[arg(short, long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Conditioned)]
        model: ModelArg,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(short, long, default_value_t = 0.4)]
        p: f64,
        /// Redraws allowed per conditioned trial.
        #[arg(long, default_value_t = 1000)]
        cap: usize,
        #[arg(long)]
        timings: bool,
    },
    /// Re-emit a records file in the chosen format.
    Report { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Exhaustive,
    Local,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Exact,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    UniformP,
    Conditioned,
    Planted,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::BudgetExhausted { .. }) {
            2
        } else {
            1
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_graph(path: &Path) -> CliResult<KGraph> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::from(Error::from(e)))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?
    };
    Ok(KGraph::parse(&text)?)
}

fn rational(name: &str, s: &str) -> CliResult<Rational> {
    parse_rational(s).map_err(|_| usage(format!("--{name}: cannot parse {s:?} as a rational")))
}

fn write_text(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::from(Error::from(e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One JSON line, or a two-line CSV whose nested values are JSON-encoded cells.
fn write_value(cli: &Cli, v: &Value) -> CliResult<()> {
    let text = match cli.format {
        Format::Records => format!("{v}\n"),
        Format::Rows => {
            let obj = v.as_object().expect("command output is an object");
            let header: Vec<String> = obj.keys().map(|k| csv_field(k)).collect();
            let row: Vec<String> = obj
                .values()
                .map(|x| match x {
                    Value::String(s) => csv_field(s),
                    Value::Null => String::new(),
                    other => csv_field(&other.to_string()),
                })
                .collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    };
    write_text(cli, &text)
}

fn write_report(cli: &Cli, report: &ExperimentReport) -> CliResult<u8> {
    write_text(cli, &render_report(report, cli.format.into())?)?;
    Ok(report.exit_code() as u8)
}

fn exact_options(cli: &Cli) -> ExactOptions {
    let mut o = ExactOptions::default();
    if let Some(b) = cli.budget {
        o.budget = b;
    }
    o
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--kind {kind} needs --{flag}")))
}

fn run(cli: &Cli) -> CliResult<u8> {
    if let Some(b) = cli.budget {
        // Library calls that take no options read the budget from the environment.
        std::env::set_var(NODE_BUDGET_ENV, b.to_string());
    }
    let opts = exact_options(cli);
    match &cli.command {
        Command::Gen {
            kind,
            n,
            k,
            m,
            p,
            tries,
            floor,
            l,
            a,
            b,
        } => {
            let (k, p) = (*k, *p);
            let name = kind
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string();
            let h = match kind {
                Kind::Random => random_kgraph(need(*n, "n", &name)?, k, p, cli.seed)?,
                Kind::Conditioned => {
                    let n = need(*n, "n", &name)?;
                    let floor = match floor {
                        Some(f) => *f,
                        None => {
                            let t = vertex_degree_threshold(n, k, need(*m, "m", &name)?)?;
                            u64::try_from(t).map_err(|_| usage("threshold exceeds u64"))? + 1
                        }
                    };
                    random_kgraph_conditioned(n, k, p, floor, *tries, cli.seed)?.0
                }
                Kind::Planted => {
                    planted_extremal(need(*n, "n", &name)?, k, need(*m, "m", &name)?, p, cli.seed)?
                }
                Kind::Extremal => build_hknm(need(*n, "n", &name)?, k, need(*m, "m", &name)?)?.0,
                Kind::Template => {
                    let n = need(*n, "n", &name)?;
                    let part = VertexPartition::lowest(n, need(*m, "m", &name)?.saturating_sub(1))?;
                    build_hkl(&part.u, &part.w, k, l.unwrap_or(k - 1))?
                }
                Kind::Complete => complete(need(*n, "n", &name)?, k)?,
                Kind::SpaceBarrier => space_barrier(need(*n, "n", &name)?, k)?,
                Kind::Parity => {
                    parity_construction(need(*a, "a", &name)?, need(*b, "b", &name)?, k)?
                }
            };
            write_text(cli, &h.to_text())?;
            Ok(0)
        }
        Command::Nu { graph } => {
            let h = read_graph(graph)?;
            let out = exact_nu_with(&h, &opts)?;
            write_value(
                cli,
                &json!({
                    "n": h.n(), "k": h.k(), "edges": h.edge_count(),
                    "min_degree": h.min_l_degree(1)?, "nu": out.nu, "nodes": out.nodes,
                    "matching": out.matching,
                }),
            )?;
            Ok(0)
        }
        Command::Frac { graph } => {
            let h = read_graph(graph)?;
            let c = duality_certificate(&h);
            write_value(
                cli,
                &json!({
                    "n": h.n(), "k": h.k(), "edges": h.edge_count(),
                    "nu_frac": format_rational(&c.nu_frac), "tau_frac": format_rational(&c.tau_frac),
                    "holds": c.holds(), "matching": c.matching.to_json(), "cover": c.cover.to_json(),
                }),
            )?;
            Ok(if c.holds() { 0 } else { 1 })
        }
        Command::Contain {
            graph,
            m,
            eps,
            mode,
            split,
            eta,
            rho,
        } => {
            let h = read_graph(graph)?;
            let eps_q = rational("eps", eps)?;
            if *split {
                let rho = rational("rho", rho)?;
                let eta = rational("eta", eta)?;
                let mut cfg = PipelineConfig::new(eps_q, rho, &eta * int_rational(3));
                cfg.eta = eta;
                cfg.seed = cli.seed;
                let rep = case_split_demo(&h, *m, &cfg, &opts)?;
                write_value(cli, &serde_json::to_value(&rep).expect("report serializes"))?;
                return Ok(0);
            }
            let mode = match mode {
                Mode::Auto => ModeRequest::Auto,
                Mode::Exhaustive => ModeRequest::Exhaustive,
                Mode::Local => ModeRequest::Local,
            };
            let rep = eps_contains(&h, *m, &eps_q, mode)?;
            write_value(cli, &serde_json::to_value(&rep).expect("report serializes"))?;
            Ok(0)
        }
        Command::Nibble {
            graph,
            bite,
            rounds,
            sigma,
            tau,
        } => {
            let h = read_graph(graph)?;
            let cfg = NibbleConfig {
                bite_fraction: rational("bite", bite)?,
                max_rounds: *rounds,
                sigma_target: rational("sigma", sigma)?,
                seed: cli.seed,
                tau_check: rational("tau", tau)?,
                ..NibbleConfig::default()
            };
            let rep = nibble_matching(&h, &cfg)?;
            if !h.verify_matching(&rep.matching) {
                return Err(usage("nibble returned an invalid matching"));
            }
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["covered_fraction_f64"] = json!(rep.covered_fraction_f64());
            write_value(cli, &v)?;
            Ok(0)
        }
        Command::Pipeline {
            graph,
            m,
            eta,
            rho,
            eps,
            beta,
            r,
            route,
            skip_alpha,
            timings,
        } => {
            let h = read_graph(graph)?;
            let eta = rational("eta", eta)?;
            let beta = match beta {
                Some(b) => rational("beta", b)?,
                None => &eta * int_rational(3),
            };
            let mut cfg = PipelineConfig::new(rational("eps", eps)?, rational("rho", rho)?, beta);
            cfg.eta = eta;
            cfg.seed = cli.seed;
            cfg.check_independence = !skip_alpha;
            cfg.route = match route {
                RouteArg::Auto => Route::Auto,
                RouteArg::Exact => Route::Exact,
                RouteArg::Greedy => Route::Greedy,
            };
            let aug = build_augmented(&h, *m, &cfg.eta)?;
            let r = r.unwrap_or(aug.r);
            let out = fractional_pm_pipeline(&h, *m, r, &cfg)?;
            write_value(
                cli,
                &json!({
                    "n": h.n(), "k": h.k(), "m": m, "r": r,
                    "padding_r": aug.r, "eta_n": aug.eta_n, "residual": aug.residual,
                    "preconditions_hold": out.preconditions.all_hold(),
                    "route": out.route, "s": out.s,
                    "value": format_rational(&out.phi.value()),
                    "lp_value": format_rational(&out.lp_value),
                    "trace": out.trace_json(*timings),
                    "warnings": cfg.warnings(h.k()),
                }),
            )?;
            Ok(0)
        }
        Command::Verify { k, n_max, timings } => {
            let grid = tightness_grid(k, *n_max);
            let rep = verify_tightness(&grid, &opts, *timings)?;
            write_report(cli, &rep)
        }
        Command::Search {
            n,
            k,
            m,
            model,
            trials,
            p,
            cap,
            timings,
        } => {
            let model = match model {
                ModelArg::UniformP => SearchModel::UniformP,
                ModelArg::Conditioned => SearchModel::Conditioned,
                ModelArg::Planted => SearchModel::Planted,
            };
            let mut params = SearchParams::new(*n, *k, *m, model, *trials, cli.seed);
            params.p = *p;
            params.rejection_cap = *cap;
            params.budget = opts.budget;
            params.timings = *timings;
            let rep = conjecture_search(&params)?;
            write_report(cli, &rep)
        }
        Command::Report { input } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| usage(format!("{}: {e}", input.display())))?;
            let rep = parse_records(&text)?;
            write_report(cli, &rep)
        }
    }
}

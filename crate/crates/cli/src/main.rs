//! `kstar`: solve, check and measure k⁻-star partitions.
//!
//! Exit codes: 0 success, 1 I/O failure on output, 2 malformed input,
//! 3 parameter out of range, 4 verifier found a violated check,
//! 5 solution handed to `verify` is not a local-search fixed point.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kstar::experiment::{bench_once, log_log_slope, run_trial, trial_spec, BenchModel, BenchRow};
use kstar::generate::GenSpec;
use kstar::init::initial_partition_with_stats;
use kstar::oracle::{solve_exact, Objective, DEFAULT_CAP};
use kstar::partition::{count_1stars, PARTITION_FORMAT_VERSION};
use kstar::search::{approx1, SolveStats, OPLOG_FORMAT_VERSION};
use kstar::verify::{verify, VerifyStatus};
use kstar::{parse_edge_list, Error, Graph, StarPartition};
use rayon::prelude::*;
use serde::Serialize;

const GEN_HELP: &str = "Generator SPEC: gnp:N:P:SEED | tree:N:SEED | starheavy:C:L:B:SEED \
(C copies of K_{1,L}; B=1 joins consecutive copies by a random leaf matching)";

#[derive(Parser)]
#[command(name = "kstar", version, about = "Local search for minimum k-star partitions", after_help = GEN_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the local search and write the partition.
    Solve(SolveArgs),
    /// Exact minimum by exhaustive search (small graphs only).
    Oracle(OracleArgs),
    /// Check the token argument on a fixed point against a reference partition.
    Verify(VerifyArgs),
    /// Write a generated graph as an edge list.
    Generate(GenerateArgs),
    /// Compare the local search with the exact optimum on random instances.
    RatioExperiment(RatioArgs),
    /// Time the local search over a range of sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// Edge-list file: header `n m`, then `m` lines `u v`; `#` starts a comment line.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator SPEC (see --help).
    #[arg(long)]
    gen: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    k: usize,
    /// Partition JSON destination; without it the partition goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Operation log as JSON lines.
    #[arg(long)]
    log_ops: Option<PathBuf>,
    /// Stop after the initial partition.
    #[arg(long)]
    init_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Stars,
    Singletons,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "stars")]
    objective: ObjectiveArg,
    /// Largest accepted vertex count.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Edge list of the host graph.
    #[arg(long)]
    graph: PathBuf,
    /// Partition JSON of the local-search result.
    #[arg(long)]
    solution: PathBuf,
    /// Partition JSON of the reference (normally optimal) partition.
    #[arg(long)]
    optimal: PathBuf,
    /// Defaults to the `k` recorded in the solution file.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    gen: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads; rows stay in trial order.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    sizes: Vec<usize>,
    /// gnp-deg:D | tree | starheavy:L | empty
    #[arg(long, default_value = "gnp-deg:8")]
    model: String,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Param(_) => 3,
            Error::Graph(_) | Error::Json(_) | Error::Contract(_) => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<kstar::ParamError> for Failure {
    fn from(e: kstar::ParamError) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> CliResult<Graph> {
    let parsed = parse_edge_list(&read_text(path)?).map_err(Error::from)?;
    if parsed.duplicate_edges > 0 {
        eprintln!("warning: {} duplicate edge(s) ignored", parsed.duplicate_edges);
    }
    Ok(parsed.graph)
}

fn load_graph(src: &GraphSource) -> CliResult<Graph> {
    match (&src.input, &src.gen) {
        (Some(path), _) => read_graph(path),
        (None, Some(spec)) => Ok(spec.parse::<GenSpec>()?.generate()?),
        (None, None) => unreachable!("clap enforces one source"),
    }
}

fn emit_json<T: Serialize>(value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::new(1, e.to_string())),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    format_version: u32,
    n: usize,
    m: usize,
    k: usize,
    stars: usize,
    one_stars: usize,
    stats: &'a SolveStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<kstar::partition::PartitionFile>,
}

#[derive(Serialize)]
struct OplogHeader {
    format_version: u32,
    n: usize,
    k: usize,
}

#[derive(Serialize)]
struct OracleSummary {
    format_version: u32,
    objective: Objective,
    value: usize,
    explored_states: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<kstar::partition::PartitionFile>,
}

fn cmd_solve(a: SolveArgs) -> CliResult {
    let g = load_graph(&a.source)?;
    let (p, stats) = if a.init_only {
        let start = std::time::Instant::now();
        let (p, init) = initial_partition_with_stats(&g, a.k)?;
        let elapsed = start.elapsed();
        let stats = SolveStats {
            q_trajectory: vec![p.tracked_q()],
            one_star_count: count_1stars(&p),
            init,
            init_time: elapsed,
            wall_time: elapsed,
            ..SolveStats::default()
        };
        (p, stats)
    } else {
        approx1(&g, a.k)?
    };
    if let Some(path) = &a.log_ops {
        let header = OplogHeader {
            format_version: OPLOG_FORMAT_VERSION,
            n: g.n(),
            k: a.k,
        };
        let mut text = serde_json::to_string(&header).expect("serializable");
        text.push('\n');
        for app in &stats.log {
            text.push_str(&serde_json::to_string(app).expect("serializable"));
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    if let Some(path) = &a.out {
        write_text(path, &p.to_json())?;
    }
    emit_json(&SolveSummary {
        format_version: PARTITION_FORMAT_VERSION,
        n: g.n(),
        m: g.m(),
        k: a.k,
        stars: p.len(),
        one_stars: count_1stars(&p),
        stats: &stats,
        partition: a.out.is_none().then(|| p.to_file()),
    })
}

fn cmd_oracle(a: OracleArgs) -> CliResult {
    let g = load_graph(&a.source)?;
    let objective = match a.objective {
        ObjectiveArg::Stars => Objective::Stars,
        ObjectiveArg::Singletons => Objective::Singletons,
    };
    let r = solve_exact(&g, a.k, objective, a.cap)?;
    if let Some(path) = &a.out {
        write_text(path, &r.witness.to_json())?;
    }
    emit_json(&OracleSummary {
        format_version: PARTITION_FORMAT_VERSION,
        objective,
        value: r.value,
        explored_states: r.explored_states,
        partition: a.out.is_none().then(|| r.witness.to_file()),
    })
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let g = read_graph(&a.graph)?;
    let s = StarPartition::from_json(&read_text(&a.solution)?, g.n())?;
    let q = StarPartition::from_json(&read_text(&a.optimal)?, g.n())?;
    let k = a.k.unwrap_or(s.k());
    let report = verify(&g, &s, &q, k)?;
    emit_json(&report)?;
    match report.status {
        VerifyStatus::Pass => Ok(()),
        VerifyStatus::Violation => Err(Failure::new(4, "verifier reported a violated check")),
        VerifyStatus::NotFixedPoint => Err(Failure::new(
            5,
            "solution admits a local-search operation; checks not applicable",
        )),
    }
}

fn cmd_generate(a: GenerateArgs) -> CliResult {
    let g = a.gen.parse::<GenSpec>()?.generate()?;
    let text = format!("# {}\n{}", a.gen, g.to_edge_list());
    match &a.out {
        Some(path) => write_text(path, &text),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::new(1, e.to_string())),
            _ => Ok(()),
        },
    }
}

fn csv_writer(path: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(
            fs::File::create(p).map_err(|e| Failure::new(1, format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn write_rows<T: Serialize>(path: Option<&Path>, rows: &[T], header: &[&str]) -> CliResult {
    let mut w = csv_writer(path)?;
    let io_err = |e: csv::Error| Failure::new(1, e.to_string());
    if rows.is_empty() {
        w.write_record(header).map_err(io_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::new(1, e.to_string()))
}

const RATIO_HEADER: [&str; 22] = [
    "format_version",
    "trial",
    "instance",
    "n",
    "m",
    "k",
    "alg_stars",
    "alg_one_stars",
    "opt_stars",
    "opt_one_stars",
    "min_one_stars",
    "ratio",
    "bound",
    "within_bound",
    "verify_status",
    "op1",
    "op2",
    "op3",
    "init_rescues",
    "init_secs",
    "solve_secs",
    "oracle_secs",
];

const BENCH_HEADER: [&str; 12] = [
    "format_version",
    "model",
    "n",
    "m",
    "k",
    "rep",
    "stars",
    "one_stars",
    "iterations",
    "init_secs",
    "solve_secs",
    "total_secs",
];

fn thread_pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::new(1, e.to_string()))
}

fn cmd_ratio(a: RatioArgs) -> CliResult {
    if a.n_max > DEFAULT_CAP {
        return Err(Failure::new(
            3,
            format!("--n-max {} exceeds the exact-solver cap {DEFAULT_CAP}", a.n_max),
        ));
    }
    kstar::verify::alpha_of(a.k)?;
    let specs = (0..a.trials)
        .map(|t| trial_spec(a.seed, t, a.n_max))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = thread_pool(a.jobs)?.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(t, spec)| run_trial(t, spec.to_string(), &spec.generate()?, a.k, true))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    write_rows(a.csv.as_deref(), &rows, &RATIO_HEADER)?;
    let bad = rows
        .iter()
        .filter(|r| r.within_bound != Some(true) || r.verify_status.as_deref() != Some("pass"))
        .count();
    let worst = rows
        .iter()
        .filter_map(|r| r.opt_stars.filter(|&o| o > 0).map(|o| (r.alg_stars, o)))
        .max_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
    eprintln!(
        "{} trials, k = {}, bound {}, worst ratio {}, {} row(s) failing",
        rows.len(),
        a.k,
        kstar::verify::Constants::new(a.k)?.ratio_bound,
        worst.map_or("n/a".to_string(), |(s, q)| format!("{s}/{q}")),
        bad
    );
    if bad > 0 {
        return Err(Failure::new(4, "some trials violate the bound or a verifier check"));
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> CliResult {
    let model: BenchModel = a.model.parse()?;
    kstar::verify::alpha_of(a.k)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut points = Vec::new();
    for &n in &a.sizes {
        let mut times = Vec::new();
        for rep in 0..a.reps {
            let row = bench_once(model, n, a.k, rep, a.seed)?;
            times.push(row.total_secs);
            rows.push(row);
        }
        if !times.is_empty() {
            times.sort_by(f64::total_cmp);
            points.push((n as f64, times[times.len() / 2]));
        }
    }
    write_rows(a.csv.as_deref(), &rows, &BENCH_HEADER)?;
    for (n, t) in &points {
        eprintln!("n = {n}: median {:.3} ms", t * 1e3);
    }
    match log_log_slope(&points) {
        Some(s) => eprintln!("log-log slope of time vs n: {s:.2}"),
        None => eprintln!("log-log slope: n/a (needs two sizes with positive times)"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Generate(a) => cmd_generate(a),
        Command::RatioExperiment(a) => cmd_ratio(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

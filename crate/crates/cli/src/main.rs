use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use maxfs::classify::{classify, ClassifierAlgorithm, Dataset, LabelMapping};
use maxfs::harness::{self, run_sweep, summarize, SweepSpec};
use maxfs::sparse::{postprocess_result, Method, RecoveryProblem};
use maxfs::{
    parse_vector, solve_maxfs, Algorithm, ConstraintRef, ElasticMode, ElasticModel, Error,
    LinearSystem, StrategyConfig,
};

#[derive(Parser)]
#[command(name = "maxfs", version, about = "Maximum feasible subsystem heuristics")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a maximum feasible subsystem of a linear system file.
    #[command(alias = "solve")]
    Maxfs(MaxfsArgs),
    /// Train a linear classifier on a CSV dataset.
    Classify(ClassifyArgs),
    /// Find a sparse solution of A y = b.
    Recover(RecoverArgs),
    /// Run a seeded sparse-recovery benchmark sweep.
    Sweep(SweepArgs),
}

/// Candidate list limit: `inf` or a positive count.
#[derive(Clone, Copy, Debug)]
struct Limit(Option<usize>);

fn parse_limit(s: &str) -> Result<Limit, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Limit(None));
    }
    match s.parse::<usize>() {
        Ok(0) => Err("list limit must be at least 1".into()),
        Ok(k) => Ok(Limit(Some(k))),
        Err(e) => Err(format!("`{s}`: {e}")),
    }
}

#[derive(Args)]
struct MaxfsArgs {
    system: PathBuf,
    #[arg(long, default_value = "2")]
    alg: Algorithm,
    /// Candidate list limit, or `inf`.
    #[arg(long, default_value = "inf", value_parser = parse_limit)]
    k: Limit,
    /// Remove batches cut at the first change in score instead of probing.
    #[arg(long)]
    e1: bool,
    /// Remove every candidate and stop once at most L remain.
    #[arg(long, value_name = "L")]
    e2: Option<usize>,
    /// Only apply the E2 check on the first iteration.
    #[arg(long, requires = "e2")]
    e2_first_only: bool,
    /// Also elasticize finite variable bounds.
    #[arg(long)]
    full_elastic: bool,
    /// Change-point penalty factor for E1.
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    /// Maximum number of removal iterations (default: ten per constraint).
    #[arg(long)]
    iteration_cap: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    csv: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long, default_value = "2e1")]
    algorithm: ClassifierAlgorithm,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// `a=0,b=1` maps each label explicitly; a single value is class 1 with
    /// everything else class 0. Without it labels must be 0 or 1.
    #[arg(long)]
    label_map: Option<String>,
    /// Comma-separated columns to skip.
    #[arg(long, value_delimiter = ',')]
    ignore_cols: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Matrix in the linear-system text format (senses and right-hand sides
    /// are ignored).
    a_file: PathBuf,
    /// Right-hand side, one number per line.
    b_file: PathBuf,
    #[arg(long, default_value = "me1e2")]
    method: Method,
    #[arg(long, default_value = "2", value_parser = parse_limit)]
    k: Limit,
    /// ME1E2 threshold; defaults to m - 3.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    postprocess: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    s_levels: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "c,b,m,me1e2")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    postprocess: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the per-level summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MaxfsReport {
    file: String,
    algorithm: String,
    rows: usize,
    vars: usize,
    min_ulr_size: usize,
    removed: Vec<ConstraintRef>,
    final_z: f64,
    lp_count: usize,
    iterations: usize,
    removal_sizes: Vec<usize>,
    shortcut_exit: bool,
    x: Vec<f64>,
    seconds: f64,
}

#[derive(Serialize)]
struct MaxfsRow {
    file: String,
    algorithm: String,
    min_ulr_size: usize,
    lp_count: usize,
    seconds: f64,
}

#[derive(Serialize)]
struct RecoverReport {
    version: u32,
    method: Method,
    m: usize,
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    support: Vec<usize>,
    y: Vec<f64>,
    lp_count: usize,
    bp_shortcut_taken: bool,
    min_ulr: Vec<usize>,
    seconds: f64,
}

#[derive(Serialize)]
struct RecoverRow {
    method: Method,
    m: usize,
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    lp_count: usize,
    seconds: f64,
}

fn print_json<T: Serialize>(value: &T) -> maxfs::Result<()> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer(&mut lock, value).map_err(io::Error::from)?;
    writeln!(lock)?;
    Ok(())
}

fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> maxfs::Result<()> {
    harness::write_csv(fs::File::create(path)?, rows)
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn run_maxfs(args: MaxfsArgs) -> maxfs::Result<()> {
    let sys = LinearSystem::parse(&fs::read_to_string(&args.system)?)?;
    let (rows, vars) = (sys.num_rows(), sys.num_vars());
    let mode = if args.full_elastic {
        ElasticMode::Full
    } else {
        ElasticMode::Standard
    };
    let mut cfg = StrategyConfig::new(args.alg, args.k.0);
    cfg.use_e1 = args.e1;
    cfg.e2 = args.e2;
    cfg.e2_first_iteration_only = args.e2_first_only;
    cfg.penalty_factor = args.penalty;
    cfg.iteration_cap = args.iteration_cap;
    let mut model = ElasticModel::new(sys, mode)?;
    let r = solve_maxfs(&mut model, &cfg)?;
    let report = MaxfsReport {
        file: display_name(&args.system),
        algorithm: cfg.label(),
        rows,
        vars,
        min_ulr_size: r.min_ulr.len(),
        removed: r.removed,
        final_z: r.final_z,
        lp_count: r.lp_count,
        iterations: r.iterations,
        removal_sizes: r.removal_sizes,
        shortcut_exit: r.shortcut_exit,
        x: r.x,
        seconds: r.seconds,
    };
    if let Some(out) = &args.out {
        write_csv_file(
            out,
            &[MaxfsRow {
                file: report.file.clone(),
                algorithm: report.algorithm.clone(),
                min_ulr_size: report.min_ulr_size,
                lp_count: report.lp_count,
                seconds: report.seconds,
            }],
        )?;
    }
    print_json(&report)
}

fn run_classify(args: ClassifyArgs) -> maxfs::Result<()> {
    let mapping = match &args.label_map {
        Some(s) => s.parse()?,
        None => LabelMapping::ZeroOne,
    };
    let ds = Dataset::from_csv_path(&args.csv, &args.label_col, &mapping, &args.ignore_cols)?;
    let report = classify(&ds, args.epsilon, args.algorithm)?;
    if let Some(out) = &args.out {
        write_csv_file(out, &[report.row(&display_name(&args.csv))])?;
    }
    print_json(&report)
}

fn run_recover(args: RecoverArgs) -> maxfs::Result<()> {
    let sys = LinearSystem::parse(&fs::read_to_string(&args.a_file)?)?;
    let b = parse_vector(&fs::read_to_string(&args.b_file)?)?;
    let p = RecoveryProblem::from_system(&sys, b)?;
    let mut r = args.method.run(&p, args.k.0, args.ell)?;
    if args.postprocess {
        r = postprocess_result(&p, r)?;
    }
    let report = RecoverReport {
        version: harness::SCHEMA_VERSION,
        method: args.method,
        m: p.num_rows(),
        n: p.num_vars(),
        t: r.t,
        support: r.support,
        y: r.y,
        lp_count: r.lp_count,
        bp_shortcut_taken: r.bp_shortcut_taken,
        min_ulr: r.min_ulr,
        seconds: r.seconds,
    };
    if let Some(out) = &args.out {
        write_csv_file(
            out,
            &[RecoverRow {
                method: report.method,
                m: report.m,
                n: report.n,
                t: report.t,
                lp_count: report.lp_count,
                seconds: report.seconds,
            }],
        )?;
    }
    print_json(&report)
}

fn run_sweep_cmd(args: SweepArgs) -> maxfs::Result<()> {
    let mut spec = SweepSpec::new(args.m, args.n, args.s_levels, args.instances, args.seed);
    spec.methods = args.methods;
    spec.k = args.k;
    spec.ell = args.ell;
    spec.postprocess = args.postprocess;
    spec.threads = args.threads;
    let records = run_sweep(&spec)?;
    harness::write_json_lines(io::stdout().lock(), &records)?;
    let summary = summarize(&records);
    eprintln!(
        "m = {}, n = {}, CR = {:.1}%, {} instances per level",
        spec.m,
        spec.n,
        spec.compression_ratio(),
        spec.instances
    );
    eprintln!("{:>7} {:>4} {:>8} {:>8} {:>9} {:>9}", "method", "S", "mean T", "correct", "mean LPs", "mean sec");
    for row in &summary.rows {
        eprintln!(
            "{:>7} {:>4} {:>8.2} {:>8} {:>9.2} {:>9.4}",
            row.method.to_string(),
            row.s,
            row.mean_t,
            row.correct,
            row.mean_lp_count,
            row.mean_seconds
        );
    }
    for (method, s) in &summary.critical_sparsity {
        match s {
            Some(s) => eprintln!("critical sparsity {method}: {s}"),
            None => eprintln!("critical sparsity {method}: none"),
        }
    }
    if let Some(path) = &args.summary {
        let text = serde_json::to_string_pretty(&summary).map_err(io::Error::from)?;
        fs::write(path, text + "\n")?;
    }
    if let Some(out) = &args.out {
        write_csv_file(out, &records)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Maxfs(a) => run_maxfs(a),
        Command::Classify(a) => run_classify(a),
        Command::Recover(a) => run_recover(a),
        Command::Sweep(a) => run_sweep_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}

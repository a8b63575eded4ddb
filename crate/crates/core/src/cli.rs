//! The `arff` command-line tool.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data_io::{
    load_config, load_sigma_config, write_checkpoints, write_results, write_results_to, MnistPaths,
    ResultRow,
};
use crate::error::{Error, Result};
use crate::experiments::{
    parse_k_grid, sweep_k, sweep_sigma_omega, CaseData, CaseId, ErrorBar, ExperimentConfig,
    MethodKind, MethodSpec, SigmaSweepConfig,
};

pub const DATA_DIR_ENV: &str = "ARFF_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "arff", version, about = "Adaptive random Fourier features experiments")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Only print warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep K for one benchmark case and write one row per run.
    RunCase(RunCaseArgs),
    /// Fixed-distribution RFF on a noisy Gaussian over several frequency widths.
    SweepSigma(SweepSigmaArgs),
    /// A single training run.
    Train(TrainArgs),
    /// Parse and validate a configuration file.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Independent replicas per (method, K).
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Fill the wall_seconds column (makes reruns differ).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct RunCaseArgs {
    /// 1, 2, 3 or 4 (MNIST).
    case: String,
    #[command(flatten)]
    common: Common,
    /// K grid, e.g. `2..256` or `8,16,32`.
    #[arg(long)]
    k_grid: Option<String>,
    /// Comma-separated methods; sections of the config file are used when present.
    #[arg(long)]
    method: Option<String>,
    /// Directory with the four MNIST IDX files (default: $ARFF_DATA_DIR).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Write test-error checkpoints to this CSV.
    #[arg(long)]
    checkpoints: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepSigmaArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated frequency standard deviations.
    #[arg(long)]
    sigmas: Option<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    case: String,
    #[arg(long, default_value = "arff")]
    method: String,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Case used when the file has no `case` key.
    #[arg(long)]
    case: Option<String>,
    /// Validate as a sigma sweep file.
    #[arg(long)]
    sigma: bool,
}

/// Runs the tool and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.quiet);
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(quiet: bool) {
    let default = if quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default))
        .format_timestamp(None)
        .format_target(false)
        .try_init();
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn dispatch(cli: Cli) -> std::result::Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::RunCase(a) => run_case(a),
        Command::SweepSigma(a) => sweep_sigma(a),
        Command::Train(a) => train(a),
        Command::ValidateConfig(a) => validate(a),
    })
}

fn parse_case(s: &str) -> std::result::Result<CaseId, Failure> {
    s.parse::<CaseId>().map_err(Failure::Usage)
}

fn check_out(path: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(Error::io(
                p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
            ));
        }
    }
    Ok(())
}

fn experiment_config(
    case: CaseId,
    common: &Common,
    k_grid: Option<&str>,
    methods: Option<&str>,
) -> std::result::Result<ExperimentConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => {
            let c = load_config(path, Some(case))?;
            if c.case != case {
                return Err(Failure::Usage(format!(
                    "config is for case {} but case {case} was requested",
                    c.case
                )));
            }
            c
        }
        None => ExperimentConfig::defaults(case),
    };
    if let Some(spec) = k_grid {
        config.k_grid = parse_k_grid(spec).map_err(Failure::Usage)?;
    }
    if let Some(list) = methods {
        let mut chosen = Vec::new();
        for name in list.split(',').map(str::trim) {
            let kind: MethodKind = name.parse().map_err(Failure::Usage)?;
            let from_file: Vec<MethodSpec> =
                config.methods.iter().filter(|m| m.kind == kind).cloned().collect();
            if from_file.is_empty() || common.config.is_none() {
                chosen.push(MethodSpec::defaults(case, kind));
            } else {
                chosen.extend(from_file);
            }
        }
        config.methods = chosen;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(r) = common.replicas {
        config.replicas = r;
    }
    if let Some(n) = common.n_train {
        config.n_train = n;
    }
    if let Some(n) = common.n_test {
        config.n_test = n;
    }
    config.validate()?;
    Ok(config)
}

fn mnist_dir(flag: &Option<PathBuf>) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| {
            Error::io(
                format!("${DATA_DIR_ENV}"),
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "MNIST directory not given (use --data-dir or set ARFF_DATA_DIR)",
                ),
            )
        })
}

fn run_sweep(
    config: &ExperimentConfig,
    data_dir: &Option<PathBuf>,
) -> Result<crate::experiments::SweepOutput> {
    match CaseData::for_case(config.case) {
        Some(data) => sweep_k(config, &data),
        None => {
            let dir = mnist_dir(data_dir)?;
            log::info!("loading MNIST from {}", dir.display());
            let (train, test) = MnistPaths::in_dir(&dir).load()?;
            sweep_k(config, &CaseData::Fixed { train: &train, test: &test })
        }
    }
}

fn run_case(a: RunCaseArgs) -> std::result::Result<(), Failure> {
    let case = parse_case(&a.case)?;
    check_out(&a.common.out)?;
    check_out(&a.checkpoints)?;
    let config = experiment_config(case, &a.common, a.k_grid.as_deref(), a.method.as_deref())?;
    log::info!(
        "case {case}: {} method(s), K = {:?}, {} replica(s), seed {}",
        config.methods.len(),
        config.k_grid,
        config.replicas,
        config.seed
    );
    let out = run_sweep(&config, &a.data_dir)?;
    log_summary(&out.rows);
    emit(&out.rows, &a.common)?;
    if let Some(path) = &a.checkpoints {
        write_checkpoints(&out.checkpoints, path)?;
    }
    Ok(())
}

fn sweep_sigma(a: SweepSigmaArgs) -> std::result::Result<(), Failure> {
    check_out(&a.common.out)?;
    let mut config = match &a.common.config {
        Some(p) => load_sigma_config(p)?,
        None => SigmaSweepConfig::default(),
    };
    if let Some(list) = &a.sigmas {
        config.sigmas = list
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("bad sigma list `{list}`")))?;
    }
    if let Some(s) = a.common.seed {
        config.seed = s;
    }
    if let Some(r) = a.common.replicas {
        config.replicas = r;
    }
    if let Some(n) = a.common.n_train {
        config.n_train = n;
    }
    if let Some(n) = a.common.n_test {
        config.n_test = n;
    }
    config.validate()?;
    let rows = sweep_sigma_omega(&config)?;
    log_summary(&rows);
    emit(&rows, &a.common)?;
    Ok(())
}

fn train(a: TrainArgs) -> std::result::Result<(), Failure> {
    let case = parse_case(&a.case)?;
    check_out(&a.common.out)?;
    let mut config = experiment_config(case, &a.common, None, Some(&a.method))?;
    config.k_grid = vec![a.k];
    config.methods.truncate(1);
    if a.common.replicas.is_none() {
        config.replicas = 1;
    }
    config.validate()?;
    let out = run_sweep(&config, &a.data_dir)?;
    emit(&out.rows, &a.common)?;
    Ok(())
}

fn validate(a: ValidateArgs) -> std::result::Result<(), Failure> {
    if a.sigma {
        let c = load_sigma_config(&a.config)?;
        println!("ok: sigma sweep over {} value(s)", c.sigmas.len());
        return Ok(());
    }
    let hint = a.case.as_deref().map(parse_case).transpose()?;
    let c = load_config(&a.config, hint)?;
    let names: Vec<&str> = c.methods.iter().map(|m| m.name.as_str()).collect();
    println!(
        "ok: case {}, methods {}, K = {:?}, {} replica(s)",
        c.case,
        names.join(","),
        c.k_grid,
        c.replicas
    );
    Ok(())
}

fn emit(rows: &[ResultRow], common: &Common) -> Result<()> {
    match &common.out {
        Some(path) => {
            write_results(rows, path, common.timing)?;
            log::info!("wrote {} row(s) to {}", rows.len(), path.display());
            Ok(())
        }
        None => write_results_to(rows, std::io::stdout().lock(), common.timing),
    }
}

fn log_summary(rows: &[ResultRow]) {
    let mut groups: BTreeMap<(&str, &str, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.case, &r.method, r.k)).or_default().push(r.error);
    }
    for ((case, method, k), errors) in groups {
        let bar = ErrorBar::from_samples(&errors);
        log::info!(
            "case {case} {method} K={k}: mean {:.4e}, std {:.2e}, interval [{:.4e}, {:.4e}] over {}",
            bar.mean,
            bar.std,
            bar.lower,
            bar.upper,
            bar.replicas
        );
    }
}

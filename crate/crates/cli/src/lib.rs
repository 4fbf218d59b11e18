//! Command-line front end for `bichan`.
//!
//! Exit codes: 0 success, 1 property violation, 2 input error,
//! 3 self-check failure, 4 alphabet cap exceeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use bichan::analysis::SANDWICH_TOLERANCE;
use bichan::curves::{curve_table, DEFAULT_STEP};
use bichan::fmt::sig;
use bichan::harness::{run_verification, Sampler, TrialConfig};
use bichan::polar::{conservation_residual, nodes_to_csv, polarize_with, PolarOptions, DEFAULT_ALPHABET_CAP};
use bichan::{analyze, Channel, Exec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SELF_CHECK: i32 = 3;
pub const EXIT_CAP: i32 = 4;

/// Largest acceptable conservation residual for `polarize`, in bits.
pub const CONSERVATION_TOLERANCE: f64 = 1e-8;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BICHAN_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] bichan::Error),
    #[error("{0}")]
    Violation(String),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Core(bichan::Error::AlphabetCap { .. }) => EXIT_CAP,
            CliError::Core(_) => EXIT_INPUT,
            CliError::Violation(_) => EXIT_VIOLATION,
            CliError::SelfCheck(_) => EXIT_SELF_CHECK,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bichan", version, about = "Capacity, Bhattacharyya parameter and capacity bounds of binary-input channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a single channel file.
    Analyze(AnalyzeArgs),
    /// Check the bounds on randomly sampled channels.
    Verify(VerifyArgs),
    /// Emit the bound curves as CSV.
    Curves(CurvesArgs),
    /// Apply the polarization transforms recursively.
    Polarize(PolarizeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Channel file: {"outputs": N, "p": [...], "q": [...]}
    pub file: PathBuf,
    /// Also write the analysis as JSON.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Output alphabet sizes, used round-robin.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,8,16")]
    pub sizes: Vec<usize>,
    /// dirichlet_uniform, sparse or near_degenerate.
    #[arg(long, default_value = "dirichlet_uniform")]
    pub sampler: Sampler,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// Destination file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolarizeArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Destination file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Largest output alphabet allowed for an unmerged transform.
    #[arg(long, default_value_t = DEFAULT_ALPHABET_CAP)]
    pub cap: usize,
}

/// Reads `BICHAN_THREADS`. `None` means use the default pool.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Input(format!("{THREADS_ENV}: {e}"))),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Input(format!("{THREADS_ENV}: expected a positive integer, got {s:?}"))),
        },
    }
}

/// Runs `f` inside a pool sized by `BICHAN_THREADS`.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    let limit = thread_limit()?;
    #[cfg(feature = "parallel")]
    if let Some(n) = limit {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Input(format!("{THREADS_ENV}: {e}")))?;
        return Ok(pool.install(f));
    }
    let _ = limit;
    Ok(f())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Curves(a) => cmd_curves(&a, out),
        Command::Polarize(a) => cmd_polarize(&a, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match with_thread_limit(|| {
        let mut buf = Vec::new();
        let r = run(cli, &mut buf);
        (r, buf)
    }) {
        Ok((r, buf)) => {
            let _ = out.write_all(&buf);
            match r {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Channel::from_json_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let w = load_channel(&args.file)?;
    let a = analyze(&w);
    let b = &a.bounds;
    let rows: [(&str, String); 12] = [
        ("outputs", a.n_outputs.to_string()),
        ("z", sig(a.z)),
        ("sym_capacity_bits", sig(a.sym_capacity)),
        ("capacity_bits", sig(a.capacity)),
        ("alpha_star", sig(a.alpha_star)),
        ("arikan_lower", sig(b.arikan_lower)),
        ("gen_lower", sig(b.gen_lower)),
        ("gen_upper", sig(b.gen_upper)),
        ("arikan_upper", sig(b.arikan_upper)),
        ("lower_margin", sig(a.lower_margin)),
        ("upper_margin", sig(a.upper_margin)),
        ("solver_iterations", a.solver.iterations.to_string()),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<18} {v}").map_err(stdout_err)?;
    }
    if let Some(path) = &args.json {
        let mut s = serde_json::to_string_pretty(&a).expect("analysis serializes");
        s.push('\n');
        write_file(path, &s)?;
    }
    if !a.sandwich_holds() {
        return Err(CliError::SelfCheck(format!(
            "capacity {} outside [{}, {}] beyond {SANDWICH_TOLERANCE}",
            sig(a.capacity),
            sig(b.gen_lower),
            sig(b.gen_upper)
        )));
    }
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = TrialConfig {
        seed: args.seed,
        trials: args.trials,
        output_sizes: args.sizes.clone(),
        sampler: args.sampler,
    };
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let report = run_verification(&cfg)?;
    if let Some(path) = &args.report {
        let mut s = report.to_json_pretty();
        s.push('\n');
        write_file(path, &s)?;
    }
    let lines: [(&str, String); 8] = [
        ("trials", report.trials.to_string()),
        ("violations", report.violations.len().to_string()),
        ("worst_lower_margin", sig(report.worst_lower_margin)),
        ("worst_upper_margin", sig(report.worst_upper_margin)),
        ("worst_prior_bound_margin", sig(report.worst_prior_bound_margin)),
        ("z_range", format!("{} {}", sig(report.z_min), sig(report.z_max))),
        ("cross_checked", report.cross_checked.to_string()),
        ("max_solver_disagreement", sig(report.max_solver_disagreement)),
    ];
    for (k, v) in lines {
        writeln!(out, "{k:<24} {v}").map_err(stdout_err)?;
    }
    if report.passed() {
        return Ok(());
    }
    for v in report.violations.iter().take(10) {
        writeln!(out, "violation trial={} property={} margin={}", v.trial, v.property, sig(v.margin))
            .map_err(stdout_err)?;
    }
    Err(CliError::Violation(format!(
        "{} property violation(s) in {} trials",
        report.violations.len(),
        report.trials
    )))
}

pub fn cmd_curves(args: &CurvesArgs, out: &mut dyn Write) -> Result<()> {
    let table = curve_table(args.step)?;
    if let Some(bad) = table.rows.iter().find_map(|b| b.check().err()) {
        return Err(CliError::Violation(bad));
    }
    let csv = table.to_csv();
    match &args.out {
        Some(path) => write_file(path, &csv),
        None => out.write_all(csv.as_bytes()).map_err(stdout_err),
    }
}

pub fn cmd_polarize(args: &PolarizeArgs, out: &mut dyn Write) -> Result<()> {
    let w = load_channel(&args.file)?;
    let opts = PolarOptions {
        cap: args.cap,
        exec: Exec::default(),
    };
    let nodes = polarize_with(&w, args.depth, opts)?;
    let csv = nodes_to_csv(&nodes);
    let residual = conservation_residual(&w, &nodes);
    let summary = format!("conservation_residual_bits {}\n", sig(residual));
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            out.write_all(summary.as_bytes()).map_err(stdout_err)?;
        }
        None => {
            out.write_all(csv.as_bytes()).map_err(stdout_err)?;
            eprint!("{summary}");
        }
    }
    if residual > CONSERVATION_TOLERANCE {
        return Err(CliError::Violation(format!(
            "conservation residual {} exceeds {CONSERVATION_TOLERANCE}",
            sig(residual)
        )));
    }
    if let Some(n) = nodes.iter().find(|n| n.sandwich_margin() < -SANDWICH_TOLERANCE) {
        return Err(CliError::Violation(format!(
            "bound sandwich fails at node {} (margin {})",
            n.path,
            sig(n.sandwich_margin())
        )));
    }
    Ok(())
}

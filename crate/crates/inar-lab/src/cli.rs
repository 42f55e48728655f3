//! Command line front end.
//!
//! Subcommands map onto the library one to one: `simulate`, `estimate`,
//! `diag`, `limit-sample`, `mc-clt`, `mc-df`. Every run resolves its full
//! configuration (defaults included) and records it in the output header
//! or metadata, so results can be reproduced from the artifact alone.
//!
//! Exit codes: 0 on success, 1 when a Monte Carlo experiment reports
//! `passed = false` or a runtime failure occurs, 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::cls::{accumulate, building_blocks, det_scaling, estimate, sum_sq_scaling, Lag};
use crate::error::Error;
use crate::innovations::{stream_rng, InnovationSpec};
use crate::limit_laws::sample_df;
use crate::montecarlo::{
    run_clt_experiment, run_df_experiment, McConfig, McReport, DEFAULT_DF_ORACLE_SIZE,
    DEFAULT_DF_STEPS,
};
use crate::process::{simulate, InarParams, SamplePath};

/// Seed used when `--seed` is omitted; fixed rather than drawn from
/// entropy so that bare invocations are reproducible.
pub const DEFAULT_SEED: u64 = 42;

/// Environment fallback for `--threads`.
pub const THREADS_ENV_VAR: &str = "INAR_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "inar-lab",
    version,
    about = "Simulation and conditional least squares estimation for unstable INAR(2) series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one path from zero initial values
    Simulate(SimulateArgs),
    /// Closed form least squares estimate for a path file
    Estimate(EstimateArgs),
    /// Scaling diagnostics of a path (determinant, sums of squares, walk functionals)
    Diag(DiagArgs),
    /// Draw from the unit-root limit functional
    LimitSample(LimitSampleArgs),
    /// Monte Carlo check of the Gaussian limit law, coefficients (1, 0)
    McClt(McCltArgs),
    /// Monte Carlo check of the unit-root limit law, coefficients (0, 1)
    McDf(McDfArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Lag-1 thinning coefficient in [0, 1]
    #[arg(long)]
    alpha: f64,
    /// Lag-2 thinning coefficient in [0, 1]
    #[arg(long)]
    beta: f64,
    /// Innovation law: poisson:1.0 | bernoulli:0.5 | geometric:0.5 | det:3
    #[arg(long)]
    innov: String,
    /// Number of observations (at least 1)
    #[arg(long)]
    n: usize,
    /// Master seed (fixed default 42, not entropy)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Path CSV file with header k,x (comment lines start with #)
    #[arg(long)]
    input: PathBuf,
    /// Known innovation mean (positive)
    #[arg(long)]
    mu: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct DiagArgs {
    /// Path CSV file; alternatively pass --alpha/--beta/--innov/--n
    #[arg(long)]
    input: Option<PathBuf>,
    /// Lag-1 thinning coefficient (simulated input)
    #[arg(long)]
    alpha: Option<f64>,
    /// Lag-2 thinning coefficient (simulated input)
    #[arg(long)]
    beta: Option<f64>,
    /// Innovation law (simulated input)
    #[arg(long)]
    innov: Option<String>,
    /// Number of observations (simulated input)
    #[arg(long)]
    n: Option<usize>,
    /// Master seed for simulated input
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Known innovation mean (positive)
    #[arg(long)]
    mu: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct LimitSampleArgs {
    /// Grid resolution (at least 100)
    #[arg(long, default_value_t = DEFAULT_DF_STEPS)]
    steps: u32,
    /// Number of draws
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Master seed (fixed default 42, not entropy)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format (one plain value per line when omitted)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct McSharedArgs {
    /// Innovation law: poisson:1.0 | bernoulli:0.5 | geometric:0.5 | det:3
    #[arg(long)]
    innov: String,
    /// Path length per replication (at least 10)
    #[arg(long)]
    n: usize,
    /// Number of replications (at least 2)
    #[arg(long)]
    reps: usize,
    /// Master seed (fixed default 42, not entropy)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (default: INAR_LAB_THREADS, then all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct McCltArgs {
    #[command(flatten)]
    shared: McSharedArgs,
}

#[derive(Args, Debug)]
struct McDfArgs {
    #[command(flatten)]
    shared: McSharedArgs,
    /// Oracle grid resolution (at least 100)
    #[arg(long, default_value_t = DEFAULT_DF_STEPS)]
    steps: u32,
    /// Oracle draw count (at least 2)
    #[arg(long = "oracle-size", default_value_t = DEFAULT_DF_ORACLE_SIZE)]
    oracle_size: usize,
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

type CliResult<T> = Result<T, CliError>;

/// Sorts library errors into usage problems (bad values on the command
/// line) and genuine runtime failures.
fn map_lib(e: Error) -> CliError {
    match e {
        Error::InvalidConfig(_)
        | Error::Parse { .. }
        | Error::InvalidInnovation { .. }
        | Error::InvalidCoefficient { .. }
        | Error::InvalidProbability { .. }
        | Error::ZeroMeanInnovation => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Entry point taking the raw argument vector (program name first);
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // 0 for --help / --version, 2 for genuine usage errors.
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Diag(args) => cmd_diag(args),
        Command::LimitSample(args) => cmd_limit_sample(args),
        Command::McClt(args) => cmd_mc_clt(args),
        Command::McDf(args) => cmd_mc_df(args),
    }
}

fn parse_innov(text: &str) -> CliResult<InnovationSpec> {
    text.parse::<InnovationSpec>().map_err(map_lib)
}

fn parse_params(alpha: f64, beta: f64) -> CliResult<InarParams> {
    InarParams::new(alpha, beta).map_err(map_lib)
}

fn check_mu(mu: f64) -> CliResult<f64> {
    if mu.is_finite() && mu > 0.0 {
        Ok(mu)
    } else {
        Err(usage(format!("--mu must be positive and finite, got {mu}")))
    }
}

fn write_out(output: Option<&Path>, contents: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, contents).map_err(|e| CliError::Runtime(e.into())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn origin_json(path: &SamplePath) -> serde_json::Value {
    path.origin()
        .map(|o| serde_json::to_value(o).expect("origin serializes"))
        .unwrap_or(serde_json::Value::Null)
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<i32> {
    let params = parse_params(args.alpha, args.beta)?;
    let spec = parse_innov(&args.innov)?;
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let path = simulate(&params, &spec, args.n, args.seed).map_err(map_lib)?;
    let contents = match args.format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# inar-lab simulate");
            let _ = writeln!(out, "# config: {}", origin_json(&path));
            let _ = writeln!(out, "k,x");
            for (i, v) in path.values().iter().enumerate() {
                let _ = writeln!(out, "{},{}", i + 1, v);
            }
            out
        }
        Format::Json => {
            let mut out = serde_json::to_string_pretty(&path).expect("path serializes");
            out.push('\n');
            out
        }
    };
    write_out(args.output.as_deref(), &contents)?;
    Ok(0)
}

/// Reads a path CSV: `#` comments and blank lines are skipped, the first
/// payload line must be the header `k,x`, and rows must be numbered
/// consecutively from 1.
fn read_path_csv(file: &Path) -> Result<SamplePath, Error> {
    let text = fs::read_to_string(file)?;
    let mut values: Vec<u64> = Vec::new();
    let mut saw_header = false;
    let parse_err = |line_no: usize, detail: String| Error::Parse {
        what: "path file",
        detail: format!("line {line_no}: {detail}"),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let line_no = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "k,x" {
                return Err(parse_err(
                    line_no,
                    format!("expected header k,x, got {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let (k_text, x_text) = line
            .split_once(',')
            .ok_or_else(|| parse_err(line_no, "expected k,x row".into()))?;
        let k: usize = k_text
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad index {k_text:?}")))?;
        let x: u64 = x_text
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad count {x_text:?}")))?;
        if k != values.len() + 1 {
            return Err(parse_err(
                line_no,
                format!("indices must run 1, 2, ... without gaps, got {k}"),
            ));
        }
        values.push(x);
    }
    if !saw_header {
        return Err(Error::Parse {
            what: "path file",
            detail: "missing header k,x".into(),
        });
    }
    if values.is_empty() {
        return Err(Error::Parse {
            what: "path file",
            detail: "no observations".into(),
        });
    }
    Ok(SamplePath::from_values(values))
}

fn cmd_estimate(args: EstimateArgs) -> CliResult<i32> {
    let mu = check_mu(args.mu)?;
    let path = read_path_csv(&args.input).map_err(map_lib)?;
    let neq = accumulate(&path, mu).map_err(map_lib)?;
    let est = estimate(&path, mu).map_err(|e| match e {
        e @ Error::CollinearRegressors { .. } => CliError::Runtime(e),
        other => map_lib(other),
    })?;
    let contents = match args.format {
        Format::Json => {
            let value = json!({
                "alpha_hat": est.alpha_hat(),
                "beta_hat": est.beta_hat(),
                "branch": est.branch_name(),
                "det": neq.det(),
                "n": neq.n,
                "mu": mu,
            });
            let mut out = serde_json::to_string_pretty(&value).expect("json value");
            out.push('\n');
            out
        }
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            format!(
                "alpha_hat,beta_hat,branch,det,n,mu\n{},{},{},{},{},{}\n",
                opt(est.alpha_hat()),
                opt(est.beta_hat()),
                est.branch_name(),
                neq.det(),
                neq.n,
                mu,
            )
        }
    };
    write_out(args.output.as_deref(), &contents)?;
    Ok(0)
}

fn cmd_diag(args: DiagArgs) -> CliResult<i32> {
    let mu = check_mu(args.mu)?;
    let sim_flags =
        args.alpha.is_some() || args.beta.is_some() || args.innov.is_some() || args.n.is_some();
    let (path, source) = match (&args.input, sim_flags) {
        (Some(file), false) => {
            let path = read_path_csv(file).map_err(map_lib)?;
            (path, json!({ "input": file.display().to_string() }))
        }
        (None, true) => {
            let (alpha, beta, innov, n) = match (args.alpha, args.beta, &args.innov, args.n) {
                (Some(a), Some(b), Some(i), Some(n)) => (a, b, i, n),
                _ => {
                    return Err(usage(
                        "simulated diagnostics need all of --alpha, --beta, --innov, --n",
                    ))
                }
            };
            let params = parse_params(alpha, beta)?;
            let spec = parse_innov(innov)?;
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let path = simulate(&params, &spec, n, args.seed).map_err(map_lib)?;
            let source = origin_json(&path);
            (path, source)
        }
        (Some(_), true) => return Err(usage("pass either --input or simulation flags, not both")),
        (None, false) => return Err(usage("pass --input or --alpha/--beta/--innov/--n")),
    };
    let neq = accumulate(&path, mu).map_err(map_lib)?;
    let blocks = building_blocks(&path, mu);
    let sum1 = sum_sq_scaling(&path, Lag::One, 3.0).map_err(map_lib)?;
    let sum2 = sum_sq_scaling(&path, Lag::Two, 3.0).map_err(map_lib)?;
    let d4 = det_scaling(&neq, 4.0);
    let d5 = det_scaling(&neq, 5.0);
    let contents = match args.format {
        Format::Json => {
            let value = json!({
                "source": source,
                "n": path.len(),
                "mu": mu,
                "det": neq.det(),
                "det_over_n4": d4,
                "det_over_n5": d5,
                "sum_sq_lag1_over_n3": sum1,
                "sum_sq_lag2_over_n3": sum2,
                "building_blocks": blocks,
            });
            let mut out = serde_json::to_string_pretty(&value).expect("json value");
            out.push('\n');
            out
        }
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# inar-lab diag");
            let _ = writeln!(out, "# source: {source}");
            let _ = writeln!(
                out,
                "n,mu,det,det_over_n4,det_over_n5,sum_sq_lag1_over_n3,sum_sq_lag2_over_n3,\
                 s1,s2,s3,s4,s5,s6,s7,s8,s9"
            );
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                path.len(),
                mu,
                neq.det(),
                d4,
                d5,
                sum1,
                sum2
            );
            for b in blocks {
                let _ = write!(out, ",{b}");
            }
            out.push('\n');
            out
        }
    };
    write_out(args.output.as_deref(), &contents)?;
    Ok(0)
}

fn cmd_limit_sample(args: LimitSampleArgs) -> CliResult<i32> {
    if args.steps < 100 {
        return Err(usage("--steps must be at least 100"));
    }
    if args.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let values: Vec<f64> = (0..args.reps)
        .map(|r| {
            let mut rng = stream_rng(args.seed, r as u64);
            sample_df(args.steps, &mut rng).value
        })
        .collect();
    let config = json!({ "steps": args.steps, "reps": args.reps, "seed": args.seed });
    let contents = match args.format {
        None => {
            let mut out = String::new();
            for v in &values {
                let _ = writeln!(out, "{v}");
            }
            out
        }
        Some(Format::Csv) => {
            let mut out = String::new();
            let _ = writeln!(out, "# inar-lab limit-sample");
            let _ = writeln!(out, "# config: {config}");
            let _ = writeln!(out, "rep,value");
            for (r, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{r},{v}");
            }
            out
        }
        Some(Format::Json) => {
            let value = json!({ "config": config, "values": values });
            let mut out = serde_json::to_string_pretty(&value).expect("json value");
            out.push('\n');
            out
        }
    };
    write_out(args.output.as_deref(), &contents)?;
    Ok(0)
}

/// `--threads`, then the environment variable, then the rayon default.
fn resolve_threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV_VAR) {
            Ok(text) => Some(text.parse::<usize>().map_err(|_| {
                usage(format!(
                    "{THREADS_ENV_VAR} must be a positive integer, got {text:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(usage("worker thread count must be at least 1"));
    }
    Ok(threads)
}

fn run_in_pool<F>(threads: Option<usize>, job: F) -> CliResult<McReport>
where
    F: FnOnce() -> Result<McReport, Error> + Send,
{
    let report = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| {
                    CliError::Runtime(Error::InvalidConfig(format!(
                        "cannot build worker pool: {e}"
                    )))
                })?;
            pool.install(job)
        }
        None => job(),
    };
    report.map_err(map_lib)
}

fn emit_report(shared: &McSharedArgs, report: &McReport) -> CliResult<i32> {
    let contents = match shared.format {
        Format::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        Format::Csv => {
            let config = serde_json::to_string(&report.config).expect("config serializes");
            let mut out = String::new();
            let _ = writeln!(out, "# inar-lab monte carlo report");
            let _ = writeln!(out, "# config: {config}");
            let _ = writeln!(out, "# skipped: {}", report.skipped);
            let _ = writeln!(out, "# ks_stat: {}", report.ks_stat);
            let _ = writeln!(out, "# ks_threshold: {}", report.ks_threshold);
            let _ = writeln!(out, "# line_concentration: {}", report.line_concentration);
            let _ = writeln!(out, "# passed: {}", report.passed);
            let _ = writeln!(out, "rep,coord1,coord2");
            for (r, s) in report.samples.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", r, s[0], s[1]);
            }
            out
        }
    };
    write_out(shared.output.as_deref(), &contents)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_mc_clt(args: McCltArgs) -> CliResult<i32> {
    let spec = parse_innov(&args.shared.innov)?;
    let config = McConfig::clt(spec, args.shared.n, args.shared.reps, args.shared.seed);
    config.validate().map_err(map_lib)?;
    let threads = resolve_threads(args.shared.threads)?;
    let report = run_in_pool(threads, || run_clt_experiment(&config))?;
    emit_report(&args.shared, &report)
}

fn cmd_mc_df(args: McDfArgs) -> CliResult<i32> {
    let spec = parse_innov(&args.shared.innov)?;
    let mut config =
        McConfig::dickey_fuller(spec, args.shared.n, args.shared.reps, args.shared.seed);
    config.df_steps = args.steps;
    config.df_oracle_size = args.oracle_size;
    config.validate().map_err(map_lib)?;
    let threads = resolve_threads(args.shared.threads)?;
    let report = run_in_pool(threads, || run_df_experiment(&config))?;
    emit_report(&args.shared, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("inar-lab").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_flags_and_bad_values_are_usage_errors() {
        assert_eq!(run_args(&["simulate", "--bogus"]), 2);
        assert_eq!(
            run_args(&[
                "simulate",
                "--alpha",
                "1.5",
                "--beta",
                "0",
                "--innov",
                "poisson:1",
                "--n",
                "5"
            ]),
            2
        );
        assert_eq!(
            run_args(&[
                "simulate", "--alpha", "1", "--beta", "0", "--innov", "normal:1", "--n", "5"
            ]),
            2
        );
        assert_eq!(
            run_args(&[
                "simulate",
                "--alpha",
                "1",
                "--beta",
                "0",
                "--innov",
                "poisson:1",
                "--n",
                "0"
            ]),
            2
        );
        assert_eq!(
            run_args(&["estimate", "--input", "/nonexistent.csv", "--mu", "-1"]),
            2
        );
        assert_eq!(run_args(&["limit-sample", "--steps", "99"]), 2);
        assert_eq!(run_args(&["no-such-command"]), 2);
    }

    #[test]
    fn zero_mean_innovations_are_usage_errors() {
        assert_eq!(
            run_args(&["simulate", "--alpha", "1", "--beta", "0", "--innov", "det:0", "--n", "5"]),
            2
        );
    }

    #[test]
    fn missing_input_files_are_runtime_errors() {
        assert_eq!(
            run_args(&["estimate", "--input", "/nonexistent-path.csv", "--mu", "1"]),
            1
        );
    }

    #[test]
    fn diag_requires_exactly_one_input_source() {
        assert_eq!(run_args(&["diag", "--mu", "1"]), 2);
        assert_eq!(
            run_args(&["diag", "--mu", "1", "--input", "x.csv", "--alpha", "1"]),
            2
        );
        assert_eq!(
            run_args(&["diag", "--mu", "1", "--alpha", "1", "--beta", "0"]),
            2
        );
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run_args(&["--help"]), 0);
        assert_eq!(run_args(&["--version"]), 0);
        assert_eq!(run_args(&["simulate", "--help"]), 0);
    }

    #[test]
    fn path_csv_round_trips_through_parser() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("path.csv");
        fs::write(&file, "# comment\nk,x\n1,4\n2,0\n3,7\n").unwrap();
        let path = read_path_csv(&file).unwrap();
        assert_eq!(path.values(), &[4, 0, 7]);
    }

    #[test]
    fn path_csv_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            ("empty.csv", ""),
            ("noheader.csv", "1,4\n"),
            ("gap.csv", "k,x\n1,4\n3,5\n"),
            ("negative.csv", "k,x\n1,-4\n"),
            ("float.csv", "k,x\n1,4.5\n"),
            ("junk.csv", "k,x\nfoo\n"),
            ("norows.csv", "k,x\n"),
        ];
        for (name, contents) in cases {
            let file = dir.path().join(name);
            fs::write(&file, contents).unwrap();
            assert!(read_path_csv(&file).is_err(), "accepted {name}");
        }
    }
}

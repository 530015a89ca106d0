//! `pmp`: plan, classify, verify and generate instances from the command line.
//!
//! Exit codes: 0 on success, 1 when verification finds a failing property,
//! 2 on usage or validation errors.

use std::fs;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pmp_core::io::{trajectory_json, write_trajectory_csv, InstanceFile};
use pmp_core::verifier::{generate_queries, run_suite, InstanceSpec, SuiteOptions, SuiteReport};
use pmp_core::{classify, plan, validate_query_pair, PlanError, QueryPair, Trajectory};
use pmp_core::{DEFAULT_DISTINCT_TOL, DEFAULT_PROJ_TOL};

#[derive(Parser)]
#[command(name = "pmp", version, about = "Collision-free motion planning among two point obstacles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrajectoryFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a path for an instance file and write the sampled trajectory.
    Plan {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
        proj_tol: f64,
        #[arg(long, value_enum, default_value_t = TrajectoryFormat::Csv)]
        format: TrajectoryFormat,
    },
    /// Print the region index `i j ell` of an instance.
    Classify {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
        proj_tol: f64,
    },
    /// Plan and verify seeded random instances.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
        proj_tol: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.02)]
        min_sep: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Write seeded random instance files into a directory.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0.02)]
        min_sep: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        output_dir: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Plan(PlanError),
    Io(PathBuf, std::io::Error),
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        CliError::Plan(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Plan(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

fn load_query(path: &Path) -> Result<QueryPair, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let q = InstanceFile::from_json(&text)?.to_query()?;
    validate_query_pair(&q, DEFAULT_DISTINCT_TOL)?;
    Ok(q)
}

fn cmd_plan(
    input: &Path,
    output: &Path,
    samples: usize,
    proj_tol: f64,
    format: TrajectoryFormat,
) -> Result<ExitCode, CliError> {
    let q = load_query(input)?;
    let path = plan(&q, proj_tol)?;
    let rows = path.sample(samples)?;
    let mut bytes = Vec::new();
    match format {
        TrajectoryFormat::Csv => write_trajectory_csv(&mut bytes, &rows).map_err(io_err(output))?,
        TrajectoryFormat::Json => {
            let doc = trajectory_json(&rows, Some(path.region()));
            serde_json::to_writer_pretty(&mut bytes, &doc).expect("serializable");
            bytes.push(b'\n');
        }
    }
    fs::write(output, bytes).map_err(io_err(output))?;
    emit(&path.region().to_string())?;
    Ok(ExitCode::SUCCESS)
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io("<stdout>".into(), e)),
        _ => Ok(()),
    }
}

fn cmd_classify(input: &Path, proj_tol: f64) -> Result<ExitCode, CliError> {
    let q = load_query(input)?;
    emit(&classify(&q, proj_tol)?.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn text_report(suite: &SuiteReport) -> Result<String, std::fmt::Error> {
    let mut out = String::new();
    let r = &suite.report;
    let c = &suite.census;
    let expected = 2 * c.n + 1;
    writeln!(out, "instances: {}", r.instances)?;
    writeln!(out, "samples checked: {}", r.stats.samples_checked)?;
    writeln!(out, "failures: {}", r.failures.len())?;
    for (property, count) in r.failure_counts() {
        writeln!(out, "  {property:?}: {count}")?;
    }
    writeln!(out, "min separation: {:.6e}", r.stats.min_separation)?;
    writeln!(out, "continuity constant K: {:.6}", r.stats.continuity_k)?;
    let labels: Vec<String> = c.attainable.iter().map(usize::to_string).collect();
    writeln!(
        out,
        "region census (n={}, d={}): {} attainable regions {{{}}}, expected {}",
        c.n,
        c.d,
        c.attainable.len(),
        labels.join(","),
        expected
    )?;
    let hist: Vec<String> = r
        .stats
        .region_histogram
        .iter()
        .map(|(ell, count)| format!("ell={ell}:{count}"))
        .collect();
    writeln!(out, "random region histogram: {}", hist.join(" "))?;
    writeln!(out, "result: {}", if suite.passed() { "PASS" } else { "FAIL" })?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    n: usize,
    d: usize,
    seed: u64,
    count: usize,
    samples: usize,
    proj_tol: f64,
    scale: f64,
    min_sep: f64,
    format: ReportFormat,
) -> Result<ExitCode, CliError> {
    let mut spec = InstanceSpec::new(d, n, seed, count);
    spec.scale = scale;
    spec.min_sep = min_sep;
    let opts = SuiteOptions {
        samples,
        proj_tol,
        ..Default::default()
    };
    let suite = run_suite(&spec, &opts)?;
    match format {
        ReportFormat::Text => emit(text_report(&suite).expect("formatting a String").trim_end())?,
        ReportFormat::Json => {
            let doc = serde_json::json!({
                "passed": suite.passed(),
                "attainable_regions": suite.census.attainable.len(),
                "expected_regions": 2 * n + 1,
                "suite": suite,
            });
            emit(&serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
    }
    Ok(if suite.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_random(
    spec: &InstanceSpec,
    output_dir: &Path,
) -> Result<ExitCode, CliError> {
    let queries = generate_queries(spec)?;
    fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    for (k, q) in queries.iter().enumerate() {
        let path = output_dir.join(format!("instance_{k:05}.json"));
        let mut file = fs::File::create(&path).map_err(io_err(&path))?;
        writeln!(file, "{}", InstanceFile::from_query(q).to_json()).map_err(io_err(&path))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Plan {
            input,
            output,
            samples,
            proj_tol,
            format,
        } => cmd_plan(&input, &output, samples, proj_tol, format),
        Command::Classify { input, proj_tol } => cmd_classify(&input, proj_tol),
        Command::Verify {
            n,
            d,
            seed,
            count,
            samples,
            proj_tol,
            scale,
            min_sep,
            format,
        } => cmd_verify(n, d, seed, count, samples, proj_tol, scale, min_sep, format),
        Command::Random {
            n,
            d,
            seed,
            count,
            min_sep,
            scale,
            output_dir,
        } => {
            let mut spec = InstanceSpec::new(d, n, seed, count);
            spec.min_sep = min_sep;
            spec.scale = scale;
            cmd_random(&spec, &output_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

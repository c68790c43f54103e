use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vamkit::exec::Execution;
use vamkit::numeric::linalg::Vector;
use vamkit::numeric::parse_scalar;
use vamkit::problem::Problem;
use vamkit::report::{self, Command, ReportOptions};
use vamkit::Error;

/// Variational analysis of compositions of piecewise linear-quadratic
/// functions with polynomial maps.
#[derive(Debug, Parser)]
#[command(name = "vamkit", version)]
struct Args {
    /// check, first-order, d2, proto, optimality, kkt or verify
    command: Command,
    /// Problem file (TOML)
    problem: PathBuf,
    /// Point name from the problem file; defaults to the first by name
    #[arg(long)]
    point: Option<String>,
    /// Extra direction, e.g. "0, 1, -1/2"; may be repeated
    #[arg(long = "w", allow_hyphen_values = true)]
    ws: Vec<String>,
    /// Write the report here instead of standard output
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads for per-direction work; 1 runs sequentially
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_direction(s: &str) -> Result<Vector, Error> {
    let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_scalar(t.trim_matches('"')))
        .collect()
}

fn run(args: &Args) -> Result<String, Error> {
    let src = fs::read_to_string(&args.problem).map_err(|e| Error::Input(format!("{}: {e}", args.problem.display())))?;
    let problem = Problem::from_toml(&src)?;
    let ws = args.ws.iter().map(|w| parse_direction(w)).collect::<Result<Vec<_>, _>>()?;
    let mut opts = ReportOptions::default();
    if args.jobs == Some(1) {
        opts.execution = Execution::Sequential;
        opts.copositivity.execution = Execution::Sequential;
    }
    let build = || report::run(args.command, &problem, args.point.as_deref(), &ws, &opts);
    let value = match args.jobs {
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?
            .install(build)?,
        _ => build()?,
    };
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    Ok(text)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(text) => {
            match &args.json {
                Some(path) => {
                    if let Err(e) = fs::write(path, &text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

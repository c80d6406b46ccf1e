//! `permstat`: statistics, the bijection and its inverse, exhaustive
//! verification, distribution tables and diagrams from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use permstat::distribution::DistributionCache;
use permstat::perm::MAX_N;
use permstat::render::diagram;
use permstat::stats::{parse_stat_list, Stat};
use permstat::verify::{parse_check_list, run_checks, Check};
use permstat::{phi, phi_inverse, phi_inverse_trace, phi_trace, DiagramKind, Format, Permutation, StatVector};

#[derive(Parser)]
#[command(name = "permstat", version, about = "Two-descent permutation statistics and the bijection carrying them to (maj-exc, des, exc)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print statistics of a permutation as JSON.
    Stats {
        /// Digit form (n <= 9) or comma-separated values.
        perm: String,
        /// Comma-separated statistic names; all of them by default.
        #[arg(long)]
        stats: Option<String>,
        /// Human-readable table instead of JSON.
        #[arg(long)]
        pretty: bool,
    },
    /// Apply the forward map.
    Map {
        perm: String,
        /// Emit the step-by-step JSON trace.
        #[arg(long)]
        trace: bool,
    },
    /// Apply the inverse map.
    Invert {
        perm: String,
        #[arg(long)]
        trace: bool,
    },
    /// Run exhaustive checks over S_n.
    Verify {
        #[arg(long, default_value_t = 7)]
        n: usize,
        /// Comma-separated subset of bijection,triple,eq1,eq2,eq3,mahonian.
        #[arg(long, default_value = "bijection,triple,eq1,eq2,eq3,mahonian")]
        check: String,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Joint distribution table of a statistic vector (cached).
    Distribution {
        #[arg(long)]
        n: usize,
        /// lhs, rhs or hl.
        #[arg(long)]
        vector: String,
        /// Output file; `.csv` selects CSV, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a linear or planar diagram.
    Render {
        perm: String,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit status: 2 for bad input, 1 otherwise.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<permstat::Error> for Failure {
    fn from(e: permstat::Error) -> Self {
        use permstat::Error::*;
        let code = match e {
            Validation(_) | UnknownToken { .. } | Capacity { .. } => 2,
            _ => 1,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn parse(text: &str) -> Result<Permutation, Failure> {
    Ok(text.parse::<Permutation>()?)
}

/// Digit form when the input used it, comma form otherwise.
fn show(p: &Permutation, like: &str) -> String {
    match p.to_digits() {
        Some(d) if !like.contains(',') => d,
        _ => p.to_string(),
    }
}

macro_rules! to_json {
    ($v:expr) => {
        serde_json::to_string_pretty($v).context("serializing output")
    };
}

fn jobs_or_default(jobs: Option<usize>) -> usize {
    jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Stats { perm, stats, pretty } => {
            let p = parse(&perm)?;
            let stats = match stats {
                Some(list) => parse_stat_list(&list)?,
                None => Stat::ALL.to_vec(),
            };
            if pretty {
                let w = stats.iter().map(|s| s.token().len()).max().unwrap_or(0);
                for s in stats {
                    println!("{:<w$}  {}", s.token(), s.eval(&p));
                }
            } else {
                let fields: Vec<String> =
                    stats.iter().map(|s| format!("\"{}\":{}", s.token(), s.eval(&p))).collect();
                println!("{{{}}}", fields.join(","));
            }
        }
        Command::Map { perm, trace } => {
            let p = parse(&perm)?;
            if trace {
                println!("{}", to_json!(&phi_trace(&p)?)?);
            } else {
                println!("{}", show(&phi(&p)?, &perm));
            }
        }
        Command::Invert { perm, trace } => {
            let t = parse(&perm)?;
            if trace {
                println!("{}", to_json!(&phi_inverse_trace(&t)?)?);
            } else {
                println!("{}", show(&phi_inverse(&t)?, &perm));
            }
        }
        Command::Verify { n, check, jobs } => {
            let checks: Vec<Check> = parse_check_list(&check)?;
            let jobs = jobs_or_default(jobs);
            let reports = run_checks(n, &checks, jobs)?;
            let pass = reports.iter().all(|r| r.pass);
            let doc = serde_json::json!({ "n": n, "pass": pass, "checks": reports });
            println!("{}", to_json!(&doc)?);
            if !pass {
                for r in reports.iter().filter(|r| !r.pass) {
                    eprintln!("FAIL {} (n = {n}): {}", r.check, r.detail);
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Distribution { n, vector, out } => {
            let vector: StatVector = vector.parse()?;
            if n == 0 || n > MAX_N {
                return Err(permstat::Error::Capacity { n, cap: MAX_N }.into());
            }
            let cache = DistributionCache::from_env();
            let (poly, hit) = cache.get_or_compute(n, vector, jobs_or_default(None))?;
            let table = poly.to_table(n, vector)?;
            match out {
                None => println!("{}", table.to_json()),
                Some(path) => {
                    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
                    let text = if csv { poly.to_csv() } else { table.to_json() };
                    std::fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    let doc = serde_json::json!({
                        "n": n,
                        "vector": vector,
                        "terms": poly.len(),
                        "total": poly.total().to_string(),
                        "cache": if hit { "hit" } else { "miss" },
                        "out": path,
                    });
                    println!("{}", to_json!(&doc)?);
                }
            }
        }
        Command::Render { perm, kind, format, out } => {
            let p = parse(&perm)?;
            let kind: DiagramKind = kind.parse()?;
            let format: Format = format.parse()?;
            let d = diagram(&p, kind);
            let doc = d.render(format);
            match out {
                None => print!("{doc}"),
                Some(path) => {
                    std::fs::write(&path, doc)
                        .with_context(|| format!("writing {}", path.display()))?;
                    let summary = serde_json::json!({
                        "out": path,
                        "kind": kind,
                        "format": format,
                        "arcs": d.arc_count(),
                        "boxes": d.box_count(),
                        "circled": d.circled_count(),
                    });
                    println!("{}", to_json!(&summary)?);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
